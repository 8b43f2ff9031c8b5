"""Matrix-path foundations shared by the index modules.

Paths of symmetric matrices are stored as dense samples and interpolated
linearly; symplectic paths are produced from a symmetric generator by
integrating ``Psi' = J0 S Psi`` with a fourth-order Magnus scheme.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.linalg import expm

from .errors import DimensionError, IntegrationError, ValidationError

SYMMETRY_TOL = 1e-10
DEFAULT_SYMPLECTIC_TOL = 1e-9
MAX_DIM = 64
MAX_REFINE = 6


def standard_j(dim: int) -> np.ndarray:
    """Standard complex structure ``[[0, -I], [I, 0]]`` on R^dim."""
    if dim % 2:
        raise DimensionError(f"symplectic dimension must be even, got {dim}")
    k = dim // 2
    j = np.zeros((dim, dim))
    j[:k, k:] = -np.eye(k)
    j[k:, :k] = np.eye(k)
    return j


def symplectic_defect(m: np.ndarray) -> float:
    m = np.asarray(m, dtype=float)
    j = standard_j(m.shape[0])
    return float(np.max(np.abs(m.T @ j @ m - j)))


def validate_symplectic(m, tol: float = DEFAULT_SYMPLECTIC_TOL) -> bool:
    """True iff ``max|M^T J0 M - J0| <= tol``."""
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {m.shape}")
    if m.shape[0] % 2:
        raise DimensionError(f"odd dimension {m.shape[0]}")
    if tol <= 0:
        raise ValidationError("tol must be positive")
    return symplectic_defect(m) <= tol


def inertia(m: np.ndarray, tol: float = 1e-12) -> tuple[int, int, int]:
    """(positive, negative, null) eigenvalue counts of a symmetric matrix."""
    m = np.asarray(m, dtype=float)
    if m.size == 0:
        return 0, 0, 0
    w = np.linalg.eigvalsh(0.5 * (m + m.T))
    return int(np.sum(w > tol)), int(np.sum(w < -tol)), int(np.sum(np.abs(w) <= tol))


def signature(m: np.ndarray, tol: float = 1e-12) -> int:
    pos, neg, _ = inertia(m, tol)
    return pos - neg


def min_abs_eig(m: np.ndarray) -> float:
    m = np.asarray(m, dtype=float)
    if m.size == 0:
        return np.inf
    return float(np.min(np.abs(np.linalg.eigvalsh(m))))


def _as_symmetric(m, dim: int, what: str) -> np.ndarray:
    m = np.array(m, dtype=float).reshape(dim, dim)
    scale = max(1.0, float(np.max(np.abs(m)))) if m.size else 1.0
    if m.size and np.max(np.abs(m - m.T)) > SYMMETRY_TOL * scale:
        raise ValidationError(f"{what} is not symmetric")
    if not np.all(np.isfinite(m)):
        raise ValidationError(f"{what} has non-finite entries")
    return 0.5 * (m + m.T)


@dataclass(frozen=True, eq=False)
class SymmetricPath:
    """Piecewise-linear path of symmetric ``dim x dim`` matrices.

    ``left``/``right`` are the asymptotes at -inf/+inf.  When an asymptote
    differs from the boundary sample the path is understood to continue
    linearly to it over one extra unit of parameter.
    """

    params: np.ndarray
    mats: np.ndarray
    left: np.ndarray
    right: np.ndarray

    def __post_init__(self):
        params = np.asarray(self.params, dtype=float)
        if params.ndim != 1 or len(params) < 1:
            raise ValidationError("need at least one sample")
        if len(params) > 1 and np.any(np.diff(params) <= 0):
            raise ValidationError("parameters must be strictly increasing")
        mats = np.asarray(self.mats, dtype=float)
        if mats.ndim != 3 or mats.shape[0] != len(params) or mats.shape[1] != mats.shape[2]:
            raise DimensionError(f"bad sample array shape {mats.shape}")
        dim = mats.shape[1]
        if dim > MAX_DIM:
            raise DimensionError(f"dimension {dim} exceeds {MAX_DIM}")
        mats = np.stack([_as_symmetric(a, dim, f"sample {i}") for i, a in enumerate(mats)]) \
            if dim else mats
        object.__setattr__(self, "params", params)
        object.__setattr__(self, "mats", mats)
        object.__setattr__(self, "left", _as_symmetric(self.left, dim, "left asymptote"))
        object.__setattr__(self, "right", _as_symmetric(self.right, dim, "right asymptote"))
        for arr in (self.params, self.mats, self.left, self.right):
            arr.setflags(write=False)

    @classmethod
    def from_samples(cls, params, mats, left=None, right=None) -> "SymmetricPath":
        mats = np.asarray(mats, dtype=float)
        return cls(params, mats,
                   mats[0] if left is None else left,
                   mats[-1] if right is None else right)

    @property
    def dim(self) -> int:
        return self.mats.shape[1]

    @property
    def interval(self) -> tuple[float, float]:
        return float(self.params[0]), float(self.params[-1])

    def __len__(self):
        return len(self.params)

    def __call__(self, s: float) -> np.ndarray:
        p = self.params
        if len(p) == 1 or s <= p[0]:
            return self.mats[0].copy()
        if s >= p[-1]:
            return self.mats[-1].copy()
        i = int(np.searchsorted(p, s, side="right")) - 1
        tau = (s - p[i]) / (p[i + 1] - p[i])
        return (1 - tau) * self.mats[i] + tau * self.mats[i + 1]

    def nodes(self) -> tuple[np.ndarray, np.ndarray]:
        """Interpolation nodes including the virtual asymptote segments."""
        params, mats = list(self.params), list(self.mats)
        if not np.array_equal(self.left, self.mats[0]):
            params.insert(0, params[0] - 1.0)
            mats.insert(0, self.left)
        if not np.array_equal(self.right, self.mats[-1]):
            params.append(params[-1] + 1.0)
            mats.append(self.right)
        return np.array(params), np.array(mats)

    def map(self, fn: Callable[[float, np.ndarray], np.ndarray]) -> "SymmetricPath":
        """Apply ``fn(s, A)`` samplewise; asymptotes get s = -inf / +inf."""
        mats = np.array([fn(s, a) for s, a in zip(self.params, self.mats)])
        return SymmetricPath(self.params, mats, fn(-np.inf, self.left), fn(np.inf, self.right))

    def resample(self, params) -> "SymmetricPath":
        params = np.asarray(params, dtype=float)
        return SymmetricPath(params, np.array([self(s) for s in params]), self.left, self.right)

    # JSON interchange: {"dim", "interval", "samples": [[s, row-major]], asymptotes}
    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "interval": list(self.interval),
            "samples": [[float(s), [float(x) for x in a.ravel()]]
                        for s, a in zip(self.params, self.mats)],
            "left_asymptote": [float(x) for x in self.left.ravel()],
            "right_asymptote": [float(x) for x in self.right.ravel()],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SymmetricPath":
        try:
            dim = int(data["dim"])
            samples = data["samples"]
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"malformed path document: {exc}") from None
        if not samples:
            raise ValidationError("path document has no samples")
        params = [float(s) for s, _ in samples]
        mats = []
        for s, entries in samples:
            if len(entries) != dim * dim:
                raise DimensionError(f"sample at s={s} has {len(entries)} entries, "
                                     f"expected {dim * dim}")
            mats.append(np.array(entries, dtype=float).reshape(dim, dim))
        mats = np.array(mats).reshape(len(params), dim, dim)
        left = data.get("left_asymptote")
        right = data.get("right_asymptote")
        path = cls.from_samples(
            params, mats,
            None if left is None else np.array(left, dtype=float).reshape(dim, dim),
            None if right is None else np.array(right, dtype=float).reshape(dim, dim))
        if "interval" in data:
            lo, hi = (float(x) for x in data["interval"])
            if (lo, hi) != path.interval:
                raise ValidationError("interval does not match the sample parameters")
        return path


def dump_path(path: SymmetricPath) -> str:
    return json.dumps(path.to_dict(), sort_keys=True)


def load_path(text: str) -> SymmetricPath:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"path file is not valid JSON: {exc}") from None
    return SymmetricPath.from_dict(data)


def sample_path(generator: Callable[[float], np.ndarray], interval: Sequence[float],
                count: int) -> SymmetricPath:
    """Sample ``generator`` at ``count`` uniform points of ``interval``."""
    if count < 2:
        raise ValidationError("count must be at least 2")
    lo, hi = (float(x) for x in interval)
    if not hi > lo:
        raise ValidationError("interval must have positive length")
    params = np.linspace(lo, hi, count)
    first = np.atleast_2d(np.asarray(generator(params[0]), dtype=float))
    mats = np.empty((count,) + first.shape)
    mats[0] = first
    for i, s in enumerate(params[1:], start=1):
        mats[i] = np.atleast_2d(np.asarray(generator(s), dtype=float))
    return SymmetricPath.from_samples(params, mats)


def constant_path(matrix, interval=(0.0, 1.0)) -> SymmetricPath:
    m = np.atleast_2d(np.asarray(matrix, dtype=float))
    return sample_path(lambda s: m, interval, 2)


@dataclass(frozen=True, eq=False)
class SymplecticPath:
    """Samples of the linearized flow ``Psi`` of a symmetric generator."""

    generator: SymmetricPath
    times: np.ndarray
    mats: np.ndarray
    max_defect: float = field(default=0.0)

    @property
    def dim(self) -> int:
        return self.mats.shape[1]

    @property
    def final(self) -> np.ndarray:
        return self.mats[-1]


_G = np.sqrt(3.0) / 6.0


def magnus_step(gen: Callable[[float], np.ndarray], j: np.ndarray, t: float,
                h: float) -> np.ndarray:
    """One fourth-order Magnus step for ``X' = J0 S(t) X`` over ``[t, t+h]``."""
    a1 = j @ gen(t + (0.5 - _G) * h)
    a2 = j @ gen(t + (0.5 + _G) * h)
    omega = 0.5 * h * (a1 + a2) + (np.sqrt(3.0) / 12.0) * h * h * (a2 @ a1 - a1 @ a2)
    return expm(omega)


def _relative_defect(m, j):
    return float(np.max(np.abs(m.T @ j @ m - j))) / max(1.0, float(np.max(np.abs(m))) ** 2)


def propagate(gen: Callable[[float], np.ndarray], j: np.ndarray, t0: float, t1: float,
              start: np.ndarray, substeps: int = 1) -> np.ndarray:
    h = (t1 - t0) / substeps
    x = start
    for i in range(substeps):
        x = magnus_step(gen, j, t0 + i * h, h) @ x
    return x


def linearized_flow(S: SymmetricPath, steps: int, tol: float = DEFAULT_SYMPLECTIC_TOL,
                    shift: float = 0.0) -> SymplecticPath:
    """Integrate ``Psi' = J0 (S(t) - shift) Psi`` on [0, 1] with ``Psi(0) = id``.

    Returns ``steps + 1`` equally spaced samples.  A step whose symplectic
    defect (relative to ``|Psi|^2``) exceeds ``tol`` is redone with halved
    substeps, at most ``MAX_REFINE`` times.
    """
    if steps < 1:
        raise ValidationError("steps must be at least 1")
    lo, hi = S.interval
    if len(S) > 1 and (abs(lo) > 1e-12 or abs(hi - 1.0) > 1e-12):
        raise ValidationError(f"generator must live on [0, 1], got [{lo}, {hi}]")
    dim = S.dim
    j = standard_j(dim)
    eye = np.eye(dim)
    gen = (lambda t: S(t) - shift * eye) if shift else S
    times = np.linspace(0.0, 1.0, steps + 1)
    mats = np.empty((steps + 1, dim, dim))
    mats[0] = eye
    worst = 0.0
    for i in range(steps):
        for level in range(MAX_REFINE + 1):
            nxt = propagate(gen, j, times[i], times[i + 1], mats[i], 2 ** level)
            defect = _relative_defect(nxt, j)
            if defect <= tol:
                break
        else:
            raise IntegrationError(
                f"symplectic defect {defect:.3g} above {tol:.3g} at t={times[i + 1]:.6g}")
        mats[i + 1] = nxt
        worst = max(worst, defect)
    return SymplecticPath(S, times, mats, worst)


@dataclass(frozen=True, eq=False)
class RegularPair:
    """Pair (A, B): A symmetric on W, B: V -> W.  Validated lazily."""

    A: np.ndarray
    B: np.ndarray

    def __post_init__(self):
        a = np.atleast_2d(np.asarray(self.A, dtype=float))
        b = np.asarray(self.B, dtype=float)
        if b.ndim == 1:
            b = b.reshape(-1, 1)
        if b.ndim != 2 or b.shape[0] != a.shape[0]:
            raise DimensionError(f"B has shape {b.shape}, A has shape {a.shape}")
        if b.shape[1] > b.shape[0]:
            raise DimensionError("dim V must not exceed dim W")
        object.__setattr__(self, "A", _as_symmetric(a, a.shape[0], "A"))
        object.__setattr__(self, "B", b)
