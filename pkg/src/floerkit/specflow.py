"""Spectral flow of symmetric matrix paths and Lagrange-multiplier corrections.

Three independent routes compute the flow of a path with invertible ends:

* ``crossing_form``: locate kernel crossings by bisecting on the inertia,
  then take the signature of the derivative restricted to the kernel;
* ``endpoint_signature``: ``(sign A+ - sign A-) / 2``;
* ``eigenvalue_tracking``: follow every eigenvalue branch on a dense grid
  and count signed zero crossings.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from .core import RegularPair, SymmetricPath, min_abs_eig, signature
from .errors import (DegenerateEndpointError, DimensionError, RegularityError,
                     ResolutionError, SweepError, ValidationError)

PARAM_TOL = 1e-10
KERNEL_CUTOFF = 1e-8
INVERTIBLE_TOL = 1e-8
SUBSAMPLES = 16
ORACLE_SAMPLES = 64
MAX_ORACLE_DEPTH = 12
RESOLVE_DELTAS = (1e-7, 1e-6, 1e-5, 1e-4)

METHODS = ("crossing_form", "endpoint_signature", "eigenvalue_tracking")
_ALIASES = {"crossing": "crossing_form", "endpoint": "endpoint_signature",
            "oracle": "eigenvalue_tracking"}


class RegularizationWarning(UserWarning):
    """delta is not small compared with the asymptotic spectral gap."""


@dataclass(frozen=True)
class Crossing:
    s: float
    kernel_dim: int
    signature: int


@dataclass(frozen=True)
class SpectralFlowReport:
    flow: int
    method: str
    crossings: tuple = ()
    delta: float = 0.0

    def to_dict(self) -> dict:
        return {
            "flow": self.flow,
            "method": self.method,
            "delta": self.delta,
            "crossings": [{"s": c.s, "kernel_dim": c.kernel_dim, "signature": c.signature}
                          for c in self.crossings],
        }


def cutoff(s) -> float | np.ndarray:
    """C^1 ramp from -1 (s <= -1) to 1 (s >= 1)."""
    u = np.clip(s, -1.0, 1.0)
    return 0.5 * (3.0 * u - u ** 3)


def _scale(path: SymmetricPath) -> float:
    return max(1.0, float(np.max(np.abs(path.mats))) if path.mats.size else 1.0)


def _check_ends(path: SymmetricPath):
    tol = INVERTIBLE_TOL * _scale(path)
    for name, a in (("left", path.left), ("right", path.right)):
        if min_abs_eig(a) <= tol:
            raise DegenerateEndpointError(
                f"{name} asymptote is not invertible; apply delta_regularize first")


def _neg(a: np.ndarray) -> int:
    return int(np.sum(np.linalg.eigvalsh(a) < 0.0))


def endpoint_flow(path: SymmetricPath) -> int:
    _check_ends(path)
    twice = signature(path.right) - signature(path.left)
    return twice // 2


def _segments(path: SymmetricPath):
    params, mats = path.nodes()
    for i in range(len(params) - 1):
        yield params[i], params[i + 1], mats[i], mats[i + 1]


def _brackets(evaluate, a, b, na, nb, out):
    """Split [a, b] until every bracket holding an inertia jump is tiny."""
    stack = [(a, b, na, nb)]
    while stack:
        a, b, na, nb = stack.pop()
        if na == nb:
            continue
        if b - a <= PARAM_TOL:
            out.append((a, b, na, nb))
            continue
        m = 0.5 * (a + b)
        nm = _neg(evaluate(m))
        stack.append((m, b, nm, nb))
        stack.append((a, m, na, nm))


def _merge_touching(brackets):
    """A crossing sitting exactly on a grid point or node shows up as two
    brackets sharing that point (zero eigenvalues count as neither sign)."""
    out = []
    for br in brackets:
        if out and out[-1][1] == br[0]:
            a, _, na, _, seg = out.pop()
            br = (a, br[1], na, br[3], seg)
        out.append(br)
    return out


def _crossing_report(path: SymmetricPath) -> list[Crossing]:
    segments = list(_segments(path))

    def evaluate(s, seg):
        p0, p1, a0, a1 = segments[seg]
        tau = (s - p0) / (p1 - p0)
        return (1 - tau) * a0 + tau * a1

    def locate(s):
        return next(i for i, sg in enumerate(segments) if sg[0] <= s <= sg[1])

    brackets = []
    for seg, (p0, p1, _, _) in enumerate(segments):
        ev = lambda s, seg=seg: evaluate(s, seg)
        grid = np.linspace(p0, p1, SUBSAMPLES + 1)
        counts = [_neg(ev(s)) for s in grid]
        local = []
        for k in range(SUBSAMPLES):
            _brackets(ev, grid[k], grid[k + 1], counts[k], counts[k + 1], local)
        brackets.extend(br + (seg,) for br in local)
    found = []
    for a, b, na, nb, seg in _merge_touching(sorted(brackets)):
        s = 0.5 * (a + b)
        seg = locate(s)
        p0, p1, a0, a1 = segments[seg]
        w, v = np.linalg.eigh(evaluate(s, seg))
        jump = na - nb
        kernel = np.abs(w) < KERNEL_CUTOFF
        if kernel.sum() < abs(jump):
            kernel = np.zeros_like(kernel)
            kernel[np.argsort(np.abs(w))[:abs(jump)]] = True
        basis = v[:, kernel]
        # central difference across a node uses the average of both slopes
        h = 1e-3 * (p1 - p0) / SUBSAMPLES
        lo, hi = max(segments[0][0], s - h), min(segments[-1][1], s + h)
        if hi > lo:
            deriv = (evaluate(hi, locate(hi)) - evaluate(lo, locate(lo))) / (hi - lo)
        else:
            deriv = (a1 - a0) / (p1 - p0)
        form = basis.T @ deriv @ basis
        fw = np.linalg.eigvalsh(form)
        ftol = KERNEL_CUTOFF * max(1.0, float(np.max(np.abs(deriv))))
        if fw.size and np.min(np.abs(fw)) <= ftol:
            raise _Degenerate(s)
        sig = int(np.sum(fw > 0) - np.sum(fw < 0))
        if sig != jump:
            raise _Degenerate(s)
        found.append(Crossing(float(s), int(basis.shape[1]), sig))
    return found


class _Degenerate(Exception):
    def __init__(self, s):
        self.s = s


def _matched(prev_vecs, vecs):
    overlap = np.abs(prev_vecs.T @ vecs)
    rows, cols = linear_sum_assignment(-overlap)
    return cols, float(np.min(overlap[rows, cols]))


def _evaluator(path: SymmetricPath):
    params, mats = path.nodes()

    def evaluate(s):
        if len(params) == 1 or s <= params[0]:
            return mats[0]
        if s >= params[-1]:
            return mats[-1]
        i = min(int(np.searchsorted(params, s, side="right")) - 1, len(params) - 2)
        tau = (s - params[i]) / (params[i + 1] - params[i])
        return (1 - tau) * mats[i] + tau * mats[i + 1]

    return params, evaluate


def track_branches(path: SymmetricPath, samples: int = ORACLE_SAMPLES):
    """Eigenvalue branches ordered by eigenvector continuity.

    Returns ``(s, values)`` with ``values[k, b]`` the b-th branch at ``s[k]``.
    Intervals where branches cannot be matched are bisected, up to
    ``MAX_ORACLE_DEPTH`` times.
    """
    params, evaluate = _evaluator(path)
    grid = list(zip(params[:-1], params[1:]))
    w, v = np.linalg.eigh(evaluate(params[0]))
    ts, values = [float(params[0])], [w]
    prev_w, prev_v = w, v
    for p0, p1 in grid:
        edges = np.linspace(p0, p1, samples + 1)
        queue = [(edges[i], edges[i + 1], 0) for i in range(samples)]
        while queue:
            a, b, depth = queue.pop(0)
            w, v = np.linalg.eigh(evaluate(b))
            cols, quality = _matched(prev_v, v)
            if quality < 0.5:
                spread = float(np.ptp(w)) if len(w) else 0.0
                clustered = spread < 1e-9 * max(1.0, float(np.max(np.abs(w))))
                if not clustered and depth < MAX_ORACLE_DEPTH:
                    m = 0.5 * (a + b)
                    queue[:0] = [(a, m, depth + 1), (m, b, depth + 1)]
                    continue
                if not clustered and np.max(np.abs(w[cols] - prev_w)) > 1e-6:
                    raise ResolutionError(
                        f"eigenvalue branches cannot be matched near s={b:.6g}")
            prev_w, prev_v = w[cols], v[:, cols]
            ts.append(float(b))
            values.append(prev_w)
    return np.array(ts), np.array(values)


def oracle_flow(path: SymmetricPath, samples: int = ORACLE_SAMPLES,
                with_crossings: bool = False):
    """Brute-force flow by eigenvalue-branch tracking."""
    _check_ends(path)
    crossings = []
    if path.dim:
        ts, vals = track_branches(path, samples)
        last = np.sign(vals[0])
        for k in range(1, len(ts)):
            cur = np.sign(vals[k])
            for b in np.nonzero((cur != 0) & (cur != last))[0]:
                step = int(cur[b])
                lam0, lam1 = vals[k - 1, b], vals[k, b]
                frac = lam0 / (lam0 - lam1) if lam0 != lam1 else 0.5
                crossings.append(Crossing(float(ts[k - 1] + frac * (ts[k] - ts[k - 1])), 1, step))
                last[b] = cur[b]
    total = sum(c.signature for c in crossings)
    return (total, crossings) if with_crossings else total


def spectral_flow_oracle(path: SymmetricPath, samples: int = ORACLE_SAMPLES) -> int:
    """Integer flow from eigenvalue tracking alone."""
    return oracle_flow(path, samples)


def spectral_flow(path: SymmetricPath, method: str = "crossing_form") -> SpectralFlowReport:
    method = _ALIASES.get(method, method)
    if method not in METHODS:
        raise ValidationError(f"unknown method {method!r}")
    _check_ends(path)
    if method == "endpoint_signature":
        return SpectralFlowReport(endpoint_flow(path), method)
    if method == "eigenvalue_tracking":
        flow, crossings = oracle_flow(path, with_crossings=True)
        return SpectralFlowReport(flow, method, tuple(crossings))
    try:
        crossings = _crossing_report(path)
        return SpectralFlowReport(sum(c.signature for c in crossings), method, tuple(crossings))
    except _Degenerate as first:
        gap = min(min_abs_eig(path.left), min_abs_eig(path.right))
        for d in RESOLVE_DELTAS:
            delta = d * _scale(path)
            if delta >= 0.5 * gap:
                break
            try:
                crossings = _crossing_report(_shift(path, delta))
            except _Degenerate:
                continue
            return SpectralFlowReport(sum(c.signature for c in crossings), method,
                                      tuple(crossings), delta)
        raise ResolutionError(
            f"degenerate crossing near s={first.s:.6g} survives delta-perturbation") from None


def _beta_knots(path: SymmetricPath) -> np.ndarray:
    lo, hi = path.interval
    knots = np.linspace(-1.0, 1.0, 17)
    return np.union1d(path.params, knots[(knots > lo) & (knots < hi)])


def _shift(path: SymmetricPath, delta: float) -> SymmetricPath:
    eye = np.eye(path.dim)
    params = _beta_knots(path)
    mats = np.array([path(s) - delta * cutoff(s) * eye for s in params])
    return SymmetricPath(params, mats, path.left + delta * eye, path.right - delta * eye)


def delta_regularize(path: SymmetricPath, delta: float) -> SymmetricPath:
    """Return ``A - delta * beta * id``.

    Warns with :class:`RegularizationWarning` when ``delta`` is not below the
    smallest nonzero asymptotic eigenvalue magnitude.
    """
    if not delta > 0:
        raise ValidationError("delta must be positive")
    nonzero = []
    for a in (path.left, path.right):
        w = np.abs(np.linalg.eigvalsh(a)) if a.size else np.array([])
        nonzero.extend(w[w > INVERTIBLE_TOL * _scale(path)])
    if nonzero and delta >= min(nonzero):
        warnings.warn(f"delta={delta} is not below the asymptotic gap {min(nonzero):.3g}",
                      RegularizationWarning, stacklevel=2)
    return _shift(path, delta)


@dataclass(frozen=True)
class StabilizedFlow:
    flow: int
    deltas: tuple
    flows: tuple


def regularized_flow(path: SymmetricPath, deltas=(1e-1, 1e-2, 1e-3, 1e-4),
                     method: str = "crossing_form") -> StabilizedFlow:
    """Flow of ``A_delta`` along a decreasing delta sweep; must stabilize."""
    deltas = tuple(float(d) for d in deltas)
    if len(deltas) < 3 or any(b >= a for a, b in zip(deltas, deltas[1:])):
        raise ValidationError("need a strictly decreasing sweep of at least three deltas")
    flows = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RegularizationWarning)
        for d in deltas:
            flows.append(spectral_flow(delta_regularize(path, d), method).flow)
    if len(set(flows[-3:])) != 1:
        raise SweepError(f"delta sweep did not stabilize: {flows}")
    return StabilizedFlow(flows[-1], deltas, tuple(flows))


# regular pairs ------------------------------------------------------------

def pair_form(pair: RegularPair) -> np.ndarray:
    """The form ``B^T Ahat^{-1} B`` on V, after checking regularity."""
    a, b = pair.A, pair.B
    if b.shape[1] == 0:
        return np.zeros((0, 0))
    scale = max(1.0, float(np.max(np.abs(a))) if a.size else 1.0)
    u, s, _ = np.linalg.svd(b, full_matrices=False)
    if s[-1] <= 1e-10 * max(1.0, s[0]):
        raise RegularityError("B is not injective", "injective")
    q = u
    aq = a @ q
    residual = aq - q @ (q.T @ aq)
    if np.max(np.abs(residual)) > 1e-9 * scale:
        raise RegularityError("A does not preserve the range of B", "invariant")
    ahat = q.T @ aq
    if min_abs_eig(ahat) <= 1e-10 * scale:
        raise RegularityError("A restricted to the range of B is singular", "invertible")
    qb = q.T @ b
    form = qb.T @ np.linalg.solve(ahat, qb)
    return 0.5 * (form + form.T)


def regular_pair_signature(pair: RegularPair) -> int:
    form = pair_form(pair)
    if form.size == 0:
        return 0
    w = np.linalg.eigvalsh(form)
    # regularity makes the form nondegenerate
    return int(np.sum(w > 0) - np.sum(w < 0))


@dataclass(frozen=True, eq=False)
class AugmentedPath:
    """A symmetric path A on W together with a matrix path B: V -> W."""

    A: SymmetricPath
    B: np.ndarray
    B_left: np.ndarray
    B_right: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.B, dtype=float)
        dw = self.A.dim
        if b.ndim != 3 or b.shape[0] != len(self.A) or b.shape[1] != dw:
            raise DimensionError(f"B samples have shape {b.shape}")
        dv = b.shape[2]
        for name in ("B_left", "B_right"):
            m = np.asarray(getattr(self, name), dtype=float).reshape(dw, dv)
            object.__setattr__(self, name, m)
        object.__setattr__(self, "B", b)

    @classmethod
    def from_samples(cls, A: SymmetricPath, B, B_left=None, B_right=None):
        B = np.asarray(B, dtype=float)
        return cls(A, B, B[0] if B_left is None else B_left, B[-1] if B_right is None else B_right)

    @property
    def dim_v(self) -> int:
        return self.B.shape[2]

    @staticmethod
    def _block(a, b):
        dv = b.shape[1]
        return np.block([[a, b], [b.T, np.zeros((dv, dv))]])

    def augmented(self) -> SymmetricPath:
        mats = np.array([self._block(a, b) for a, b in zip(self.A.mats, self.B)])
        return SymmetricPath(self.A.params, mats,
                             self._block(self.A.left, self.B_left),
                             self._block(self.A.right, self.B_right))


@dataclass(frozen=True)
class LagrangeIdentity:
    mu_AB: int
    mu_A: int
    sigma_minus: int
    sigma_plus: int
    identity_holds: bool


def lagrange_flow_identity(path: AugmentedPath, method: str = "crossing_form") -> LagrangeIdentity:
    _check_ends(path.A)
    sigma_minus = regular_pair_signature(RegularPair(path.A.left, path.B_left))
    sigma_plus = regular_pair_signature(RegularPair(path.A.right, path.B_right))
    mu_a = spectral_flow(path.A, method).flow
    mu_ab = spectral_flow(path.augmented(), method).flow
    holds = 2 * mu_ab == 2 * mu_a + sigma_minus - sigma_plus
    return LagrangeIdentity(mu_ab, mu_a, sigma_minus, sigma_plus, holds)


@dataclass(frozen=True)
class VarlagCheck:
    sigma: int
    minus_sign_dv: int
    agree: bool
    eigen_residual: float = field(default=0.0)


def varlag_signature(a: float, b: float) -> VarlagCheck:
    """Quadratic Lagrange-multiplier model on the plane.

    ``f = a x^2/2 + b y^2/2`` with constraint ``h = x``.  The critical points
    of ``f + v (h - rho)`` are ``x = rho, y = 0, v = -a rho``.
    """
    if a == 0:
        raise RegularityError("a = 0: grad h lies in the kernel of the Hessian", "invertible")

    def critical(rho):
        system = np.array([[a, 0.0, 1.0], [0.0, b, 0.0], [1.0, 0.0, 0.0]])
        sol, *_ = np.linalg.lstsq(system, np.array([0.0, 0.0, rho]), rcond=None)
        return sol

    x0, y0, v0 = critical(0.0)
    eps = 1e-3
    dv = (critical(eps)[2] - critical(-eps)[2]) / (2 * eps)
    # Hess h vanishes for linear h, so the v0 term drops out
    hess = np.diag([a, b])
    grad_h = np.array([[1.0], [0.0]])
    sigma = regular_pair_signature(RegularPair(hess, grad_h))
    minus_sign = -int(math.copysign(1, dv)) if dv != 0 else 0
    residual = float(np.max(np.abs(hess @ grad_h[:, 0] + dv * grad_h[:, 0])))
    return VarlagCheck(sigma, minus_sign, sigma == minus_sign, residual)
