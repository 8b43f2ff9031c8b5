"""Discretized Rabinowitz action functional for the unit circle in the plane.

Loops are ``N`` samples of ``v: R/Z -> R^2``.  Integrals over the loop are
sample means (the periodic trapezoidal rule) and the gradient is taken in
the matching ``L^2`` metric, so it is the exact gradient of the discrete
functional whenever the derivative matrix is antisymmetric.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np
import scipy.linalg

from .errors import HypothesisError, PreconditionError, SearchError, ValidationError

MIN_SAMPLES = 8
DEFAULT_SAMPLES = 256
DERIVATIVES = ("spectral", "central")

_U0, _U1 = 2.25, 4.0


@dataclass(frozen=True, eq=False)
class DiscreteLoop:
    points: np.ndarray
    eta: float

    def __post_init__(self):
        p = np.array(self.points, dtype=float)
        if p.ndim != 2 or p.shape[1] != 2:
            raise ValidationError("loop points must have shape (N, 2)")
        if p.shape[0] < MIN_SAMPLES:
            raise ValidationError(f"need at least {MIN_SAMPLES} samples, got {p.shape[0]}")
        if not (np.all(np.isfinite(p)) and math.isfinite(self.eta)):
            raise ValidationError("loop coordinates must be finite")
        p.setflags(write=False)
        object.__setattr__(self, "points", p)
        object.__setattr__(self, "eta", float(self.eta))

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @classmethod
    def circle(cls, n: int = DEFAULT_SAMPLES, k: int = 1, radius: float = 1.0,
               eta: float = 0.0, phase: float = 0.0) -> "DiscreteLoop":
        """``radius * exp(2 pi i k t + i phase)``; ``k = 0`` gives a constant loop."""
        t = np.arange(n) / n
        ang = 2 * np.pi * k * t + phase
        return cls(radius * np.stack([np.cos(ang), np.sin(ang)], -1), eta)

    def as_vector(self) -> np.ndarray:
        return np.r_[self.points[:, 0], self.points[:, 1], self.eta]

    @classmethod
    def from_vector(cls, u: np.ndarray) -> "DiscreteLoop":
        n = (len(u) - 1) // 2
        return cls(np.stack([u[:n], u[n:2 * n]], -1), u[-1])


@lru_cache(maxsize=16)
def derivative_matrix(n: int, kind: str = "spectral") -> np.ndarray:
    """Antisymmetric periodic ``d/dt`` on ``n`` samples of ``[0, 1)``."""
    if kind == "central":
        d = np.zeros((n, n))
        i = np.arange(n)
        d[i, (i + 1) % n] = n / 2.0
        d[i, (i - 1) % n] = -n / 2.0
    elif kind == "spectral":
        freqs = np.fft.fftfreq(n, 1.0 / n)
        if n % 2 == 0:
            freqs[n // 2] = 0.0
        d = np.real(np.fft.ifft(2j * np.pi * freqs[:, None] * np.fft.fft(np.eye(n), axis=0), axis=0))
        d = 0.5 * (d - d.T)
    else:
        raise ValidationError(f"derivative must be one of {DERIVATIVES}")
    d.setflags(write=False)
    return d


@dataclass(frozen=True)
class CircleModel:
    """``H = phi(|z|^2)`` with ``phi(u) = u - 1`` for ``u <= 9/4``, constant for ``u >= 4``.

    Between the two radii ``phi'`` falls from 1 to 0 along a quintic
    smoothstep, so ``H`` is C^3 and ``X_H = J0 grad H`` equals the Reeb
    field ``2 d/dtheta`` on the unit circle.
    """
    derivative: str = "spectral"

    def __post_init__(self):
        if self.derivative not in DERIVATIVES:
            raise ValidationError(f"derivative must be one of {DERIVATIVES}")

    @staticmethod
    def _phi(u):
        u = np.asarray(u, dtype=float)
        h = _U1 - _U0
        tau = np.clip((u - _U0) / h, 0.0, 1.0)
        smooth = tau ** 3 * (10 - 15 * tau + 6 * tau ** 2)
        val = np.where(u <= _U0, u - 1.0,
                       _U0 - 1.0 + (np.minimum(u, _U1) - _U0) - h * tau ** 4 * (2.5 - 3 * tau + tau ** 2))
        d1 = 1.0 - smooth
        d2 = -30.0 * tau ** 2 * (1 - tau) ** 2 / h
        return val, d1, d2

    @property
    def c_H(self) -> float:
        """``max |H|``, attained where ``H`` is constant."""
        return float(self._phi(_U1)[0])

    @property
    def outer_radius(self) -> float:
        return math.sqrt(_U1)

    def H(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        return self._phi(np.sum(p * p, axis=-1))[0]

    def grad_H(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        _, d1, _ = self._phi(np.sum(p * p, axis=-1))
        return 2.0 * d1[..., None] * p

    def hess_H(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        _, d1, d2 = self._phi(np.sum(p * p, axis=-1))
        return (2.0 * d1[..., None, None] * np.eye(2)
                + 4.0 * d2[..., None, None] * p[..., :, None] * p[..., None, :])

    def X_H(self, p) -> np.ndarray:
        g = self.grad_H(p)
        return np.stack([-g[..., 1], g[..., 0]], -1)

    @staticmethod
    def lam(p, w) -> np.ndarray:
        """``lambda_p(w)`` for ``lambda = (x dy - y dx)/2``."""
        p, w = np.asarray(p), np.asarray(w)
        return 0.5 * (p[..., 0] * w[..., 1] - p[..., 1] * w[..., 0])

    @staticmethod
    def c_delta(delta: float) -> float:
        """``2 sup |lambda|`` over the shell ``|H| < delta``."""
        return math.sqrt(1.0 + delta)

    @staticmethod
    def step1_admissible(delta: float) -> bool:
        """``lambda(X_H) = |z|^2 >= 1/2 + delta`` on the shell iff ``delta <= 1/4``."""
        return 0 < delta <= 0.25

    def D(self, n: int) -> np.ndarray:
        return derivative_matrix(n, self.derivative)


def action(loop: DiscreteLoop, model: CircleModel) -> float:
    v = loop.points
    dv = model.D(loop.n) @ v
    return float(np.mean(model.lam(v, dv)) - loop.eta * np.mean(model.H(v)))


def gradient(loop: DiscreteLoop, model: CircleModel) -> tuple[np.ndarray, float]:
    """``(-J0 (v' - eta X_H(v)), -mean H(v))``."""
    v = loop.points
    dv = model.D(loop.n) @ v
    w = dv - loop.eta * model.X_H(v)
    return np.stack([w[:, 1], -w[:, 0]], -1), float(-np.mean(model.H(v)))


def grad_norm(loop: DiscreteLoop, model: CircleModel) -> float:
    gv, ge = gradient(loop, model)
    return float(math.sqrt(np.mean(np.sum(gv * gv, axis=1)) + ge * ge))


def pairing(grad: tuple[np.ndarray, float], direction: tuple[np.ndarray, float]) -> float:
    """Metric pairing on loops x R (sample mean in the loop factor)."""
    return float(np.mean(np.sum(grad[0] * direction[0], axis=1)) + grad[1] * direction[1])


def _residual(u: np.ndarray, model: CircleModel) -> tuple[np.ndarray, float]:
    loop = DiscreteLoop.from_vector(u)
    gv, ge = gradient(loop, model)
    r = np.r_[gv[:, 0], gv[:, 1], ge]
    n = loop.n
    return r, float(math.sqrt(np.sum(r[:-1] ** 2) / n + r[-1] ** 2))


def _jacobian(u: np.ndarray, model: CircleModel) -> np.ndarray:
    n = (len(u) - 1) // 2
    v = np.stack([u[:n], u[n:2 * n]], -1)
    eta = u[-1]
    d = model.D(n)
    hess = model.hess_H(v)
    g = model.grad_H(v)
    jac = np.zeros((2 * n + 1, 2 * n + 1))
    idx = np.arange(n)
    jac[:n, n:2 * n] = d
    jac[n:2 * n, :n] = -d
    jac[idx, idx] -= eta * hess[:, 0, 0]
    jac[idx, n + idx] -= eta * hess[:, 0, 1]
    jac[n + idx, idx] -= eta * hess[:, 1, 0]
    jac[n + idx, n + idx] -= eta * hess[:, 1, 1]
    jac[:n, -1] = -g[:, 0]
    jac[n:2 * n, -1] = -g[:, 1]
    jac[-1, :n] = -g[:, 0] / n
    jac[-1, n:2 * n] = -g[:, 1] / n
    return jac


@dataclass(frozen=True)
class CriticalPoint:
    loop: DiscreteLoop
    action: float
    residual: float
    iterations: int

    @property
    def eta(self) -> float:
        return self.loop.eta


def find_critical(start: DiscreteLoop, model: CircleModel, tol: float = 1e-10,
                  max_iter: int = 60) -> CriticalPoint:
    """Newton iteration on the gradient with a damped fallback.

    Each step solves the (rank-deficient) linearization in the least-squares
    sense and backtracks until the residual decreases; if no Newton step
    helps, a steepest-descent step on the squared residual is tried.
    """
    if tol <= 0:
        raise ValidationError("tol must be positive")
    u = start.as_vector()
    r, res = _residual(u, model)
    iterations = 0
    while res >= tol:
        if iterations == max_iter:
            raise SearchError(f"no convergence after {max_iter} iterations, residual {res:.3g}", res)
        iterations += 1
        jac = _jacobian(u, model)
        step = scipy.linalg.lstsq(jac, -r, cond=1e-12, lapack_driver="gelsy")[0]
        moved = False
        for candidate in (step, -(jac.T @ r)):
            t = 1.0
            for _ in range(30):
                trial = u + t * candidate
                r_new, res_new = _residual(trial, model)
                if res_new < res:
                    u, r, res, moved = trial, r_new, res_new, True
                    break
                t *= 0.5
            if moved:
                break
        if not moved:
            raise SearchError(f"search stalled at residual {res:.3g}", res)
    loop = DiscreteLoop.from_vector(u)
    a = action(loop, model)
    if abs(a - loop.eta) >= 10 * tol:
        raise SearchError(f"action {a!r} differs from eta {loop.eta!r} at a critical point", res)
    return CriticalPoint(loop, a, res, iterations)


# ---------------------------------------------------------------- a priori bounds

@dataclass(frozen=True)
class BoundCheck:
    lhs: float
    rhs: float
    holds: bool

    def to_dict(self) -> dict:
        return {"lhs": self.lhs, "rhs": self.rhs, "holds": self.holds}


def _check_delta(delta: float):
    if not CircleModel.step1_admissible(delta):
        raise PreconditionError(f"delta = {delta!r} outside (0, 1/4]; the shell estimate does not apply")


def eta_bound_check(loop: DiscreteLoop, model: CircleModel, delta: float) -> BoundCheck:
    """``|eta| <= 2 |A| + c_delta ||grad A||`` for loops inside the shell."""
    _check_delta(delta)
    if np.max(np.abs(model.H(loop.points))) >= delta:
        raise PreconditionError("loop leaves the shell |H| < delta")
    lhs = abs(loop.eta)
    rhs = 2 * abs(action(loop, model)) + model.c_delta(delta) * grad_norm(loop, model)
    return BoundCheck(lhs, rhs, lhs <= rhs)


@dataclass(frozen=True)
class GradLowerBound:
    grad_norm: float
    bound: float
    holds: bool | None
    regime: str
    transverse_length: float | None = None

    def to_dict(self) -> dict:
        return {"grad_norm": self.grad_norm, "bound": self.bound, "holds": self.holds,
                "regime": self.regime, "transverse_length": self.transverse_length}


def grad_lower_bound(loop: DiscreteLoop, model: CircleModel, delta: float) -> GradLowerBound:
    """``||grad A|| >= delta/2`` for loops avoiding the half shell.

    Loops that enter the half shell are reported as the crossing regime: the
    bound is not asserted and the arc length spent in
    ``delta/2 <= |H| < delta`` is returned as a diagnostic.
    """
    if delta <= 0:
        raise ValidationError("delta must be positive")
    h = np.abs(model.H(loop.points))
    g = grad_norm(loop, model)
    if np.all(h >= delta / 2):
        return GradLowerBound(g, delta / 2, g >= delta / 2, "outside")
    dv = model.D(loop.n) @ loop.points
    band = (h >= delta / 2) & (h < delta)
    length = float(np.sum(np.linalg.norm(dv[band], axis=1)) / loop.n)
    return GradLowerBound(g, delta / 2, None, "crossing", length)


def c_M(M: float, eps: float, c_delta: float) -> float:
    """Constant of the Lagrange-multiplier bound: ``2M + eps c_delta``."""
    return 2 * M + eps * c_delta


def flowline_eta_bound(E: float, c_M: float, eps: float, c_H: float) -> float:
    """``c_M + c_H E / eps^2`` for flow lines of energy ``E``."""
    if eps <= 0:
        raise ValidationError("eps must be positive")
    return c_M + c_H * E / eps ** 2


def homotopy_eta_bound(Delta: float, c_M: float, eps: float, c_H: float, delta: float) -> float:
    """``(eps^2 c_M + c_H Delta) / (eps^2 - c_H delta)``, valid for ``delta < eps^2/c_H``."""
    if eps <= 0:
        raise ValidationError("eps must be positive")
    if not delta * c_H < eps ** 2:
        raise HypothesisError(f"delta = {delta!r} violates delta < eps^2 / c_H")
    return (eps ** 2 * c_M + c_H * Delta) / (eps ** 2 - c_H * delta)


@dataclass(frozen=True)
class NoCritEpsilon:
    eps: object
    margin: object
    strict: bool

    def to_dict(self) -> dict:
        return {"eps": str(self.eps), "margin": str(self.margin), "strict": self.strict}


def nocrit_epsilon(c, delta) -> NoCritEpsilon:
    """``eps = delta / (2 (2c + delta))``.

    Checks ``eps < delta/(2c + delta)`` and ``-2 c eps + delta (1 - eps) > 0``;
    exact when the inputs are rationals (ints or ``Fraction``).
    """
    if not (c > 0 and delta > 0):
        raise ValidationError("c and delta must be positive")
    exact = all(isinstance(x, (int, Fraction)) for x in (c, delta))
    if exact:
        c, delta = Fraction(c), Fraction(delta)
    eps = delta / (2 * (2 * c + delta))
    margin = -2 * c * eps + delta * (1 - eps)
    strict = eps < delta / (2 * c + delta) and margin > 0
    if not strict:
        raise ValidationError(f"inequalities fail for c={c}, delta={delta}")
    return NoCritEpsilon(eps, margin, strict)


# ---------------------------------------------------------------- randomized suites

def _smooth_perturbation(rng: np.random.Generator, n: int, amplitude: float, modes: int = 4):
    """Low-mode periodic field with ``sup |p| + sup |p'| / (2 pi modes) <= amplitude``."""
    t = np.arange(n) / n
    coef = rng.standard_normal((modes, 2, 2))
    p = np.zeros((n, 2))
    for j in range(modes):
        ang = 2 * np.pi * (j + 1) * t
        p += np.cos(ang)[:, None] * coef[j, 0] + np.sin(ang)[:, None] * coef[j, 1]
    scale = np.max(np.linalg.norm(p, axis=1))
    return amplitude * p / scale if scale else p


def step1_loops(count: int, seed: int, delta: float, n: int = DEFAULT_SAMPLES):
    """Perturbed critical orbits, perturbation amplitude at most ``delta/4``."""
    rng = np.random.default_rng(seed)
    for _ in range(count):
        k = int(rng.integers(-3, 4))
        base = DiscreteLoop.circle(n, k, phase=float(rng.uniform(0, 2 * np.pi)))
        pts = base.points + _smooth_perturbation(rng, n, rng.uniform(0, delta / 4))
        yield DiscreteLoop(pts, np.pi * k + rng.normal(0, 0.5))


def step2_loops(count: int, seed: int, delta: float, n: int = DEFAULT_SAMPLES):
    """Loops with every sample off the half shell ``|H| < delta/2``."""
    rng = np.random.default_rng(seed)
    for _ in range(count):
        outside = bool(rng.integers(0, 2))
        lo, hi = ((1 + delta / 2, 3.5) if outside else (0.05, 1 - delta / 2))
        for _ in range(100):
            r0 = math.sqrt(rng.uniform(lo, hi))
            room = min(math.sqrt(hi) - r0, r0 - math.sqrt(lo))
            if room > 1e-3:
                break
        k = int(rng.integers(-3, 4))
        base = DiscreteLoop.circle(n, k, r0, phase=float(rng.uniform(0, 2 * np.pi)))
        pts = base.points + _smooth_perturbation(rng, n, 0.9 * room) if room > 0 else base.points
        yield DiscreteLoop(pts, rng.normal(0, 5))


def critical_starts(k: int, count: int, seed: int, n: int = DEFAULT_SAMPLES,
                    amplitude: float = 0.05, eta_noise: float = 0.1):
    rng = np.random.default_rng(seed)
    for _ in range(count):
        base = DiscreteLoop.circle(n, k, phase=float(rng.uniform(0, 2 * np.pi)))
        pts = base.points + _smooth_perturbation(rng, n, amplitude)
        yield DiscreteLoop(pts, np.pi * k + rng.normal(0, eta_noise))


@dataclass(frozen=True)
class GradientCheck:
    fd: float
    pairing: float
    rel_error: float

    def to_dict(self) -> dict:
        return {"fd": self.fd, "pairing": self.pairing, "rel_error": self.rel_error}


def gradient_fd_check(loop: DiscreteLoop, direction: tuple[np.ndarray, float],
                      model: CircleModel, h: float = 1e-5) -> GradientCheck:
    """Central finite difference of the action against the gradient pairing."""
    dv, de = direction
    plus = DiscreteLoop(loop.points + h * dv, loop.eta + h * de)
    minus = DiscreteLoop(loop.points - h * dv, loop.eta - h * de)
    fd = (action(plus, model) - action(minus, model)) / (2 * h)
    pr = pairing(gradient(loop, model), direction)
    return GradientCheck(fd, pr, abs(fd - pr) / max(abs(pr), 1e-300))


def gradient_cases(count: int, seed: int, n: int = DEFAULT_SAMPLES):
    """Random smooth loops (some reaching the cutoff) and random directions."""
    rng = np.random.default_rng(seed)
    for _ in range(count):
        k = int(rng.integers(-3, 4))
        base = DiscreteLoop.circle(n, k, float(rng.uniform(0.3, 2.2)))
        pts = base.points + _smooth_perturbation(rng, n, rng.uniform(0, 0.3))
        loop = DiscreteLoop(pts, rng.normal(0, 3))
        direction = (_smooth_perturbation(rng, n, 1.0), float(rng.standard_normal()))
        yield loop, direction
