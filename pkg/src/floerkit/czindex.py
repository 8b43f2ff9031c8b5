"""Robbin-Salamon / Conley-Zehnder indices of paths generated by ``J0 S(t)``.

The path ``Psi`` solves ``Psi' = J0 (S(t) - delta) Psi`` with ``Psi(0) = id``.
A crossing is a time where ``id - Psi(t)`` is singular; it contributes the
signature of ``S(t) - delta`` on the kernel, with weight 1/2 at the ends.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .core import (SymmetricPath, constant_path, propagate, linearized_flow, standard_j,
                   inertia, DEFAULT_SYMPLECTIC_TOL)
from .errors import (PreconditionError, ResolutionError, SweepError, ValidationError)

KERNEL_CUTOFF = 1e-8
AMBIGUOUS_BAND = 1e-5
FORM_TOL = 1e-9
T_TOL = 1e-13
DEFAULT_SWEEP = (1e-1, 5e-2, 1e-2, 5e-3, 1e-3)
CONVENTIONS = ("worked", "display")

_HALF = Fraction(1, 2)
_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class CZCrossing:
    t: float
    kernel_dim: int
    signature: int
    weight: Fraction

    @property
    def contribution(self) -> Fraction:
        return self.weight * self.signature

    def to_dict(self) -> dict:
        return {"t": self.t, "kernel_dim": self.kernel_dim, "signature": self.signature,
                "weight": str(self.weight)}


@dataclass(frozen=True)
class CZReport:
    index: Fraction
    crossings: tuple[CZCrossing, ...]
    perturbation: float
    steps: int = 0

    @property
    def doubled(self) -> int:
        """``2 * index`` as an integer."""
        return int(2 * self.index)

    def to_dict(self) -> dict:
        return {"index": str(self.index), "doubled": self.doubled,
                "perturbation": self.perturbation, "steps": self.steps,
                "crossings": [c.to_dict() for c in self.crossings]}


def default_steps(S: SymmetricPath, delta: float = 0.0) -> int:
    scale = max(float(np.max(np.abs(S.mats))), abs(delta))
    return int(max(256, math.ceil(64 * scale)))


def _form_signature(S: SymmetricPath, t: float, delta: float, kernel: np.ndarray,
                    strict: bool) -> int:
    gen = S(t) - delta * np.eye(S.dim)
    form = kernel.T @ gen @ kernel
    form = 0.5 * (form + form.T)
    scale = max(1.0, float(np.max(np.abs(gen))))
    pos, neg, null = inertia(form, FORM_TOL * scale)
    if strict and null:
        raise ResolutionError(
            f"degenerate crossing form at t={t:.12g}; use perturbed_limits (delta sweep)")
    return pos - neg


def _kernel(m: np.ndarray, cutoff: float) -> np.ndarray:
    _, sv, vh = np.linalg.svd(m)
    return vh[sv <= cutoff].T


def _golden_min(fn, a: float, b: float, tol: float = T_TOL):
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = fn(c), fn(d)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = fn(d)
    t = 0.5 * (a + b)
    return t, fn(t)


def rs_index(S: SymmetricPath, delta: float = 0.0, steps: int | None = None,
             tol: float = DEFAULT_SYMPLECTIC_TOL) -> CZReport:
    """Index of the path generated by ``S - delta`` on [0, 1].

    Directions that stay in ``ker(id - Psi)`` across the grid (for example the
    flat direction of a shear) are treated as a persistent kernel: they do not
    produce interior crossings, and only the next singular value is searched
    for isolated crossings.
    """
    steps = steps or default_steps(S, delta)
    flow = linearized_flow(S, steps, tol, shift=delta)
    dim = S.dim
    eye = np.eye(dim)
    j = standard_j(dim)
    gen = (lambda t: S(t) - delta * eye) if delta else S
    svals = np.array([np.linalg.svd(eye - m, compute_uv=False)[::-1] for m in flow.mats])
    scale = max(1.0, float(np.max(np.abs(flow.mats))))
    cutoff = KERNEL_CUTOFF * scale

    crossings = [CZCrossing(0.0, dim, _form_signature(S, 0.0, delta, eye, strict=False), _HALF)]
    inner = svals[1:-1]
    persistent = int(np.min(np.sum(inner <= cutoff, axis=1))) if len(inner) else 0
    if persistent < dim:
        watch = svals[:, persistent]
        times = flow.times

        def at(i, t):
            m = propagate(gen, j, times[i], t, flow.mats[i], 4)
            return m

        def sigma(i):
            return lambda t: np.linalg.svd(eye - at(i, t), compute_uv=False)[::-1][persistent]

        last = None
        for i in range(1, steps + 1):
            right = watch[i + 1] if i < steps else np.inf
            if not (watch[i] <= watch[i - 1] and watch[i] < right):
                continue
            hi = times[i + 1] if i < steps else 1.0
            t, val = _golden_min(sigma(i - 1), times[i - 1], hi)
            if t >= 1.0 - 1e3 * T_TOL:
                continue
            if val > AMBIGUOUS_BAND * scale:
                continue
            if val > cutoff:
                raise ResolutionError(
                    f"near-crossing at t={t:.12g} (sigma={val:.3g}); use perturbed_limits")
            if last is not None and t - last < 1e-9:
                continue
            last = t
            kernel = _kernel(eye - at(i - 1, t), max(cutoff, 10 * val))
            sig = _form_signature(S, t, delta, kernel, strict=persistent == 0)
            crossings.append(CZCrossing(float(t), kernel.shape[1], sig, Fraction(1)))

    if svals[-1, 0] <= cutoff:
        kernel = _kernel(eye - flow.mats[-1], cutoff)
        crossings.append(CZCrossing(1.0, kernel.shape[1],
                                    _form_signature(S, 1.0, delta, kernel, strict=False), _HALF))
    elif svals[-1, 0] <= AMBIGUOUS_BAND * scale:
        raise ResolutionError(
            f"endpoint nearly degenerate (sigma={svals[-1, 0]:.3g}); use perturbed_limits")
    index = sum((c.contribution for c in crossings), Fraction(0))
    return CZReport(index, tuple(crossings), float(delta), steps)


@dataclass(frozen=True)
class PerturbedLimits:
    mu_plus: int
    mu_minus: int
    history: tuple[tuple[float, int, int], ...] = field(default=())

    @property
    def gap(self) -> int:
        return self.mu_minus - self.mu_plus

    def to_dict(self) -> dict:
        return {"mu_plus": self.mu_plus, "mu_minus": self.mu_minus, "gap": self.gap,
                "history": [list(h) for h in self.history]}


def perturbed_limits(S: SymmetricPath, sweep=DEFAULT_SWEEP, steps: int | None = None) -> PerturbedLimits:
    """Limits of the index as ``delta -> 0`` from above and from below."""
    sweep = [float(d) for d in sweep]
    if len(sweep) < 3:
        raise ValidationError("sweep needs at least three values")
    if any(d <= 0 for d in sweep) or any(b >= a for a, b in zip(sweep, sweep[1:])):
        raise ValidationError("sweep must be positive and strictly decreasing")
    history = []
    for d in sweep:
        plus = rs_index(S, d, steps).index
        minus = rs_index(S, -d, steps).index
        if plus.denominator != 1 or minus.denominator != 1:
            raise SweepError(f"perturbed index not an integer at delta={d:g}")
        history.append((d, int(plus), int(minus)))
    tail = {h[1:] for h in history[-3:]}
    if len(tail) != 1:
        raise SweepError(f"delta sweep did not stabilize: {history}")
    _, mu_plus, mu_minus = history[-1]
    return PerturbedLimits(mu_plus, mu_minus, tuple(history))


def _sign(x: float) -> int:
    return (x > 0) - (x < 0)


def shear_generator(a: float) -> SymmetricPath:
    return constant_path(np.array([[a, 0.0], [0.0, 0.0]]))


def rotation_generator(k: float, dim: int = 2) -> SymmetricPath:
    return constant_path(2.0 * math.pi * k * np.eye(dim))


def reverse_generator(S: SymmetricPath) -> SymmetricPath:
    """Generator ``-S(1 - t)`` of the path ``Psi(1 - t) Psi(1)^{-1}``."""
    params = 1.0 - S.params[::-1]
    return SymmetricPath.from_samples(params, -S.mats[::-1])


def symplectic_sum(S1: SymmetricPath, S2: SymmetricPath) -> SymmetricPath:
    """Generator of the product path on ``R^{2n} x R^{2m}`` in ``(x, y)`` ordering."""
    n, m = S1.dim // 2, S2.dim // 2
    params = np.union1d(S1.params, S2.params)
    first = np.r_[np.arange(n), n + m + np.arange(n)]
    second = np.r_[n + np.arange(m), 2 * n + m + np.arange(m)]
    mats = np.zeros((len(params), S1.dim + S2.dim, S1.dim + S2.dim))
    for i, s in enumerate(params):
        mats[i][np.ix_(first, first)] = S1(s)
        mats[i][np.ix_(second, second)] = S2(s)
    return SymmetricPath.from_samples(params, mats)


@dataclass(frozen=True)
class Coz1Check:
    lhs: Fraction
    rhs: Fraction
    agree: bool

    def to_dict(self) -> dict:
        return {"lhs": str(self.lhs), "rhs": str(self.rhs), "agree": self.agree}


def coz1_check(eta: float, hpp: float, delta: float) -> Coz1Check:
    """Perturbed index of the normal shear block against ``(sign a - sign delta)/2``."""
    a = eta * hpp
    if a == 0:
        raise PreconditionError("eta * h''(0) must be nonzero")
    if abs(delta) >= abs(a):
        raise PreconditionError(f"|delta| = {abs(delta):g} must be below |a| = {abs(a):g}")
    lhs = rs_index(shear_generator(a), delta).index
    rhs = Fraction(_sign(a) - _sign(delta), 2)
    return Coz1Check(lhs, rhs, lhs == rhs)


@dataclass(frozen=True)
class Coz2Relations:
    gap: int
    expected_gap: int
    mu: Fraction
    mu_plus: int
    mu_minus: int
    agree: bool

    def to_dict(self) -> dict:
        return {"gap": self.gap, "expected_gap": self.expected_gap, "mu": str(self.mu),
                "mu_plus": self.mu_plus, "mu_minus": self.mu_minus, "agree": self.agree}


def coz2_relations(S: SymmetricPath, geometric_dim_C: int, transverse: bool = False,
                   sweep=DEFAULT_SWEEP) -> Coz2Relations:
    """Compare the jump ``mu_minus - mu_plus`` with the declared family dimension."""
    if geometric_dim_C < 0:
        raise ValidationError("component dimension must be nonnegative")
    limits = perturbed_limits(S, sweep)
    expected = geometric_dim_C - 1 if transverse else geometric_dim_C
    mu = rs_index(S, 0.0).index
    half = Fraction(expected, 2)
    agree = (limits.gap == expected and mu == limits.mu_plus + half
             and mu == limits.mu_minus - half)
    return Coz2Relations(limits.gap, expected, mu, limits.mu_plus, limits.mu_minus, agree)


@dataclass(frozen=True)
class GradedGenerator:
    cz: Fraction
    sig_index: Fraction
    grading: Fraction
    action: float = 0.0
    label: str = ""

    def __post_init__(self):
        if self.grading != self.cz + self.sig_index:
            raise ValidationError("grading must equal cz + sig_index")

    def to_dict(self) -> dict:
        return {"label": self.label, "cz": str(self.cz), "sig_index": str(self.sig_index),
                "grading": str(self.grading), "action": self.action}


def as_half_integer(x) -> Fraction:
    """Exact conversion; floats must be exact multiples of 1/2."""
    q = Fraction(x)
    if (2 * q).denominator != 1:
        raise ValidationError(f"{x!r} is not a half-integer")
    return q


def sig_index(morse_index_h: int, dim_component: int, convention: str = "worked") -> Fraction:
    """``ind^sigma_h`` of a critical point of ``h`` on a component.

    ``"worked"`` gives ``ind - dim/2``; ``"display"`` gives ``-ind - dim/2``.
    """
    if convention not in CONVENTIONS:
        raise ValidationError(f"convention must be one of {CONVENTIONS}")
    if not 0 <= morse_index_h <= dim_component:
        raise ValidationError(
            f"Morse index {morse_index_h} outside [0, {dim_component}]")
    sign = 1 if convention == "worked" else -1
    return sign * morse_index_h - Fraction(dim_component, 2)


def floer_grading(cz, morse_index_h: int, dim_component: int, action: float = 0.0,
                  convention: str = "worked", label: str = "") -> GradedGenerator:
    cz = as_half_integer(cz)
    s = sig_index(morse_index_h, dim_component, convention)
    return GradedGenerator(cz, s, cz + s, float(action), label)


def virtual_dimension(cz_minus, cz_plus, dim_minus: int, dim_plus: int, c1: int = 0) -> Fraction:
    """``cz+ - cz- + (dim C- + dim C+)/2 + 2 c1`` for a connecting family."""
    return (as_half_integer(cz_plus) - as_half_integer(cz_minus)
            + Fraction(dim_minus + dim_plus, 2) + 2 * int(c1))
