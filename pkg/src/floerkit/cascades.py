"""Morse-Bott complexes with cascades over Z/2.

Orientation convention: boundary maps go from a source ``x+`` to a target
``x-`` along the negative gradient of ``f`` (and of ``h`` on critical
components), so along a cascade ``f`` decreases and the action of the
target is strictly below that of the source.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import (ConsistencyError, CountUnreliableError, DataError, DomainError,
                     PreconditionError, ValidationError)

FLAVORS = ("morse", "signature", "floer")


def signature_index(ind_m: int, dim: int) -> Fraction:
    """``ind_m - dim/2``."""
    if dim < 0 or not 0 <= ind_m <= dim:
        raise ValidationError(f"index {ind_m} outside [0, {dim}]")
    return Fraction(ind_m) - Fraction(dim, 2)


@dataclass(frozen=True)
class CriticalComponent:
    """A component ``C`` of ``crit(f)`` with the critical points of ``h`` on it.

    ``ind_f`` is the Morse index of ``f`` along ``C``; Floer-type components
    carry ``cz`` instead (or as well).
    """
    id: str
    dim: int
    morse_points: tuple[tuple[str, int], ...]
    ind_f: int | None = None
    cz: Fraction | None = None

    def __post_init__(self):
        if self.dim < 0:
            raise ValidationError("component dimension must be nonnegative")
        if not self.morse_points:
            raise ValidationError(f"component {self.id} has no critical points of h")
        object.__setattr__(self, "morse_points", tuple((str(p), int(i)) for p, i in self.morse_points))
        for p, ind in self.morse_points:
            if not 0 <= ind <= self.dim:
                raise ValidationError(f"ind_h({p}) = {ind} outside [0, {self.dim}]")
        if self.ind_f is None and self.cz is None:
            raise ValidationError(f"component {self.id} needs ind_f or cz")
        if self.cz is not None:
            object.__setattr__(self, "cz", Fraction(self.cz))

    def point(self, label: str) -> "CriticalPoint":
        return CriticalPoint(self, label)


@dataclass(frozen=True)
class CriticalPoint:
    component: CriticalComponent
    label: str

    def __post_init__(self):
        if self.label not in dict(self.component.morse_points):
            raise ValidationError(f"{self.label} is not a critical point on {self.component.id}")

    @property
    def ind_h(self) -> int:
        return dict(self.component.morse_points)[self.label]

    @property
    def name(self) -> str:
        return f"{self.component.id}:{self.label}"


def _need(value, what):
    if value is None:
        raise DataError(f"missing index data: {what}")
    return value


def _sigma_f(c: CriticalComponent, ambient_dim: int) -> Fraction:
    return _need(c.ind_f, f"ind_f({c.id})") - Fraction(ambient_dim - c.dim, 2)


def _chain_term(prev: CriticalComponent, cur: CriticalComponent, flavor: str, ambient_dim):
    """``dim M(C_{i-1}, C_i) - dim C_i`` for one cascade."""
    if flavor == "morse":
        flow = _need(cur.ind_f, f"ind_f({cur.id})") - _need(prev.ind_f, f"ind_f({prev.id})") + cur.dim
    else:
        flow = (_sigma_f(cur, ambient_dim) - _sigma_f(prev, ambient_dim)
                + Fraction(cur.dim + prev.dim, 2))
    return flow - cur.dim


def cascade_dimension(x_minus: CriticalPoint, x_plus: CriticalPoint,
                      components_chain: Sequence[CriticalComponent] | None = None,
                      flavor: str = "morse", ambient_dim: int | None = None) -> int:
    """Dimension of the moduli space of cascades from ``x_plus`` down to ``x_minus``.

    With a chain ``C_0, ..., C_k`` the dimension is assembled cascade by
    cascade; otherwise the telescoped endpoint formula is used.  The
    ``"signature"`` flavor needs ``ambient_dim``; ``"floer"`` needs ``cz``.
    """
    if flavor not in FLAVORS:
        raise ValidationError(f"flavor must be one of {FLAVORS}")
    cm, cp = x_minus.component, x_plus.component
    if flavor == "floer":
        def mu(x):
            return _need(x.component.cz, f"cz({x.component.id})") + signature_index(x.ind_h, x.component.dim)
        value = mu(x_plus) - mu(x_minus) - 1
    elif flavor == "signature" and ambient_dim is None:
        raise DataError("signature flavor needs the ambient dimension")
    elif components_chain:
        chain = list(components_chain)
        if chain[0].id != cm.id or chain[-1].id != cp.id:
            raise ValidationError("chain must run from the component of x- to that of x+")
        value = Fraction(x_plus.ind_h - x_minus.ind_h - 1)
        for prev, cur in zip(chain, chain[1:]):
            value += _chain_term(prev, cur, flavor, ambient_dim)
    elif flavor == "morse":
        value = (_need(cp.ind_f, f"ind_f({cp.id})") + x_plus.ind_h
                 - _need(cm.ind_f, f"ind_f({cm.id})") - x_minus.ind_h - 1)
    else:
        def sigma(x):
            return _sigma_f(x.component, ambient_dim) + signature_index(x.ind_h, x.component.dim)
        value = sigma(x_plus) - sigma(x_minus) - 1
    value = Fraction(value)
    if value.denominator != 1:
        raise DataError(f"non-integral moduli dimension {value}")
    return int(value)


# ---------------------------------------------------------------- chain complexes

@dataclass(frozen=True)
class Generator:
    id: str
    grading: Fraction
    action: float

    def to_dict(self) -> dict:
        return {"id": self.id, "grading": str(self.grading), "action": self.action}


def gf2_rank(mat: np.ndarray) -> int:
    m = (np.asarray(mat, dtype=np.uint8) & 1).copy()
    rank = 0
    rows, cols = m.shape
    for c in range(cols):
        pivot = next((r for r in range(rank, rows) if m[r, c]), None)
        if pivot is None:
            continue
        m[[rank, pivot]] = m[[pivot, rank]]
        hits = np.nonzero(m[:, c])[0]
        hits = hits[hits != rank]
        m[hits] ^= m[rank]
        rank += 1
        if rank == rows:
            break
    return rank


@dataclass(frozen=True, eq=False)
class GradedComplex:
    """Generators with gradings and actions; ``boundary[target, source]`` in Z/2."""
    generators: tuple[Generator, ...]
    boundary: np.ndarray

    def __post_init__(self):
        gens = tuple(self.generators)
        object.__setattr__(self, "generators", gens)
        n = len(gens)
        if len({g.id for g in gens}) != n:
            raise ValidationError("generator ids must be unique")
        b = np.asarray(self.boundary, dtype=np.int64).reshape(n, n) % 2
        b = b.astype(np.uint8)
        b.setflags(write=False)
        object.__setattr__(self, "boundary", b)
        for t, s in zip(*np.nonzero(b)):
            src, tgt = gens[s], gens[t]
            if tgt.grading != src.grading - 1:
                raise ValidationError(f"boundary {src.id} -> {tgt.id} does not lower grading by 1")
            if not tgt.action < src.action:
                raise ValidationError(f"boundary {src.id} -> {tgt.id} does not lower the action")
        sq = (b.astype(np.int64) @ b.astype(np.int64)) % 2
        bad = np.argwhere(sq)
        if len(bad):
            witness = gens[bad[0][1]].id
            raise ConsistencyError(f"boundary squared is nonzero on {witness}", witness)

    @classmethod
    def from_pairs(cls, generators: Sequence[Generator],
                   pairs: Mapping[tuple[str, str], int]) -> "GradedComplex":
        """``pairs[(source, target)]`` gives the count mod 2."""
        index = {g.id: i for i, g in enumerate(generators)}
        b = np.zeros((len(generators), len(generators)), dtype=np.int64)
        for (src, tgt), count in pairs.items():
            b[index[tgt], index[src]] = count % 2
        return cls(tuple(generators), b)

    def gradings(self) -> list[Fraction]:
        return sorted({g.grading for g in self.generators})

    def boundary_of(self, gid: str) -> list[str]:
        s = [g.id for g in self.generators].index(gid)
        return [self.generators[t].id for t in np.nonzero(self.boundary[:, s])[0]]

    def truncate(self, kappa_min: float, kappa_max: float) -> "GradedComplex":
        """Subquotient of generators with action in ``[kappa_min, kappa_max]``."""
        if kappa_min > kappa_max:
            raise ValidationError("empty action window")
        keep = [i for i, g in enumerate(self.generators) if kappa_min <= g.action <= kappa_max]
        return GradedComplex(tuple(self.generators[i] for i in keep),
                             self.boundary[np.ix_(keep, keep)])

    def dual(self) -> "GradedComplex":
        """Negate gradings and actions and transpose the boundary."""
        gens = tuple(Generator(g.id, -g.grading, -g.action) for g in self.generators)
        return GradedComplex(gens, self.boundary.T)

    def to_dict(self) -> dict:
        return {"generators": [g.to_dict() for g in self.generators],
                "boundary": [[self.generators[s].id, self.generators[t].id]
                             for t, s in sorted(zip(*np.nonzero(self.boundary)), key=lambda p: (p[1], p[0]))]}

    def to_csv(self) -> str:
        out = io.StringIO()
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["id", "grading", "action", "boundary"])
        for g in self.generators:
            w.writerow([g.id, str(g.grading), repr(g.action), " ".join(self.boundary_of(g.id))])
        return out.getvalue()


def homology(cx: GradedComplex) -> dict[Fraction, int]:
    """Z/2 ranks of ``ker / im`` per grading."""
    out = {}
    for g in cx.gradings():
        here = [i for i, x in enumerate(cx.generators) if x.grading == g]
        below = [i for i, x in enumerate(cx.generators) if x.grading == g - 1]
        above = [i for i, x in enumerate(cx.generators) if x.grading == g + 1]
        d_out = gf2_rank(cx.boundary[np.ix_(below, here)]) if below else 0
        d_in = gf2_rank(cx.boundary[np.ix_(here, above)]) if above else 0
        out[g] = len(here) - d_out - d_in
    return out


# ---------------------------------------------------------------- flow models

@dataclass(frozen=True, eq=False)
class ModelComponent:
    """Closed-form geometry of one critical component.

    Isolated components carry ``point`` and an orthonormal ``frame`` of the
    tangent plane (used to build the unstable circle).  Circle components
    carry ``coordinate`` (ambient point -> angle), ``h`` and ``dh`` in the
    angle, and ``h_critical`` (label -> angle).
    """
    critical: CriticalComponent
    distance: Callable[[np.ndarray], np.ndarray]
    point: np.ndarray | None = None
    frame: np.ndarray | None = None
    coordinate: Callable[[np.ndarray], np.ndarray] | None = None
    embed: Callable[[np.ndarray], np.ndarray] | None = None
    h: Callable[[np.ndarray], np.ndarray] | None = None
    dh: Callable[[np.ndarray], np.ndarray] | None = None
    h_critical: dict = field(default_factory=dict)

    def h_value(self, label: str) -> float:
        if self.h is None:
            return 0.0
        return float(self.h(np.asarray(self.h_critical[label])))

    def location(self, label: str) -> np.ndarray:
        if self.point is not None:
            return np.asarray(self.point, dtype=float)
        return self.embed(np.asarray([self.h_critical[label]]))[0]


@dataclass(frozen=True, eq=False)
class FlowModel:
    name: str
    ambient_dim: int
    manifold_dim: int
    f: Callable[[np.ndarray], np.ndarray]
    grad: Callable[[np.ndarray], np.ndarray]
    project: Callable[[np.ndarray], np.ndarray]
    components: tuple[ModelComponent, ...]
    epsilon: float = 0.01

    def component(self, cid: str) -> ModelComponent:
        for c in self.components:
            if c.critical.id == cid:
                return c
        raise ValidationError(f"unknown component {cid}")

    def critical_points(self) -> list[CriticalPoint]:
        return [c.critical.point(p) for c in self.components for p, _ in c.critical.morse_points]

    def action(self, x: CriticalPoint) -> float:
        mc = self.component(x.component.id)
        return float(self.f(mc.location(x.label)[None])[0]) + self.epsilon * mc.h_value(x.label)

    def validate(self, samples: int = 400, seed: int = 0, tol: float = 1e-12) -> bool:
        """Gradient vanishes on the declared components and nowhere else sampled."""
        rng = np.random.default_rng(seed)
        for c in self.components:
            if c.point is not None:
                pts = np.asarray(c.point, dtype=float)[None]
            else:
                pts = c.embed(rng.uniform(0, 2 * np.pi, 32))
            if np.max(np.linalg.norm(self.grad(pts), axis=1)) > tol:
                raise ValidationError(f"gradient does not vanish on {c.critical.id}")
        pts = self.project(rng.standard_normal((samples, self.ambient_dim)))
        dist = np.min([c.distance(pts) for c in self.components], axis=0)
        far = dist > 1e-2
        if np.any(np.linalg.norm(self.grad(pts[far]), axis=1) <= 1e-8):
            raise ValidationError("gradient vanishes away from the declared critical set")
        return True


def s2_zsq_model(epsilon: float = 0.01) -> FlowModel:
    """Unit sphere with ``f = z^2`` and ``h = cos(theta)`` on the equator."""
    def f(p):
        return p[..., 2] ** 2

    def grad(p):
        z = p[..., 2:3]
        e3 = np.zeros_like(p)
        e3[..., 2] = 1.0
        return 2.0 * z * (e3 - z * p)

    def project(p):
        return p / np.linalg.norm(p, axis=-1, keepdims=True)

    frame = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
    north = CriticalComponent("N", 0, (("N", 0),), ind_f=2)
    south = CriticalComponent("S", 0, (("S", 0),), ind_f=2)
    circle = CriticalComponent("E", 1, (("c_min", 0), ("c_max", 1)), ind_f=0)
    comps = (
        ModelComponent(north, lambda p: np.linalg.norm(p - [0, 0, 1], axis=-1),
                       point=np.array([0.0, 0.0, 1.0]), frame=frame),
        ModelComponent(south, lambda p: np.linalg.norm(p - [0, 0, -1], axis=-1),
                       point=np.array([0.0, 0.0, -1.0]), frame=frame),
        ModelComponent(circle, lambda p: np.abs(p[..., 2]),
                       coordinate=lambda p: np.arctan2(p[..., 1], p[..., 0]),
                       embed=lambda t: np.stack([np.cos(t), np.sin(t), np.zeros_like(t)], -1),
                       h=np.cos, dh=lambda t: -np.sin(t),
                       h_critical={"c_max": 0.0, "c_min": math.pi}),
    )
    return FlowModel("s2-zsq", 3, 2, f, grad, project, comps, epsilon)


MODELS = {"s2-zsq": s2_zsq_model}


@dataclass(frozen=True)
class CascadeCount:
    parity: int
    count: int
    trajectories: tuple[dict, ...]
    diagnostics: dict

    def to_dict(self) -> dict:
        return {"parity": self.parity, "count": self.count,
                "trajectories": list(self.trajectories), "diagnostics": self.diagnostics}


def _wrap(a):
    return (np.asarray(a) + np.pi) % (2 * np.pi) - np.pi


def _shoot(model: FlowModel, source: ModelComponent, phis: np.ndarray, tube: float,
           dt: float, max_time: float):
    """Follow ``-grad f`` from the unstable circle of an isolated maximum.

    Returns arrival component indices and arrival points; raises if any
    trajectory fails to enter a tube before ``max_time``.
    """
    base = np.asarray(source.point, dtype=float)
    pts = model.project(base + tube * (np.cos(phis)[:, None] * source.frame[0]
                                       + np.sin(phis)[:, None] * source.frame[1]))
    targets = [c for c in model.components if c is not source]
    arrived = np.full(len(phis), -1)
    where = np.zeros_like(pts)
    active = np.ones(len(phis), bool)

    def field(p):
        return -model.grad(p)

    for _ in range(int(math.ceil(max_time / dt))):
        p = pts[active]
        k1 = field(p)
        k2 = field(p + 0.5 * dt * k1)
        k3 = field(p + 0.5 * dt * k2)
        k4 = field(p + dt * k3)
        pts[active] = model.project(p + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4))
        idx = np.nonzero(active)[0]
        for ci, c in enumerate(targets):
            hit = c.distance(pts[idx]) < tube
            arrived[idx[hit]] = ci
            where[idx[hit]] = pts[idx[hit]]
            active[idx[hit]] = False
            idx = idx[~hit]
        if not active.any():
            break
    if active.any():
        raise CountUnreliableError(
            f"{int(active.sum())} shooting trajectories did not reach a critical component")
    return [targets[i] for i in arrived], where


def _circle_flow(comp: ModelComponent, theta0: np.ndarray, dt: float, max_time: float,
                 tube: float) -> np.ndarray:
    """Follow ``-dh`` on a circle component; returns the limit angles."""
    th = np.asarray(theta0, dtype=float).copy()
    crit = np.array(list(comp.h_critical.values()))
    for _ in range(int(math.ceil(max_time / dt))):
        k1 = -comp.dh(th)
        k2 = -comp.dh(th + 0.5 * dt * k1)
        k3 = -comp.dh(th + 0.5 * dt * k2)
        k4 = -comp.dh(th + dt * k3)
        th = th + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        gap = np.min(np.abs(_wrap(th[:, None] - crit[None])), axis=1)
        if np.all(gap < tube):
            return th
    raise CountUnreliableError("h-flow on the component did not converge")


def count_cascades(model: FlowModel, x_minus: CriticalPoint, x_plus: CriticalPoint,
                   tube: float = 1e-3, steps: int = 100, samples: int = 64,
                   max_time: float = 60.0, refine: int = 4) -> CascadeCount:
    """Mod-2 count of rigid cascades from ``x_plus`` down to ``x_minus``.

    ``steps`` is the number of RK4 steps per unit time.  Supported
    configurations are zero cascades on a circle component and one cascade
    from an isolated maximum to the ``h``-maximum of a circle component.
    """
    dim = cascade_dimension(x_minus, x_plus)
    if dim != 0:
        raise PreconditionError(f"moduli space has dimension {dim}; rigid count needs 0")
    if not 0 < tube < 0.1:
        raise ValidationError("tube radius must lie in (0, 0.1)")
    dt = 1.0 / steps
    src = model.component(x_plus.component.id)
    tgt = model.component(x_minus.component.id)
    trajectories = []
    if src is tgt:
        if src.h is None:
            raise DomainError("zero-cascade lines need a circle component")
        start = src.h_critical[x_plus.label]
        ends = _circle_flow(src, np.array([start - tube, start + tube]), dt, max_time, tube)
        goal = src.h_critical[x_minus.label]
        for side, end in zip((-1, 1), ends):
            if abs(_wrap(end - goal)) < tube:
                trajectories.append({"kind": "h-flow", "side": side})
        diagnostics = {"mode": "zero-cascade", "tube": tube, "steps": steps}
    else:
        if src.point is None or src.critical.ind_f != model.manifold_dim or tgt.h is None:
            raise DomainError("unsupported cascade configuration for the shooting scheme")
        if x_minus.ind_h != tgt.critical.dim:
            raise DomainError("shooting counts only end at the h-maximum of the target")
        goal = tgt.h_critical[x_minus.label]

        def offset(phis):
            comps, where = _shoot(model, src, phis, tube, dt, max_time)
            vals = np.full(len(phis), np.nan)
            for i, c in enumerate(comps):
                if c is tgt:
                    vals[i] = _wrap(tgt.coordinate(where[i]) - goal)
            return vals

        phis = 2 * np.pi * (np.arange(samples) + 0.5) / samples
        vals = offset(phis)
        if np.any(np.abs(vals[np.isfinite(vals)]) < 10 * tube):
            raise CountUnreliableError("a shooting sample lands inside the tube around x-")
        for i in range(samples):
            a, b = vals[i], vals[(i + 1) % samples]
            if not (np.isfinite(a) and np.isfinite(b)) or a * b > 0 or abs(a - b) > np.pi:
                continue
            lo = phis[i]
            hi = phis[i + 1] if i + 1 < samples else phis[0] + 2 * np.pi
            for _ in range(refine):
                grid = np.linspace(lo, hi, 17)
                g = offset(grid)
                flips = [k for k in range(16) if g[k] * g[k + 1] <= 0 and abs(g[k] - g[k + 1]) < np.pi]
                if len(flips) != 1:
                    raise CountUnreliableError(f"ambiguous intersection near phi={lo:.6g}")
                lo, hi = grid[flips[0]], grid[flips[0] + 1]
            trajectories.append({"kind": "cascade", "phi": float(_wrap(0.5 * (lo + hi))),
                                 "width": float(hi - lo)})
        diagnostics = {"mode": "shooting", "tube": tube, "steps": steps, "samples": samples}
    count = len(trajectories)
    return CascadeCount(count % 2, count, tuple(trajectories), diagnostics)


def build_complex(model: FlowModel, grading: str = "morse", tube: float = 1e-3,
                  steps: int = 100, samples: int = 64,
                  window: tuple[float, float] | None = None) -> GradedComplex:
    """Assemble the cascade complex of a shipped model."""
    if grading not in ("morse", "signature"):
        raise ValidationError("grading must be 'morse' or 'signature'")
    points = model.critical_points()
    gens, ind = [], {}
    for x in points:
        m = x.component.ind_f + x.ind_h
        g = Fraction(m) if grading == "morse" else Fraction(m) - Fraction(model.manifold_dim, 2)
        gens.append(Generator(x.name, g, model.action(x)))
        ind[x.name] = m
    pairs = {}
    for xp in points:
        for xm in points:
            if ind[xp.name] - ind[xm.name] != 1 or cascade_dimension(xm, xp) != 0:
                continue
            pairs[(xp.name, xm.name)] = count_cascades(model, xm, xp, tube, steps, samples).parity
    cx = GradedComplex.from_pairs(gens, pairs)
    return cx.truncate(*window) if window is not None else cx
