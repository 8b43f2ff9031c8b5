"""Floer homology of the unit cotangent bundle of the round sphere S^n.

Generators are pairs ``(m, x)``: an orbit multiplicity ``m`` (which equals
the action) and a critical point ``x`` of a perfect Morse function on
``S*S^n`` with index in ``{0, n-1, n, 2n-1}``.  Everything is exact.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from .cascades import Generator, GradedComplex
from .czindex import floer_grading
from .errors import UndeterminedError, ValidationError


def _check_n(n: int):
    if int(n) != n or n < 2:
        raise ValidationError(f"sphere dimension must be an integer >= 2, got {n!r}")


def h0_indices(n: int) -> tuple[int, int, int, int]:
    _check_n(n)
    return (0, n - 1, n, 2 * n - 1)


def geodesic_cz(n: int, m: int) -> Fraction:
    """Conley-Zehnder index of the ``m``-fold great circle family.

    For ``m >= 1`` this is the Morse index ``(2m - 1)(n - 1)`` plus half the
    nullity ``2n - 2``; negative ``m`` follows by antisymmetry and ``m = 0``
    (constant orbits) is assigned 0.
    """
    _check_n(n)
    m = int(m)
    if m == 0:
        return Fraction(0)
    if m < 0:
        return -geodesic_cz(n, -m)
    return Fraction((2 * m - 1) * (n - 1)) + Fraction(2 * n - 2, 2)


@dataclass(frozen=True, order=True)
class SphereGenerator:
    m: int
    h0_index: int
    grading: Fraction

    @property
    def action(self) -> int:
        return self.m

    @property
    def label(self) -> str:
        return f"m={self.m},i={self.h0_index}"

    def to_dict(self) -> dict:
        return {"m": self.m, "h0_index": self.h0_index, "grading": str(self.grading),
                "action": self.action}


def generator(n: int, m: int, h0_index: int) -> SphereGenerator:
    if h0_index not in h0_indices(n):
        raise ValidationError(f"h0 index {h0_index} not in {h0_indices(n)}")
    g = floer_grading(geodesic_cz(n, m), h0_index, 2 * n - 1, action=m)
    return SphereGenerator(int(m), int(h0_index), g.grading)


def grading_table(n: int, m_range: Iterable[int]) -> list[SphereGenerator]:
    """All generators with multiplicity in ``m_range``, ordered by ``(m, index)``."""
    return sorted(generator(n, m, i) for m in set(m_range) for i in h0_indices(n))


def lacunary_scan(n: int) -> list[tuple[int, int, int]]:
    """Every ``(i1, i2, dm)`` with ``dm >= 1`` and ``2 dm (n-1) + i2 - i1 = 1``.

    A differential from ``(m1, i1)`` to ``(m2, i2)`` would need to raise the
    action and change the grading by one; this is the complete list of
    index pairs for which that happens, for any ``m1``.
    """
    idx = h0_indices(n)
    out = []
    for i1 in idx:
        for i2 in idx:
            r = 1 - (i2 - i1)
            if r > 0 and r % (2 * (n - 1)) == 0:
                out.append((i1, i2, r // (2 * (n - 1))))
    return out


def differential_candidates(gens: Iterable[SphereGenerator]) -> list[tuple[SphereGenerator, SphereGenerator]]:
    """Pairs ``(a, b)`` where ``b`` could hit ``a``: higher action and grading one above."""
    gens = list(gens)
    return [(a, b) for a in gens for b in gens
            if b.action > a.action and b.grading - a.grading == 1]


def _exact(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(str(x)) if isinstance(x, float) else Fraction(x)


def _m_range(n: int, lo: Fraction, hi: Fraction) -> range:
    period = 2 * (n - 1)
    shift = Fraction(2 * n - 1, 2)
    first = math.floor((lo - (2 * n - 1) + shift) / period)
    last = math.ceil((hi + shift) / period)
    return range(first, last + 1)


@dataclass(frozen=True)
class HFTable:
    n: int
    window: tuple[Fraction, Fraction]
    ranks: dict

    def rank(self, degree) -> int:
        return self.ranks.get(_exact(degree), 0)

    @property
    def degrees(self) -> list[Fraction]:
        return sorted(d for d, r in self.ranks.items() if r)

    def to_dict(self) -> dict:
        return {"n": self.n, "window": [str(w) for w in self.window],
                "ranks": [{"degree": str(d), "value": float(d), "rank": self.ranks[d]}
                          for d in self.degrees]}

    def rows(self) -> list[tuple[str, float, int]]:
        return [(str(d), float(d), self.ranks[d]) for d in self.degrees]


def sphere_complex(n: int, window) -> GradedComplex:
    """Chain complex of generators with grading in the closed window; zero boundary."""
    lo, hi = (_exact(w) for w in window)
    gens = [g for g in grading_table(n, _m_range(n, lo, hi)) if lo <= g.grading <= hi]
    return GradedComplex(tuple(Generator(g.label, g.grading, float(g.action)) for g in gens),
                         [[0] * len(gens) for _ in gens])


def hf_table(n: int, degree_window=(-20, 20), action_window=None) -> HFTable:
    """Ranks of Floer homology in a closed degree window.

    ``action_window`` (half-open ``[lo, hi)``) optionally restricts the
    multiplicities.  Refuses with ``UndeterminedError`` whenever the
    lacunary argument fails, since the chain complex might then carry a
    nonzero differential.
    """
    _check_n(n)
    scan = lacunary_scan(n)
    if scan:
        raise UndeterminedError(
            f"degrees do not rule out a differential for n={n}: {scan}", scan)
    lo, hi = (_exact(w) for w in degree_window)
    if lo > hi:
        raise ValidationError("empty degree window")
    ranks: dict = {}
    for g in grading_table(n, _m_range(n, lo, hi)):
        if not lo <= g.grading <= hi:
            continue
        if action_window is not None and not _exact(action_window[0]) <= g.action < _exact(action_window[1]):
            continue
        ranks[g.grading] = ranks.get(g.grading, 0) + 1
    return HFTable(int(n), (lo, hi), ranks)
