"""Acceptance checks 1-10, each returning a deterministic record.

The records carry counts and failing cases only (no timings), so two runs
with the same seed serialize to identical bytes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import cascades, czindex, rabinowitz, specflow, spherehf
from .errors import FloerkitError
from .generators import random_augmented_path, random_path

DEFAULT_SEED = 20240601


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"number": self.number, "name": self.name, "passed": self.passed,
                "detail": self.detail}

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} criterion {self.number}: {self.name}"


def _expected_degrees(n: int, lo, hi) -> list[Fraction]:
    base = [Fraction(1, 2) - n, Fraction(-1, 2), Fraction(1, 2), n - Fraction(1, 2)]
    period = 2 * n - 2
    out = set()
    for b in base:
        for j in range(-(abs(int(lo)) // period) - 2, abs(int(hi)) // period + 3):
            d = b + j * period
            if lo <= d <= hi:
                out.add(d)
    return sorted(out)


def check_hf_tables(seed: int = DEFAULT_SEED) -> CriterionResult:
    bad = {}
    for n in (4, 5, 6, 8):
        table = spherehf.hf_table(n, (-20, 20))
        expect = _expected_degrees(n, -20, 20)
        if table.degrees != expect or any(table.ranks[d] != 1 for d in expect):
            bad[str(n)] = [str(d) for d in table.degrees]
    return CriterionResult(1, "sphere HF tables n = 4, 5, 6, 8 on [-20, 20]", not bad,
                           {"mismatches": bad})


def check_lacunary(seed: int = DEFAULT_SEED) -> CriterionResult:
    nonempty = {n: spherehf.lacunary_scan(n) for n in range(4, 13) if spherehf.lacunary_scan(n)}
    three = spherehf.lacunary_scan(3)
    ok = not nonempty and (3, 0, 1) in three and (5, 2, 1) in three
    return CriterionResult(2, "lacunary scan empty for n = 4..12, nonempty for n = 3", ok,
                           {"n3": [list(t) for t in three],
                            "unexpected": {str(k): v for k, v in nonempty.items()}})


def check_spectral_flow(seed: int = DEFAULT_SEED, count: int = 200) -> CriterionResult:
    rng = np.random.default_rng(seed)
    bad, hist = [], {}
    for i in range(count):
        dim = int(rng.integers(1, 9))
        path = random_path(rng, dim, int(rng.integers(2, 6)))
        flows = [specflow.spectral_flow(path, m).flow for m in specflow.METHODS]
        if len(set(flows)) != 1:
            bad.append({"case": i, "flows": flows})
        hist[str(flows[0])] = hist.get(str(flows[0]), 0) + 1
    return CriterionResult(3, "three spectral-flow methods agree on random paths", not bad,
                           {"cases": count, "failures": bad,
                            "flow_histogram": dict(sorted(hist.items(), key=lambda kv: int(kv[0])))})


def check_lagrange(seed: int = DEFAULT_SEED, count: int = 100) -> CriterionResult:
    rng = np.random.default_rng(seed + 1)
    bad = []
    for i in range(count):
        dim_w = int(rng.integers(1, 7))
        dim_v = int(rng.integers(0, min(3, dim_w) + 1))
        path = random_augmented_path(rng, dim_w, dim_v, int(rng.integers(0, 3)))
        r = specflow.lagrange_flow_identity(path)
        if not r.identity_holds:
            bad.append({"case": i, "mu_AB": r.mu_AB, "mu_A": r.mu_A,
                        "sigma_minus": r.sigma_minus, "sigma_plus": r.sigma_plus})
    return CriterionResult(4, "augmented spectral flow identity on regular paths", not bad,
                           {"cases": count, "failures": bad})


def check_varlag(seed: int = DEFAULT_SEED) -> CriterionResult:
    rows = []
    for a in (2.0, -2.0, 0.5, -0.5):
        for b in (1.0, -0.75):
            r = specflow.varlag_signature(a, b)
            rows.append({"a": a, "b": b, "sigma": r.sigma, "minus_sign_dv": r.minus_sign_dv,
                         "residual_ok": r.eigen_residual <= 1e-12, "agree": r.agree})
    ok = all(r["agree"] and r["residual_ok"] for r in rows)
    return CriterionResult(5, "constraint signature equals -sign(dv/drho)", ok, {"cases": rows})


def check_shear(seed: int = DEFAULT_SEED) -> CriterionResult:
    rows = []
    for a in (0.5, -0.5, 1.0, -1.0, 2.0, -2.0):
        for d in (0.01, -0.01, 0.1, -0.1):
            if abs(d) >= abs(a):
                continue
            idx = czindex.rs_index(czindex.shear_generator(a), d).index
            rows.append({"a": a, "delta": d, "index": str(idx),
                         "ok": idx == Fraction(int(math.copysign(1, a)) - int(math.copysign(1, d)), 2)})
    return CriterionResult(6, "shear indices equal (sign a - sign delta)/2",
                           all(r["ok"] for r in rows), {"cases": rows})


def check_rotation(seed: int = DEFAULT_SEED) -> CriterionResult:
    rows = []
    for k in range(1, 6):
        rep = czindex.rs_index(czindex.rotation_generator(k))
        times = [c.t for c in rep.crossings]
        oracle_times = [j / k for j in range(k + 1)]
        crossings_ok = (len(times) == k + 1
                        and max(abs(t - o) for t, o in zip(times, oracle_times)) < 1e-8
                        and all(c.kernel_dim == 2 and c.signature == 2 for c in rep.crossings))
        rows.append({"k": k, "index": str(rep.index), "crossings_ok": crossings_ok,
                     "ok": rep.index == 2 * k and crossings_ok})
    return CriterionResult(7, "rotation loops have index 2k", all(r["ok"] for r in rows),
                           {"cases": rows})


def check_cascades(seed: int = DEFAULT_SEED) -> CriterionResult:
    model = cascades.s2_zsq_model()
    model.validate(seed=seed)
    cx = cascades.build_complex(model)
    ranks = cascades.homology(cx)
    sq = int(np.count_nonzero((cx.boundary.astype(int) @ cx.boundary.astype(int)) % 2))
    ok = sq == 0 and ranks == {0: 1, 1: 0, 2: 1}
    return CriterionResult(8, "cascade homology of the sphere with f = z^2", ok,
                           {"boundary": cx.to_dict()["boundary"],
                            "ranks": {str(k): v for k, v in ranks.items()}})


def check_rabinowitz(seed: int = DEFAULT_SEED) -> CriterionResult:
    model = rabinowitz.CircleModel()
    crit = {}
    for k in (1, 2, -1):
        failures = 0
        for start in rabinowitz.critical_starts(k, 20, seed + 10 + k):
            try:
                c = rabinowitz.find_critical(start, model)
            except FloerkitError:
                failures += 1
                continue
            if abs(c.eta - math.pi * k) >= 1e-6 or abs(c.action - c.eta) >= 1e-5:
                failures += 1
        crit[str(k)] = failures
    delta = 0.2
    step1 = sum(not rabinowitz.eta_bound_check(l, model, delta).holds
                for l in rabinowitz.step1_loops(1000, seed + 20, delta))
    step2 = sum(not rabinowitz.grad_lower_bound(l, model, delta).holds
                for l in rabinowitz.step2_loops(1000, seed + 21, delta))
    grad = sum(rabinowitz.gradient_fd_check(l, d, model).rel_error > 1e-6
               for l, d in rabinowitz.gradient_cases(100, seed + 22))
    ok = not any(crit.values()) and step1 == 0 and step2 == 0 and grad == 0
    return CriterionResult(9, "Rabinowitz circle model: critical points, bounds, gradient", ok,
                           {"critical_failures": crit, "step1_failures": step1,
                            "step2_failures": step2, "gradient_failures": grad})


def check_nocrit(seed: int = DEFAULT_SEED, count: int = 50) -> CriterionResult:
    rng = np.random.default_rng(seed + 30)
    bad = []
    for _ in range(count):
        c = Fraction(int(rng.integers(1, 1000)), int(rng.integers(1, 100)))
        d = Fraction(int(rng.integers(1, 1000)), int(rng.integers(1, 1000)))
        r = rabinowitz.nocrit_epsilon(c, d)
        if not (isinstance(r.eps, Fraction) and r.eps < d / (2 * c + d)
                and -2 * c * r.eps + d * (1 - r.eps) > 0):
            bad.append([str(c), str(d)])
    return CriterionResult(10, "nocrit epsilon inequalities in exact arithmetic", not bad,
                           {"cases": count, "failures": bad})


CHECKS = (check_hf_tables, check_lacunary, check_spectral_flow, check_lagrange, check_varlag,
          check_shear, check_rotation, check_cascades, check_rabinowitz, check_nocrit)


def run_selftest(seed: int = DEFAULT_SEED) -> list[CriterionResult]:
    return [check(seed) for check in CHECKS]
