"""The eleven acceptance criteria, one test each.

Every test prints a ``PASS``/``FAIL`` line; the lines are also collected and
repeated in the terminal summary (see ``conftest.py``).  Run this file
directly (``python3 tests/test_acceptance.py``) to get just the lines.
"""
import json
import math
import subprocess
import sys
import time
from fractions import Fraction

import numpy as np
import pytest

from floerkit import cascades, czindex, rabinowitz, specflow, spherehf
from floerkit.cli import main
from floerkit.errors import FloerkitError
from floerkit.generators import random_augmented_path, random_path

SEED = 20240601
RESULTS: dict[int, str] = {}


def record(number, name, ok, detail=""):
    line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {name}" + (f" ({detail})" if detail else "")
    RESULTS[number] = line
    print(line)
    assert ok, line


def expected_degrees(n, lo, hi):
    base = (Fraction(1, 2) - n, Fraction(-1, 2), Fraction(1, 2), n - Fraction(1, 2))
    return {b + j * (2 * n - 2) for b in base for j in range(-40, 41) if lo <= b + j * (2 * n - 2) <= hi}


def test_criterion_1(capsys):
    bad = []
    start = time.perf_counter()
    for n in (4, 5, 6, 8):
        code = main(["sphere-hf", "--n", str(n), "--window", "-20,20", "--format", "json"])
        doc = json.loads(capsys.readouterr().out)
        ranks = {Fraction(r["degree"]): r["rank"] for r in doc["ranks"]}
        table = spherehf.hf_table(n, (-20, 20))
        lattice = [Fraction(k, 2) for k in range(-40, 41)]
        expect = expected_degrees(n, -20, 20)
        if code != 0 or ranks != {d: 1 for d in expect} \
                or any(table.rank(d) != (d in expect) for d in lattice):
            bad.append(n)
    elapsed = time.perf_counter() - start
    with capsys.disabled():
        record(1, "sphere-hf tables for n = 4, 5, 6, 8", not bad and elapsed < 1.0,
               f"{elapsed:.2f} s, mismatches {bad}")


def test_criterion_2():
    empty = all(spherehf.lacunary_scan(n) == [] for n in range(4, 13))
    three = spherehf.lacunary_scan(3)
    record(2, "lacunary scan dichotomy", empty and (3, 0, 1) in three and (5, 2, 1) in three,
           f"n=3 -> {three}")


def test_criterion_3():
    rng = np.random.default_rng(SEED)
    start = time.perf_counter()
    bad = 0
    for _ in range(200):
        path = random_path(rng, int(rng.integers(1, 9)), int(rng.integers(2, 6)))
        crossing = specflow.spectral_flow(path, "crossing_form").flow
        bad += not (crossing == specflow.endpoint_flow(path) == specflow.spectral_flow_oracle(path))
    elapsed = time.perf_counter() - start
    record(3, "spectral flow: crossing form = endpoint formula = oracle on 200 paths",
           bad == 0 and elapsed < 60, f"{bad} mismatches, {elapsed:.1f} s")


def test_criterion_4():
    rng = np.random.default_rng(SEED + 1)
    bad = 0
    for _ in range(100):
        dim_w = int(rng.integers(1, 7))
        dim_v = int(rng.integers(0, min(3, dim_w) + 1))
        r = specflow.lagrange_flow_identity(random_augmented_path(rng, dim_w, dim_v, int(rng.integers(0, 3))))
        # 2 (mu(A_B) - mu(A)) = sigma- - sigma+, checked in integers
        bad += 2 * (r.mu_AB - r.mu_A) != r.sigma_minus - r.sigma_plus
    record(4, "augmented flow identity on 100 regular paths", bad == 0, f"{bad} failures")


def test_criterion_5():
    ok = True
    for a in (2.0, -2.0, 0.5, -0.5):
        r = specflow.varlag_signature(a, 1.0)
        ok &= r.sigma == r.minus_sign_dv and r.eigen_residual <= 1e-12
    record(5, "constraint signature equals -sign(dv/drho)", ok)


def test_criterion_6():
    bad = []
    for a in (0.5, -0.5, 1.0, -1.0, 2.0, -2.0):
        for d in (0.01, -0.01, 0.1, -0.1):
            if abs(d) < abs(a):
                idx = czindex.rs_index(czindex.shear_generator(a), d).index
                if idx != Fraction(int(math.copysign(1, a)) - int(math.copysign(1, d)), 2):
                    bad.append((a, d, str(idx)))
    record(6, "shear indices equal (sign a - sign delta)/2", not bad, f"failures {bad}")


def test_criterion_7():
    bad = []
    for k in range(1, 6):
        rep = czindex.rs_index(czindex.rotation_generator(k))
        # oracle: Psi(t) = exp(2 pi k t J), kernel of id - Psi is everything at t = j/k
        oracle = Fraction(1, 2) * 2 + (k - 1) * 2 + Fraction(1, 2) * 2
        times_ok = np.allclose([c.t for c in rep.crossings], [j / k for j in range(k + 1)], atol=1e-8)
        if rep.index != 2 * k or rep.index != oracle or not times_ok:
            bad.append(k)
    record(7, "rotation loops have index 2k for k = 1..5", not bad, f"failures {bad}")


def test_criterion_8():
    start = time.perf_counter()
    cx = cascades.build_complex(cascades.s2_zsq_model())
    b = cx.boundary.astype(int)
    ranks = cascades.homology(cx)
    elapsed = time.perf_counter() - start
    record(8, "cascade homology of the sphere with f = z^2",
           not ((b @ b) % 2).any() and ranks == {0: 1, 1: 0, 2: 1} and elapsed < 30,
           f"ranks {dict((str(k), v) for k, v in ranks.items())}, {elapsed:.1f} s")


def test_criterion_9():
    model = rabinowitz.CircleModel()
    crit_fail = 0
    for k in (1, 2, -1):
        for s in rabinowitz.critical_starts(k, 20, SEED + 10 + k):
            try:
                c = rabinowitz.find_critical(s, model)
            except FloerkitError:
                crit_fail += 1
                continue
            crit_fail += abs(c.eta - math.pi * k) >= 1e-6 or abs(c.action - c.eta) >= 1e-5
    delta = 0.2
    step1 = sum(not rabinowitz.eta_bound_check(l, model, delta).holds
                for l in rabinowitz.step1_loops(1000, SEED + 20, delta))
    step2 = sum(not rabinowitz.grad_lower_bound(l, model, delta).holds
                for l in rabinowitz.step2_loops(1000, SEED + 21, delta))
    grad = sum(rabinowitz.gradient_fd_check(l, d, model).rel_error > 1e-6
               for l, d in rabinowitz.gradient_cases(100, SEED + 22))
    record(9, "Rabinowitz circle model", crit_fail == step1 == step2 == grad == 0,
           f"failures: critical {crit_fail}, step1 {step1}, step2 {step2}, gradient {grad}")


def test_criterion_10():
    rng = np.random.default_rng(SEED + 30)
    bad = 0
    for _ in range(50):
        c = Fraction(int(rng.integers(1, 1000)), int(rng.integers(1, 100)))
        d = Fraction(int(rng.integers(1, 1000)), int(rng.integers(1, 1000)))
        eps = rabinowitz.nocrit_epsilon(c, d).eps
        bad += not (isinstance(eps, Fraction) and eps < d / (2 * c + d) and -2 * c * eps + d * (1 - eps) > 0)
    record(10, "nocrit epsilon inequalities in exact arithmetic", bad == 0, f"{bad} failures")


def test_criterion_11():
    cmd = [sys.executable, "-m", "floerkit", "selftest", "--seed", str(SEED), "--format", "json"]
    runs = [subprocess.run(cmd, capture_output=True, check=False) for _ in range(2)]
    ok = all(r.returncode == 0 for r in runs) and runs[0].stdout == runs[1].stdout
    record(11, "selftest reports are byte-identical across runs",
           ok and json.loads(runs[0].stdout)["passed"], f"{len(runs[0].stdout)} bytes")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-s", "-p", "no:cacheprovider"]))
