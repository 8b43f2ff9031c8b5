import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from floerkit.errors import HypothesisError, PreconditionError, SearchError, ValidationError
from floerkit.rabinowitz import (CircleModel, DiscreteLoop, action, c_M, critical_starts,
                                 derivative_matrix, eta_bound_check, find_critical,
                                 flowline_eta_bound, gradient, gradient_cases, gradient_fd_check,
                                 grad_lower_bound, grad_norm, homotopy_eta_bound, nocrit_epsilon,
                                 step1_loops, step2_loops)

MODEL = CircleModel()


def test_action_examples():
    const = DiscreteLoop(np.tile([1.0, 0.0], (64, 1)), 0.0)
    assert action(const, MODEL) == 0.0
    assert abs(action(DiscreteLoop.circle(256, eta=np.pi), MODEL) - np.pi) < 1e-12
    assert abs(action(DiscreteLoop.circle(256, radius=2.0), MODEL) - 4 * np.pi) < 1e-9


def test_model_constants():
    assert MODEL.c_H == pytest.approx(2.125, abs=1e-15)
    assert MODEL.c_delta(0.25) == pytest.approx(math.sqrt(1.25))
    ring = np.array([[1.0, 0.0], [0.0, 1.0]])
    # X_H is the Reeb field 2 d/dtheta on the unit circle
    assert np.allclose(MODEL.X_H(ring), [[0.0, 2.0], [-2.0, 0.0]])
    assert np.allclose(MODEL.grad_H([[3.0, 0.0]]), 0.0)
    with pytest.raises(ValidationError):
        CircleModel("upwind")


def test_derivative_matrices_are_antisymmetric():
    for kind in ("spectral", "central"):
        d = derivative_matrix(32, kind)
        assert np.allclose(d, -d.T)
    t = np.arange(32) / 32
    d = derivative_matrix(32)
    assert np.allclose(d @ np.sin(2 * np.pi * 3 * t), 6 * np.pi * np.cos(2 * np.pi * 3 * t))


def test_central_difference_converges_at_second_order():
    model = CircleModel("central")
    loop = lambda n: DiscreteLoop(np.stack([np.cos(2 * np.pi * np.arange(n) / n) * 1.2,
                                            np.sin(2 * np.pi * np.arange(n) / n) * 0.8], -1), 0.0)
    exact = 0.5 * 1.2 * 0.8 * 2 * np.pi
    errs = [abs(action(loop(n), model) - exact) for n in (16, 32, 64)]
    assert all(errs[i] / errs[i + 1] > 3.5 for i in range(2))


def test_loop_validation():
    with pytest.raises(ValidationError):
        DiscreteLoop(np.zeros((4, 2)), 0.0)
    with pytest.raises(ValidationError):
        DiscreteLoop(np.zeros((16, 3)), 0.0)
    with pytest.raises(ValidationError):
        DiscreteLoop(np.full((16, 2), np.nan), 0.0)
    u = DiscreteLoop.circle(16, 2, eta=1.5).as_vector()
    assert np.array_equal(DiscreteLoop.from_vector(u).as_vector(), u)


def test_gradient_examples():
    const = DiscreteLoop(np.tile([math.sqrt(2.0), 0.0], (32, 1)), 7.0)
    _, ge = gradient(const, MODEL)
    assert ge == pytest.approx(-1.0, abs=1e-12)
    gv, ge = gradient(DiscreteLoop.circle(64, eta=1.0), MODEL)
    assert abs(ge) < 1e-12 and np.max(np.abs(gv)) > 0.1
    assert grad_norm(DiscreteLoop.circle(64, 1, eta=np.pi), MODEL) < 1e-12


@pytest.mark.parametrize("k", [1, 2, -1, 0])
def test_find_critical(k):
    start = next(critical_starts(k, 1, seed=3, n=64))
    crit = find_critical(start, MODEL)
    assert abs(crit.eta - np.pi * k) < 1e-9
    assert abs(crit.action - crit.eta) < 1e-9
    assert crit.residual < 1e-10


def test_find_critical_far_start_fails():
    far = DiscreteLoop.circle(64, 1, radius=3.0, eta=5.0)
    with pytest.raises(SearchError) as info:
        find_critical(far, MODEL)
    assert info.value.args
    with pytest.raises(ValidationError):
        find_critical(far, MODEL, tol=0)


def test_eta_bound_examples():
    r = eta_bound_check(DiscreteLoop.circle(128, 1, eta=np.pi), MODEL, 0.1)
    assert r.holds and r.rhs == pytest.approx(2 * np.pi, rel=1e-10)
    with pytest.raises(PreconditionError):
        eta_bound_check(DiscreteLoop.circle(128, radius=math.sqrt(1.2)), MODEL, 0.1)
    with pytest.raises(PreconditionError):
        eta_bound_check(DiscreteLoop.circle(128, eta=np.pi), MODEL, 0.3)


def test_grad_lower_bound_examples():
    delta = 0.1
    r = grad_lower_bound(DiscreteLoop(np.tile([math.sqrt(1 + delta), 0.0], (32, 1)), 2.0),
                         MODEL, delta)
    assert r.holds and r.regime == "outside"
    assert grad_lower_bound(DiscreteLoop.circle(64, radius=math.sqrt(1 - delta)), MODEL, delta).holds
    pts = DiscreteLoop.circle(64).points * np.linspace(0.9, 1.1, 64)[:, None]
    r = grad_lower_bound(DiscreteLoop(pts, 0.0), MODEL, delta)
    assert r.regime == "crossing" and r.holds is None and r.transverse_length > 0


def test_randomized_bound_suites():
    assert all(eta_bound_check(l, MODEL, 0.1).holds for l in step1_loops(100, 1, 0.1, n=64))
    assert all(grad_lower_bound(l, MODEL, 0.1).holds for l in step2_loops(100, 1, 0.1, n=64))


def test_gradient_matches_finite_differences():
    for loop, direction in gradient_cases(20, seed=2, n=64):
        assert gradient_fd_check(loop, direction, MODEL).rel_error < 1e-6


def test_eta_bounds():
    assert flowline_eta_bound(0, 3.0, 0.5, 2.0) == 3.0
    assert flowline_eta_bound(4, 10, 2, 1) == 11
    assert homotopy_eta_bound(0, 10, 2, 1, 0) == 10
    with pytest.raises(HypothesisError):
        homotopy_eta_bound(1, 10, 2, 1, 4)
    with pytest.raises(ValidationError):
        flowline_eta_bound(1, 1, 0, 1)
    assert c_M(1.0, 0.5, 2.0) == 3.0


def test_nocrit_examples():
    r = nocrit_epsilon(1, 1)
    assert r.eps == Fraction(1, 6) and r.margin == Fraction(1, 2) and r.strict
    r = nocrit_epsilon(10, 0.1)
    assert r.eps == pytest.approx(0.1 / 40.2) and r.margin > 0
    assert nocrit_epsilon(1, Fraction(1, 10**9)).margin < Fraction(1, 10**8)
    with pytest.raises(ValidationError):
        nocrit_epsilon(0, 1)


@given(st.fractions(min_value=Fraction(1, 1000), max_value=1000),
       st.fractions(min_value=Fraction(1, 1000), max_value=1000))
def test_nocrit_exact(c, delta):
    r = nocrit_epsilon(c, delta)
    assert isinstance(r.eps, Fraction)
    assert r.eps < delta / (2 * c + delta)
    assert -2 * c * r.eps + delta * (1 - r.eps) > 0


@given(st.integers(8, 40), st.integers(-3, 3), st.floats(0.2, 1.9))
def test_circle_action_closed_form(n, k, radius):
    loop = DiscreteLoop.circle(n, k, radius)
    if 2 * abs(k) < n // 2:
        assert action(loop, MODEL) == pytest.approx(np.pi * k * radius ** 2, abs=1e-9)
