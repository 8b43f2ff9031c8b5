import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from floerkit.core import (RegularPair, SymmetricPath, constant_path, dump_path, inertia,
                           linearized_flow, load_path, sample_path, signature, standard_j,
                           symplectic_defect, validate_symplectic)
from floerkit.errors import DimensionError, IntegrationError, ValidationError
from floerkit.generators import random_symmetric


def test_validate_symplectic_examples():
    assert validate_symplectic(np.eye(2), 1e-12)
    assert validate_symplectic(standard_j(2), 1e-12)
    assert not validate_symplectic(np.diag([2.0, 1.0]), 1e-12)


def test_validate_symplectic_rejects_odd_dimension():
    with pytest.raises(DimensionError):
        validate_symplectic(np.eye(3), 1e-12)


def test_inertia_and_signature():
    m = np.diag([3.0, -1.0, 0.0, 2.0])
    assert inertia(m) == (2, 1, 1)
    assert signature(m) == 1


def test_zero_generator_gives_identity():
    flow = linearized_flow(constant_path(np.zeros((2, 2))), 16)
    assert np.allclose(flow.mats, np.eye(2), atol=0)


def test_rotation_generator_closed_form():
    flow = linearized_flow(constant_path(2 * np.pi * np.eye(2)), 64)
    for t, m in zip(flow.times, flow.mats):
        c, s = np.cos(2 * np.pi * t), np.sin(2 * np.pi * t)
        assert np.allclose(m, [[c, -s], [s, c]], atol=1e-12)


def test_shear_generator_closed_form():
    a = 1.7
    flow = linearized_flow(constant_path(np.diag([a, 0.0])), 10)
    for t, m in zip(flow.times, flow.mats):
        assert np.allclose(m, [[1, 0], [a * t, 1]], atol=1e-13)


def _smooth_generator():
    base = np.array([[2.0, 0.5, 0.0, 0.1], [0.5, 1.0, 0.3, 0.0],
                     [0.0, 0.3, -1.0, 0.2], [0.1, 0.0, 0.2, 0.5]])
    return sample_path(lambda t: base * (1 + np.sin(3 * t)) + np.eye(4) * t ** 2, (0, 1), 257)


def test_flow_is_symplectic_with_positive_determinant():
    flow = linearized_flow(_smooth_generator(), 64)
    for m in flow.mats:
        assert symplectic_defect(m) <= 1e-9 * max(1, np.max(np.abs(m)) ** 2)
        assert np.linalg.det(m) > 0


def test_richardson_fourth_order():
    # piecewise-linear generator with kinks only at the nodes; step grids
    # nest with the nodes so every step sees a polynomial generator
    gen = sample_path(lambda t: np.array([[2 + np.sin(4 * t), 0.3], [0.3, 1 - t]]), (0, 1), 5)
    ref = linearized_flow(gen, 512).final
    errs = [np.max(np.abs(linearized_flow(gen, n).final - ref)) for n in (8, 16, 32)]
    ratios = [errs[i] / errs[i + 1] for i in range(2)]
    assert all(12 < r < 20 for r in ratios), ratios


def test_integration_error_when_tolerance_unreachable():
    with pytest.raises(IntegrationError):
        linearized_flow(constant_path(np.diag([400.0, 400.0])), 1, tol=1e-300)


def test_generator_must_live_on_unit_interval():
    with pytest.raises(ValidationError):
        linearized_flow(constant_path(np.eye(2), (0, 2)), 4)


def test_sample_path_rejects_asymmetric_generator():
    with pytest.raises(ValidationError):
        sample_path(lambda s: np.array([[0.0, 1.0], [0.0, 0.0]]), (0, 1), 3)


def test_sample_path_shapes():
    p = sample_path(lambda s: np.array([[np.arctan(s)]]), (-10, 10), 101)
    assert len(p) == 101 and p.dim == 1
    assert np.all(np.diff(p.mats[:, 0, 0]) > 0)
    rng = np.random.default_rng(5)
    a, b = random_symmetric(rng, 4), random_symmetric(rng, 4)
    q = sample_path(lambda s: a + s * b, (0, 1), 64)
    assert q.mats.shape == (64, 4, 4)


def test_constant_path_is_constant():
    m = np.array([[1.0, 2.0], [2.0, -3.0]])
    p = constant_path(m, (-3, 7))
    assert np.array_equal(p(-100), m) and np.array_equal(p(0.3), m)


def test_resample_at_same_nodes_is_idempotent():
    p = sample_path(lambda s: np.diag([np.tanh(s), 1 + s * s]), (-2, 2), 9)
    q = p.resample(p.params)
    assert np.array_equal(p.mats, q.mats) and np.array_equal(p.params, q.params)


def test_path_validation():
    with pytest.raises(ValidationError):
        SymmetricPath.from_samples([0.0, 0.0], np.zeros((2, 1, 1)))
    with pytest.raises(DimensionError):
        SymmetricPath.from_samples([0.0], np.zeros((1, 2, 3)))


def test_json_roundtrip_bit_exact():
    p = sample_path(lambda s: np.array([[np.arctan(s), 0.1], [0.1, -1.0]]), (-5, 5), 11)
    text = dump_path(p)
    q = load_path(text)
    assert dump_path(q) == text
    assert np.array_equal(p.mats, q.mats)
    doc = json.loads(text)
    assert set(doc) == {"dim", "interval", "samples", "left_asymptote", "right_asymptote"}


def test_load_path_errors():
    with pytest.raises(ValidationError):
        load_path("{not json")
    with pytest.raises(DimensionError):
        load_path(json.dumps({"dim": 2, "samples": [[0.0, [1.0, 0.0, 0.0]]]}))


def test_regular_pair_shapes():
    pair = RegularPair(np.eye(3), np.array([1.0, 0.0, 0.0]))
    assert pair.B.shape == (3, 1)
    with pytest.raises(DimensionError):
        RegularPair(np.eye(2), np.ones((3, 1)))


@given(st.integers(1, 4), st.integers(0, 10_000))
def test_random_constant_generators_stay_symplectic(k, seed):
    rng = np.random.default_rng(seed)
    s = random_symmetric(rng, 2 * k, 3.0)
    flow = linearized_flow(constant_path(s), 32)
    j = standard_j(2 * k)
    for m in flow.mats:
        assert np.max(np.abs(m.T @ j @ m - j)) <= 1e-9 * max(1, np.max(np.abs(m)) ** 2)
