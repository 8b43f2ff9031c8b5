import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st

from floerkit.core import RegularPair, SymmetricPath, constant_path, sample_path
from floerkit.errors import DegenerateEndpointError, RegularityError, SweepError, ValidationError
from floerkit.generators import random_augmented_path, random_path
from floerkit.specflow import (METHODS, AugmentedPath, RegularizationWarning, cutoff,
                               delta_regularize, endpoint_flow, lagrange_flow_identity,
                               pair_form, regular_pair_signature, regularized_flow,
                               spectral_flow, spectral_flow_oracle, varlag_signature)


def arctan_path(sign=1.0, n=41):
    return sample_path(lambda s: np.array([[sign * np.arctan(s)]]), (-5, 5), n)


def all_methods(path):
    return [spectral_flow(path, m).flow for m in METHODS]


# frozen oracle values
def test_arctan_normalization():
    assert all_methods(arctan_path()) == [1, 1, 1]
    assert spectral_flow_oracle(arctan_path()) == 1


def test_constant_invertible_path():
    p = constant_path(np.diag([2.0, -1.0, 0.5]), (-1, 1))
    assert all_methods(p) == [0, 0, 0]


def test_tanh_diagonal():
    p = sample_path(lambda s: np.diag([np.tanh(s), 1.0]), (-4, 4), 33)
    assert all_methods(p) == [1, 1, 1]


def test_direct_sum_of_opposite_arctans():
    p = sample_path(lambda s: np.diag([np.arctan(s), -np.arctan(s)]), (-5, 5), 41)
    assert spectral_flow_oracle(p) == 0
    rep = spectral_flow(p)
    assert rep.flow == 0
    assert [(c.kernel_dim, c.signature) for c in rep.crossings] == [(2, 0)]
    shifted = sample_path(lambda s: np.diag([np.arctan(s), -np.arctan(s - 0.3)]), (-5, 5), 41)
    assert sorted(c.signature for c in spectral_flow(shifted).crossings) == [-1, 1]


def test_crossing_report_locates_zero():
    rep = spectral_flow(arctan_path())
    assert len(rep.crossings) == 1
    c = rep.crossings[0]
    assert abs(c.s) < 1e-9 and c.kernel_dim == 1 and c.signature == 1


def test_delta_regularize_zero_path():
    p = constant_path(np.zeros((1, 1)), (-2, 2))
    with pytest.raises(DegenerateEndpointError):
        spectral_flow(p)
    reg = delta_regularize(p, 0.1)
    assert all_methods(reg) == [-1, -1, -1]
    assert regularized_flow(p).flow == -1


def test_delta_regularize_invertible_paths():
    assert spectral_flow(delta_regularize(arctan_path(), 1e-3)).flow == 1
    one = constant_path(np.ones((1, 1)), (-1, 1))
    assert spectral_flow(delta_regularize(one, 0.5)).flow == 0


def test_large_delta_warns():
    with pytest.warns(RegularizationWarning):
        delta_regularize(constant_path(np.diag([0.05, 1.0]), (-1, 1)), 0.1)


def test_delta_must_be_positive():
    with pytest.raises(ValidationError):
        delta_regularize(arctan_path(), 0.0)


def test_sweep_needs_three_decreasing_values():
    with pytest.raises(ValidationError):
        regularized_flow(arctan_path(), deltas=(0.1, 0.2, 0.01))


def test_sweep_failure_reported():
    # flow of A - delta*beta jumps when delta crosses the eigenvalue 0.05
    p = constant_path(np.diag([0.05, 0.0]), (-1, 1))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RegularizationWarning)
        assert regularized_flow(p, (0.2, 0.1, 0.01, 0.005, 0.001)).flow == -1
        with pytest.raises(SweepError):
            regularized_flow(p, (0.3, 0.2, 0.01))


def test_cutoff_profile():
    assert cutoff(-3) == -1 and cutoff(2) == 1 and cutoff(0) == 0
    s = np.linspace(-1, 1, 101)
    assert np.all(np.diff(cutoff(s)) >= 0)


def test_regular_pair_examples():
    e1 = np.array([[1.0], [0.0]])
    assert np.allclose(pair_form(RegularPair(np.diag([2.0, -1.0]), e1)), [[0.5]])
    assert regular_pair_signature(RegularPair(np.diag([2.0, -1.0]), e1)) == 1
    assert regular_pair_signature(RegularPair(np.diag([-2.0, -1.0]), e1)) == -1
    b = np.eye(3)[:, :2]
    pair = RegularPair(np.diag([1.0, -1.0, 5.0]), b)
    assert np.allclose(pair_form(pair), np.diag([1.0, -1.0]))
    assert regular_pair_signature(pair) == 0


@pytest.mark.parametrize("a, b, clause", [
    (np.eye(2), np.array([[1.0, 2.0], [2.0, 4.0]]), "injective"),
    (np.array([[1.0, 1.0], [1.0, 2.0]]), np.array([[1.0], [0.0]]), "invariant"),
    (np.diag([0.0, 1.0]), np.array([[1.0], [0.0]]), "invertible"),
])
def test_regularity_clauses(a, b, clause):
    with pytest.raises(RegularityError) as info:
        regular_pair_signature(RegularPair(a, b))
    assert info.value.clause == clause


def test_lagrange_identity_positive_arctan():
    a = sample_path(lambda s: np.array([[np.arctan(s) + 2]]), (-5, 5), 21)
    path = AugmentedPath.from_samples(a, np.ones((21, 1, 1)))
    r = lagrange_flow_identity(path)
    assert (r.mu_A, r.sigma_minus, r.sigma_plus, r.mu_AB) == (0, 1, 1, 0)
    assert r.identity_holds
    assert spectral_flow(path.augmented(), "oracle").flow == 0


def test_lagrange_identity_empty_v():
    a = arctan_path()
    path = AugmentedPath.from_samples(a, np.zeros((len(a), 1, 0)))
    r = lagrange_flow_identity(path)
    assert r.mu_AB == r.mu_A == 1 and r.identity_holds


def test_lagrange_identity_regularity_failure():
    a = constant_path(np.diag([1.0, 2.0]), (-1, 1))
    b = np.array([[[1.0], [1.0]]] * 2)
    with pytest.raises(RegularityError):
        lagrange_flow_identity(AugmentedPath.from_samples(a, b))


@pytest.mark.parametrize("a, b, sigma", [(2, 1, 1), (-0.5, 3, -1), (0.5, 0, 1), (-2, -1, -1)])
def test_varlag(a, b, sigma):
    r = varlag_signature(a, b)
    assert r.sigma == sigma and r.minus_sign_dv == sigma and r.agree
    assert r.eigen_residual <= 1e-12


def test_varlag_degenerate():
    with pytest.raises(RegularityError):
        varlag_signature(0, 1)


# axiom suite against the oracle
@given(st.integers(1, 5), st.integers(0, 10**6))
def test_endpoint_formula_matches_oracle(dim, seed):
    p = random_path(np.random.default_rng(seed), dim, 4)
    assert spectral_flow(p).flow == spectral_flow_oracle(p) == endpoint_flow(p)


@given(st.integers(1, 4), st.integers(0, 10**6), st.floats(0.1, 0.9))
def test_homotopy_invariance(dim, seed, lam):
    rng = np.random.default_rng(seed)
    p = random_path(rng, dim, 3)
    q = random_path(rng, dim, 3)
    q = SymmetricPath.from_samples(q.params, np.concatenate([p.mats[:1], q.mats[1:-1], p.mats[-1:]]))
    h = SymmetricPath.from_samples(p.params, (1 - lam) * p.mats + lam * q.mats)
    assert spectral_flow_oracle(h) == spectral_flow_oracle(p) == spectral_flow(h).flow


@given(st.integers(1, 3), st.integers(1, 3), st.integers(0, 10**6))
def test_direct_sum_additivity(d1, d2, seed):
    rng = np.random.default_rng(seed)
    p, q = random_path(rng, d1, 3), random_path(rng, d2, 3)
    mats = np.zeros((3, d1 + d2, d1 + d2))
    mats[:, :d1, :d1] = p.mats
    mats[:, d1:, d1:] = q.mats
    s = SymmetricPath.from_samples(p.params, mats)
    assert spectral_flow(s).flow == spectral_flow(p).flow + spectral_flow(q).flow
    assert spectral_flow_oracle(s) == spectral_flow_oracle(p) + spectral_flow_oracle(q)


@given(st.integers(1, 4), st.integers(0, 10**6))
def test_reparametrization_invariance(dim, seed):
    p = random_path(np.random.default_rng(seed), dim, 4)
    q = p.resample(np.linspace(-1, 1, 29))
    assert spectral_flow(q).flow == spectral_flow(p).flow


@given(st.integers(1, 5), st.integers(0, 3), st.integers(0, 10**6))
def test_lagrange_identity_random(dim_w, dim_v, seed):
    dim_v = min(dim_v, dim_w)
    path = random_augmented_path(np.random.default_rng(seed), dim_w, dim_v)
    assert lagrange_flow_identity(path).identity_holds
