import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lskr.errors import CapacityExceededError, InvalidInputError
from lskr.features import (
    annihilation_residual,
    evaluate_potential,
    feature_map,
    feature_matrix,
    weight_vector,
)
from lskr.geometry import FourierCoeffs, PointCloud, cube_support


def test_feature_map_at_origin_is_all_ones():
    s = cube_support(2, 2)
    np.testing.assert_array_equal(feature_map([0.0, 0.0], s), np.ones(25))


def test_feature_map_explicit_value():
    # single frequency k=(1,0) at x=(1/4, 0): e^{j 2 pi / 4} = j
    s = cube_support(2, 1)
    phi = feature_map([0.25, 0.0], s)
    k_idx = s.index_map()[(1, 0)]
    np.testing.assert_allclose(phi[k_idx], 1j, atol=1e-15)


@given(
    st.lists(st.floats(-0.5, 0.499), min_size=2, max_size=2),
    st.integers(1, 3),
)
@settings(max_examples=100, deadline=None)
def test_unit_modulus(coords, K):
    phi = feature_map(coords, cube_support(2, K))
    np.testing.assert_allclose(np.abs(phi), 1.0, atol=1e-12)


@given(
    st.lists(st.floats(-0.5, 0.499), min_size=2, max_size=2),
    st.lists(st.integers(-3, 3), min_size=2, max_size=2),
)
@settings(max_examples=100, deadline=None)
def test_integer_shift_invariance(coords, shift):
    s = cube_support(2, 2)
    a = feature_map(coords, s)
    b = feature_map(np.asarray(coords) + np.asarray(shift, dtype=float), s)
    np.testing.assert_allclose(a, b, atol=1e-9)


def test_feature_matrix_columns_match_map():
    rng = np.random.default_rng(3)
    X = PointCloud(rng.uniform(-0.5, 0.5, (2, 7)))
    s = cube_support(2, 2)
    F = feature_matrix(X, s)
    assert F.values.shape == (25, 7)
    for i in range(7):
        np.testing.assert_allclose(F.values[:, i], feature_map(X.point(i), s))


def test_weight_vector_values():
    s = cube_support(1, 1)
    w = weight_vector(s, sigma=0.2)
    expected = np.exp(-(np.pi**2) * 0.04 * np.array([1.0, 0.0, 1.0]))
    np.testing.assert_allclose(w, expected)
    assert w[s.index_map()[(0,)]] == 1.0


def test_weighted_matrix_scales_rows():
    rng = np.random.default_rng(4)
    X = PointCloud(rng.uniform(-0.5, 0.5, (2, 5)))
    s = cube_support(2, 1)
    plain = feature_matrix(X, s)
    weighted = feature_matrix(X, s, sigma=0.15)
    assert weighted.weighted and weighted.sigma == 0.15
    w = weight_vector(s, 0.15)
    np.testing.assert_allclose(weighted.values, w[:, None] * plain.values)


def test_weight_requires_valid_sigma():
    with pytest.raises(InvalidInputError):
        weight_vector(cube_support(1, 1), sigma=0.0)


def test_capacity_cap():
    X = PointCloud(np.zeros((2, 200)))
    with pytest.raises(CapacityExceededError):
        feature_matrix(X, cube_support(2, 120))


def test_annihilation_residual_zero_for_true_coeffs():
    # psi(x, y) = cos(2 pi x) - 1 vanishes on the line x = 0
    s = cube_support(2, 1)
    c = FourierCoeffs.from_dict(s, {(0, 0): -1.0, (1, 0): 0.5, (-1, 0): 0.5})
    ys = np.linspace(-0.5, 0.49, 11)
    X = PointCloud(np.vstack([np.zeros_like(ys), ys]))
    assert annihilation_residual(X, c) < 1e-12


def test_evaluate_potential_matches_closed_form():
    s = cube_support(2, 1)
    c = FourierCoeffs.from_dict(s, {(0, 0): -0.25, (0, 1): 0.5, (0, -1): 0.5})
    rng = np.random.default_rng(5)
    X = PointCloud(rng.uniform(-0.5, 0.5, (2, 9)))
    vals = evaluate_potential(X, c)
    expected = np.cos(2 * np.pi * X.data[1]) - 0.25
    np.testing.assert_allclose(vals.real, expected, atol=1e-12)
    np.testing.assert_allclose(vals.imag, 0.0, atol=1e-12)
