import json

import numpy as np
import pytest

from lskr.errors import InvalidInputError, UnsupportedError
from lskr.geometry import PointCloud
from lskr.metrics import EvalReport, curve_distance, relative_error, rmse
from lskr.synthdata import add_noise, cos_curve, sample_surface, two_circle_union


def test_relative_error_basics():
    a = np.array([[1.0, 0.0], [0.0, 1.0]])
    assert relative_error(a, a) == 0.0
    assert relative_error(2 * a, a) == pytest.approx(1.0)
    assert relative_error(np.zeros_like(a), a) == pytest.approx(1.0)


def test_relative_error_shape_and_zero_reference():
    with pytest.raises(InvalidInputError):
        relative_error(np.zeros((2, 3)), np.zeros((3, 2)))
    with pytest.raises(InvalidInputError):
        relative_error(np.ones((2, 2)), np.zeros((2, 2)))


def test_relative_error_complex():
    rng = np.random.default_rng(0)
    a = rng.standard_normal((3, 4)) + 1j * rng.standard_normal((3, 4))
    assert relative_error(a, a) == 0.0
    assert relative_error(a + 0.1, a) > 0.0


def test_rmse_explicit():
    a = np.array([[0.0, 3.0]])
    b = np.array([[4.0, 3.0]])
    assert rmse(a, b) == pytest.approx(4.0 / np.sqrt(2))


def test_curve_distance_zero_on_surface():
    shape = cos_curve(1.0)
    X = sample_surface(shape, 60, seed=0)
    d = curve_distance(X, shape.coeffs, grid_res=1024)
    assert np.mean(d) < 2e-3  # polyline discretization floor
    assert d.shape == (60,)


def test_curve_distance_detects_noise():
    shape = cos_curve(1.0)
    clean = sample_surface(shape, 80, seed=1)
    noisy = add_noise(clean, 0.02, seed=2)
    d_clean = np.mean(curve_distance(clean, shape.coeffs))
    d_noisy = np.mean(curve_distance(noisy, shape.coeffs))
    assert d_noisy > 3 * d_clean
    # gaussian displacement in 2-D: mean distance to the curve ~ std
    assert 0.005 < d_noisy < 0.05


def test_curve_distance_wraps_across_cell_boundary():
    # the two-circle potential has mass near the cell edge; points just
    # inside the opposite edge must be measured through the wrap
    shape = two_circle_union()
    X = sample_surface(shape, 50, seed=3)
    shifted = PointCloud.wrapped(X.data + 1.0)  # identical torus points
    np.testing.assert_allclose(
        curve_distance(shifted, shape.coeffs),
        curve_distance(X, shape.coeffs),
        atol=1e-12,
    )


def test_curve_distance_needs_2d():
    X = PointCloud(np.zeros((3, 4)))
    with pytest.raises(UnsupportedError):
        curve_distance(X, cos_curve(1.0).coeffs)


def test_report_json_roundtrip(tmp_path):
    rep = EvalReport(
        rmse=0.1,
        rel_error=0.2,
        mean_curve_dist=0.05,
        eig_profile=[1.0, 0.5],
        runtime_ms=12,
        warnings=["cg stalled"],
    )
    path = tmp_path / "report.json"
    rep.save(path)
    payload = json.loads(path.read_text())
    assert payload["rmse"] == 0.1
    assert payload["rel_error"] == 0.2
    assert payload["mean_curve_dist"] == 0.05
    assert payload["warnings"] == ["cg stalled"]
    # deterministic serialization: keys sorted
    assert list(payload) == sorted(payload)


def test_report_optional_fields_omitted_or_null():
    d = EvalReport(rmse=1.0, rel_error=2.0).to_json_dict()
    assert d["rmse"] == 1.0
    assert d.get("mean_curve_dist") is None
