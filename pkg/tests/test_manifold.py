import math

import numpy as np
import pytest

from conftest import random_points
from vort import expr as ex
from vort.errors import DegenerateMetricError, VortError
from vort.manifold import (Chart, MetricField, inner, metric_data,
                           permutation_sign, sym_det, sym_inverse)


def test_chart_validation():
    with pytest.raises(VortError):
        Chart("bad", ("x", "x"), ((0, 1), (0, 1)), ("fixed", "fixed"))
    with pytest.raises(VortError):
        Chart("bad", ("x", "y"), ((1, 0), (0, 1)), ("fixed", "fixed"))
    with pytest.raises(VortError):
        Chart("bad", ("x", "y"), ((0, 1), (0, 1)), ("fixed", "weird"))
    with pytest.raises(VortError):
        Chart("bad", ("x", "y"), ((0, 1),), ("fixed", "fixed"))


def test_chart_wrap_and_contains(torus_chart, plane_chart):
    wrapped = torus_chart.wrap({"x1": 7.0, "x2": -1.0})
    assert 0.0 <= wrapped["x1"] < 2 * math.pi
    assert 0.0 <= wrapped["x2"] < 2 * math.pi
    assert plane_chart.contains({"x1": 0.5, "x2": -1.9})
    assert not plane_chart.contains({"x1": 2.5, "x2": 0.0})


def test_validation_lattice_avoids_boundary(s2_chart):
    points = s2_chart.lattice_points()
    assert len(points) == 121
    thetas = sorted({p["theta"] for p in points})
    assert thetas[0] > -1.2 and thetas[-1] < 1.2


def test_euclidean_metric_data(plane_metric):
    data = metric_data(plane_metric, {"x1": 0.7, "x2": -0.3})
    assert np.allclose(data.g, np.eye(2))
    assert np.allclose(data.g_inv, np.eye(2))
    assert data.det == pytest.approx(1.0)
    assert data.sqrt_det == pytest.approx(1.0)


def test_sphere_metric_values(s2_metric):
    data = metric_data(s2_metric, {"theta": math.pi / 4, "phi": 1.0})
    assert data.det == pytest.approx(0.5, rel=1e-12)
    assert data.sqrt_det == pytest.approx(math.sqrt(2) / 2, rel=1e-12)
    assert np.max(np.abs(data.g @ data.g_inv - np.eye(2))) < 1e-10


def test_sphere_metric_degenerate_at_pole(s2_metric):
    with pytest.raises(DegenerateMetricError) as info:
        metric_data(s2_metric, {"theta": math.pi / 2, "phi": 0.0})
    assert "theta" in str(info.value)


def test_inner_examples(plane_metric, s2_metric):
    assert inner(plane_metric, {"x1": 0.0, "x2": 0.0}, (1, 0), (0, 1)) == 0.0
    assert inner(s2_metric, {"theta": 0.0, "phi": 0.2}, (0, 1), (0, 1)) == pytest.approx(1.0)
    assert inner(s2_metric, {"theta": math.pi / 3, "phi": 0.2}, (0, 1), (0, 1)) == \
        pytest.approx(0.25, rel=1e-12)


def test_inner_symmetry_and_positivity(bumpy_metric):
    rng = np.random.RandomState(11)
    for point in random_points(rng, bumpy_metric.chart, 20):
        u = rng.uniform(-1, 1, size=2)
        v = rng.uniform(-1, 1, size=2)
        assert inner(bumpy_metric, point, u, v) == inner(bumpy_metric, point, v, u)
        assert inner(bumpy_metric, point, u, u) > 0.0
        assert abs(inner(bumpy_metric, point, np.zeros(2), np.zeros(2))) < 1e-12


def test_sqrt_det_squares_to_det(bumpy_metric, s2_metric):
    for m in (bumpy_metric, s2_metric):
        rng = np.random.RandomState(3)
        for point in random_points(rng, m.chart, 30):
            data = metric_data(m, point)
            assert data.sqrt_det ** 2 == pytest.approx(data.det, rel=1e-12)
            sym = ex.evaluate(m.sqrt_det_expr(), point)
            assert sym == pytest.approx(data.sqrt_det, rel=1e-12)


def test_validate_rejects_asymmetric(plane_chart):
    m = MetricField(plane_chart, [["1", "x1"], ["0", "1"]])
    with pytest.raises(VortError):
        m.validate()


def test_validate_rejects_indefinite(plane_chart):
    m = MetricField.diagonal(plane_chart, ["1", "x1"])  # x1 crosses zero
    with pytest.raises(VortError):
        m.validate()


def test_validate_accepts_sphere_band(s2_metric):
    assert s2_metric.validate() is s2_metric


def test_metric_must_be_square(plane_chart):
    with pytest.raises(VortError):
        MetricField(plane_chart, [["1", "0"]])


def test_inverse_exprs_match_numeric(bumpy_metric):
    rng = np.random.RandomState(8)
    inv = bumpy_metric.inverse_exprs()
    for point in random_points(rng, bumpy_metric.chart, 10):
        data = metric_data(bumpy_metric, point)
        sym = np.array([[ex.evaluate(inv[i][j], point) for j in range(2)] for i in range(2)])
        assert np.max(np.abs(sym - data.g_inv)) < 1e-12


def test_sym_det_and_inverse_3x3():
    entries = [[ex.const(v) for v in row]
               for row in ((2.0, 0.3, 0.0), (0.3, 1.5, 0.1), (0.0, 0.1, 1.0))]
    numeric = np.array([[2.0, 0.3, 0.0], [0.3, 1.5, 0.1], [0.0, 0.1, 1.0]])
    assert ex.evaluate(sym_det(entries), {}) == pytest.approx(np.linalg.det(numeric), rel=1e-12)
    inv = sym_inverse(entries)
    sym = np.array([[ex.evaluate(inv[i][j], {}) for j in range(3)] for i in range(3)])
    assert np.max(np.abs(sym - np.linalg.inv(numeric))) < 1e-12


def test_permutation_sign():
    assert permutation_sign((0, 1, 2)) == 1
    assert permutation_sign((1, 0, 2)) == -1
    assert permutation_sign((2, 0, 1)) == 1
