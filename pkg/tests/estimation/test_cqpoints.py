import math

import numpy as np
import pytest

from app.core.errors import DomainError
from app.core.estimation import cqpoints


def test_one_dimensional_first_order():
    pts = cqpoints.generate(1, 1)
    np.testing.assert_allclose(pts.points, [[1.0], [-1.0]], atol=1e-12)
    np.testing.assert_allclose(pts.weights, [0.5, 0.5], atol=1e-12)


def test_two_dimensional_first_order():
    pts = cqpoints.generate(2, 1)
    r = math.sqrt(2.0)
    np.testing.assert_allclose(pts.points, [[r, 0.0], [0.0, r], [-r, 0.0], [0.0, -r]], atol=1e-12)
    np.testing.assert_allclose(pts.weights, [0.25] * 4, atol=1e-12)


@pytest.mark.parametrize("dim, nprime", [(20, 2), (3, 3), (5, 2), (1, 4)])
def test_moments_match_standard_normal(dim, nprime):
    pts = cqpoints.generate(dim, nprime)
    assert pts.size == 2 * dim * nprime
    assert pts.weights.sum() == pytest.approx(1.0, abs=1e-10)
    np.testing.assert_allclose(pts.weights @ pts.points, np.zeros(dim), atol=1e-10)
    second = (pts.points.T * pts.weights) @ pts.points
    np.testing.assert_allclose(second, np.eye(dim), atol=1e-8)


def test_point_ordering_pairs_direction_with_root():
    pts = cqpoints.generate(2, 2)
    # rows 0..1 lie on +e_1, rows 2..3 on +e_2, rows 4..5 on -e_1
    assert np.all(pts.points[0:2, 0] > 0) and np.all(pts.points[0:2, 1] == 0)
    assert np.all(pts.points[2:4, 1] > 0) and np.all(pts.points[2:4, 0] == 0)
    assert np.all(pts.points[4:6, 0] < 0)
    assert pts.points[0, 0] < pts.points[1, 0]


def test_root_methods_give_the_same_points():
    a = cqpoints.generate(4, 3, "bisection")
    b = cqpoints.generate(4, 3, "companion")
    np.testing.assert_allclose(a.points, b.points, atol=1e-9)
    np.testing.assert_allclose(a.weights, b.weights, atol=1e-9)


def test_point_set_is_read_only():
    pts = cqpoints.generate(2, 2)
    with pytest.raises(ValueError):
        pts.points[0, 0] = 5.0


def test_spread_maps_points_through_factor():
    pts = cqpoints.generate(2, 1)
    mean = np.array([1.0, 2.0])
    factor = np.diag([2.0, 0.5])
    spread = pts.spread(mean, factor)
    np.testing.assert_allclose(spread[0], mean + factor @ pts.points[0])


def test_to_dict_layout():
    payload = cqpoints.generate(1, 1).to_dict()
    assert payload["M"] == 1 and payload["nprime"] == 1
    assert len(payload["weights"]) == 2 and len(payload["points"]) == 2


@pytest.mark.parametrize("dim, nprime", [(0, 2), (2, 0)])
def test_invalid_sizes(dim, nprime):
    with pytest.raises(DomainError):
        cqpoints.generate(dim, nprime)
