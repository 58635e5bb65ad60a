import math

import numpy as np
import pytest

from app.core.errors import DomainError, NotPositiveDefiniteError, RootIsolationError
from app.core.utils.numerics import (
    RngStream,
    StreamFamily,
    StreamName,
    cholesky,
    cl_poly,
    cl_poly_roots,
    companion_matrix,
    ensure_spd,
    gamma_fn,
    gaussian_sample,
    gaussian_samples,
    poly_eval_deriv,
)


def test_cholesky_identity():
    np.testing.assert_allclose(cholesky(np.eye(2)), np.eye(2))


def test_cholesky_diagonal():
    np.testing.assert_allclose(cholesky(np.diag([4.0, 9.0])), np.diag([2.0, 3.0]))


def test_cholesky_full_matrix_reconstructs():
    m = np.array([[4.0, 2.0], [2.0, 3.0]])
    factor = cholesky(m)
    np.testing.assert_allclose(factor, [[2.0, 0.0], [1.0, math.sqrt(2.0)]], atol=1e-12)
    np.testing.assert_allclose(factor @ factor.T, m, atol=1e-12)


def test_cholesky_jitters_semidefinite_matrix():
    factor = cholesky(np.array([[1.0, 1.0], [1.0, 1.0]]))
    np.testing.assert_allclose(factor @ factor.T, [[1.0, 1.0], [1.0, 1.0]], atol=1e-6)


def test_cholesky_rejects_indefinite_matrix():
    with pytest.raises(NotPositiveDefiniteError):
        cholesky(np.diag([1.0, -1.0]))


def test_cholesky_rejects_non_finite_entries():
    with pytest.raises(NotPositiveDefiniteError):
        cholesky(np.array([[np.nan, 0.0], [0.0, 1.0]]))


@pytest.mark.parametrize("x, expected", [(1.0, 1.0), (0.5, math.sqrt(math.pi)), (11.0, 3628800.0)])
def test_gamma_known_values(x, expected):
    assert gamma_fn(x) == pytest.approx(expected, rel=1e-10)


def test_gamma_recurrence_on_half_integers():
    for x in np.arange(0.5, 21.0, 1.0):
        assert gamma_fn(x + 1.0) == pytest.approx(x * gamma_fn(x), rel=1e-10)


@pytest.mark.parametrize("x", [0.0, -1.5])
def test_gamma_domain(x):
    with pytest.raises(DomainError):
        gamma_fn(x)


def test_cl_poly_linear_case():
    np.testing.assert_allclose(cl_poly(1, 0.0), [-1.0, 1.0])


def test_cl_poly_quadratic_half_integer_iota():
    np.testing.assert_allclose(cl_poly(2, -0.5), [0.75, -3.0, 1.0], atol=1e-12)


def test_cl_poly_is_monic():
    for nprime in range(1, 7):
        assert cl_poly(nprime, 9.0)[-1] == 1.0


def test_cl_poly_rejects_degree_zero():
    with pytest.raises(DomainError):
        cl_poly(0, 0.0)


def test_roots_of_linear_polynomial():
    np.testing.assert_allclose(cl_poly_roots(cl_poly(1, 0.0)), [1.0], atol=1e-12)


@pytest.mark.parametrize("method", ["bisection", "companion"])
def test_roots_of_quadratic(method):
    roots = cl_poly_roots(cl_poly(2, -0.5), method=method)
    expected = [(3 - math.sqrt(6)) / 2, (3 + math.sqrt(6)) / 2]
    np.testing.assert_allclose(roots, expected, atol=1e-10)


def test_roots_for_twenty_dimensional_state():
    roots = cl_poly_roots(cl_poly(2, 9.0))
    np.testing.assert_allclose(roots, [11 - math.sqrt(11), 11 + math.sqrt(11)], atol=1e-9)


def test_root_methods_agree_on_higher_orders():
    coeffs = cl_poly(3, 1.5)
    np.testing.assert_allclose(cl_poly_roots(coeffs, "bisection"), cl_poly_roots(coeffs, "companion"), atol=1e-9)


def test_roots_fail_without_real_roots():
    # lambda^2 + 1 has no real roots
    with pytest.raises(RootIsolationError):
        cl_poly_roots(np.array([1.0, 0.0, 1.0]), method="companion")


def test_unknown_root_method():
    with pytest.raises(DomainError):
        cl_poly_roots(cl_poly(2, 0.0), method="newton")


def test_horner_value_and_derivative():
    coeffs = [0.75, -3.0, 1.0]
    assert poly_eval_deriv(coeffs, 0.0) == (0.75, -3.0)
    assert poly_eval_deriv([-1.0, 1.0], 1.0) == (0.0, 1.0)
    root = (3 + math.sqrt(6)) / 2
    value, deriv = poly_eval_deriv(coeffs, root)
    assert value == pytest.approx(0.0, abs=1e-12)
    assert deriv == pytest.approx(math.sqrt(6), rel=1e-12)


def test_companion_matrix_layout():
    d = companion_matrix([0.75, -3.0, 1.0])
    np.testing.assert_allclose(d, [[0.0, 1.0], [-0.75, 3.0]])


def test_gaussian_sample_zero_covariance_returns_mean(rng):
    mean = np.array([1.0, -2.0])
    np.testing.assert_array_equal(gaussian_sample(mean, np.zeros((2, 2)), rng), mean)


def test_gaussian_samples_mean_within_clt_bound(rng):
    size = 100_000
    samples = gaussian_samples(np.zeros(3), np.eye(3), rng, size)
    assert samples.shape == (size, 3)
    assert np.all(np.abs(samples.mean(axis=0)) < 4.0 / math.sqrt(size))


def test_same_seed_and_stream_reproduce_samples():
    a = gaussian_samples(np.zeros(2), np.eye(2), RngStream(5, 2), 10)
    b = gaussian_samples(np.zeros(2), np.eye(2), RngStream(5, 2), 10)
    np.testing.assert_array_equal(a, b)


def test_distinct_streams_differ():
    a = RngStream(5, 1).standard_normal(4)
    b = RngStream(5, 2).standard_normal(4)
    assert not np.array_equal(a, b)


def test_stream_family_caches_streams():
    family = StreamFamily(9)
    assert family[StreamName.CHANNEL] is family[StreamName.CHANNEL]
    assert family[StreamName.CHANNEL].stream_id == int(StreamName.CHANNEL)


def test_ensure_spd_leaves_spd_matrix_untouched():
    m = np.array([[2.0, 0.5], [0.5, 1.0]])
    np.testing.assert_array_equal(ensure_spd(m), m)


def test_ensure_spd_repairs_negative_eigenvalue():
    repaired = ensure_spd(np.diag([1.0, -1e-3]))
    assert np.linalg.eigvalsh(repaired).min() > 0.0
