import numpy as np
import pytest
from scipy.stats import norm

from app.core.errors import DomainError
from app.core.utils.numerics import RngStream, gaussian_samples
from app.core.world.queries import (
    ClientProcess,
    MemorylessChain,
    PeriodicChain,
    QueryFn,
    advance_client,
    analytic_query_mse,
    estimate_query_mse,
    eval_query,
    respond,
    response_spread,
    reward,
)


# ---------------------------------------------------------------------------
# Query functions
# ---------------------------------------------------------------------------

def test_maximum():
    assert eval_query(QueryFn("maximum"), np.array([0.1, -0.2, 0.3])) == pytest.approx(0.3)


def test_count_range():
    q = QueryFn("count_range", beta1=-0.5, beta2=-0.2)
    assert eval_query(q, np.array([-0.3, 0.0, -0.6])) == 1.0


def test_sample_variance():
    assert eval_query(QueryFn("sample_variance"), np.array([1.0, 2.0, 3.0])) == pytest.approx(1.0)


def test_sample_variance_needs_two_components():
    with pytest.raises(DomainError):
        eval_query(QueryFn("sample_variance"), np.array([1.0]))


def test_current_state_returns_a_copy():
    x = np.array([1.0, 2.0])
    out = eval_query(QueryFn("current_state"), x)
    np.testing.assert_array_equal(out, x)
    assert out is not x


def test_query_on_a_stack_of_states():
    states = np.array([[0.0, 1.0], [2.0, 4.0]])
    np.testing.assert_allclose(eval_query(QueryFn("sample_mean"), states), [0.5, 3.0])


def test_invalid_queries():
    with pytest.raises(DomainError):
        QueryFn("median")
    with pytest.raises(DomainError):
        QueryFn("count_range", beta1=1.0, beta2=0.0)


# ---------------------------------------------------------------------------
# Client processes
# ---------------------------------------------------------------------------

def _walk(client, steps, rng):
    queried = []
    for _ in range(steps):
        client, asked = advance_client(client, rng)
        queried.append(asked)
    return client, queried


def test_periodic_chain_from_d_first_queries_after_three_steps(rng):
    client = ClientProcess(1, QueryFn("maximum"), PeriodicChain.from_letter(6, "D"))
    _, queried = _walk(client, 15, rng)
    assert [t for t, asked in enumerate(queried, start=1) if asked] == [3, 9, 15]


def test_tau_counts_steps_since_last_query(rng):
    client = ClientProcess(1, QueryFn("maximum"), PeriodicChain.from_letter(6, "B"))
    taus = []
    for _ in range(7):
        client, _ = advance_client(client, rng)
        taus.append(client.tau)
    assert taus == [1, 2, 3, 4, 0, 1, 2]


def test_initial_state_outside_the_chain():
    with pytest.raises(DomainError):
        PeriodicChain.from_letter(6, "H")


def test_memoryless_chain_with_certain_queries(rng):
    client = ClientProcess(1, QueryFn("maximum"), MemorylessChain(q=1.0))
    for _ in range(20):
        client, asked = advance_client(client, rng)
        assert asked and client.tau == 0


def test_memoryless_chain_query_frequency():
    rng = RngStream(21, 6)
    q = 1.0 / 6.0
    steps = 100_000
    _, queried = _walk(ClientProcess(1, QueryFn("maximum"), MemorylessChain(q=q)), steps, rng)
    sigma = np.sqrt(q * (1 - q) / steps)
    assert abs(np.mean(queried) - q) < 3 * sigma


# ---------------------------------------------------------------------------
# Responses and MSE
# ---------------------------------------------------------------------------

def test_degenerate_posterior_has_zero_mse(rng):
    mse = estimate_query_mse(np.array([0.2, 0.4]), np.zeros((2, 2)), QueryFn("maximum"), 50, rng)
    assert mse == 0.0


def test_identical_responses_have_zero_spread():
    assert response_spread(np.full(100, 0.4)) == 0.0
    assert response_spread(np.tile([0.2, -0.7, 1.3], (50, 1))) == 0.0
    assert response_spread(np.array([1.0, 3.0])) == pytest.approx(2.0)


def test_sample_mean_mse_matches_analytic_value(rng):
    m, samples = 20, 100_000
    psi = np.eye(m)
    mse = estimate_query_mse(np.zeros(m), psi, QueryFn("sample_mean"), samples, rng)
    expected = analytic_query_mse(np.zeros(m), psi, QueryFn("sample_mean"))
    assert expected == pytest.approx(0.05)
    # standard error of a Gaussian sample variance
    assert abs(mse - expected) < 3 * expected * np.sqrt(2.0 / (samples - 1))


def test_count_range_mse_matches_bernoulli_sum(rng):
    x = np.array([-0.4, -0.1, 0.3, -0.6])
    sigma = np.array([0.2, 0.3, 0.1, 0.25])
    beta = (-0.5, -0.2)
    samples = 100_000
    mse = estimate_query_mse(x, np.diag(sigma ** 2), QueryFn("count_range", *beta), samples, rng)

    p = norm.cdf((beta[1] - x) / sigma) - norm.cdf((beta[0] - x) / sigma)
    pq = p * (1 - p)
    expected = float(np.sum(pq))
    kappa4 = float(np.sum(pq * (1 - 6 * pq)))
    se = np.sqrt((kappa4 + 2 * expected ** 2) / samples)
    assert abs(mse - expected) < 3 * se


def test_mse_is_invariant_under_component_permutation(rng):
    x = np.array([0.3, -0.1, 0.5, 0.0])
    psi = np.array([
        [0.30, 0.05, 0.00, 0.02],
        [0.05, 0.20, 0.01, 0.00],
        [0.00, 0.01, 0.10, 0.03],
        [0.02, 0.00, 0.03, 0.25],
    ])
    perm = [2, 0, 3, 1]
    samples = gaussian_samples(x, psi, rng, 10_000)
    for q in (QueryFn("maximum"), QueryFn("sample_mean"), QueryFn("sample_variance"),
              QueryFn("count_range", -0.2, 0.4)):
        a = estimate_query_mse(x, psi, q, 10_000, rng, samples=samples)
        b = estimate_query_mse(x[perm], psi[np.ix_(perm, perm)], q, 10_000, rng, samples=samples[:, perm])
        assert a == pytest.approx(b, rel=1e-10)


def test_current_state_mse_sums_component_variances(rng):
    psi = np.diag([0.5, 1.5])
    mse = estimate_query_mse(np.zeros(2), psi, QueryFn("current_state"), 50_000, rng)
    assert mse == pytest.approx(2.0, rel=0.05)
    assert analytic_query_mse(np.zeros(2), psi, QueryFn("current_state")) == pytest.approx(2.0)


def test_sample_variance_analytic_mse(rng):
    x = np.array([0.4, -0.2, 0.1])
    psi = np.diag([0.05, 0.02, 0.04])
    q = QueryFn("sample_variance")
    expected = analytic_query_mse(x, psi, q)
    mse = estimate_query_mse(x, psi, q, 200_000, rng)
    assert mse == pytest.approx(expected, rel=0.05)


def test_no_closed_form_for_maximum():
    with pytest.raises(DomainError):
        analytic_query_mse(np.zeros(2), np.eye(2), QueryFn("maximum"))


def test_mse_needs_two_samples(rng):
    with pytest.raises(DomainError):
        estimate_query_mse(np.zeros(2), np.eye(2), QueryFn("maximum"), 1, rng)


def test_plug_in_responses():
    assert respond(np.array([0.0, 1.0, -1.0]), QueryFn("maximum")) == 1.0
    assert respond(np.array([2.0, 4.0]), QueryFn("sample_mean")) == 3.0
    x = np.array([0.5, 0.25])
    np.testing.assert_array_equal(respond(x, QueryFn("current_state")), x)


def test_sample_mean_response():
    samples = np.array([[1.0, 0.0], [3.0, 2.0]])
    assert respond(np.zeros(2), QueryFn("maximum"), samples) == 2.0


# ---------------------------------------------------------------------------
# Reward
# ---------------------------------------------------------------------------

def _clients(*taus):
    return [ClientProcess(i, QueryFn("maximum"), MemorylessChain(q=0.5), tau=tau)
            for i, tau in enumerate(taus, start=1)]


def test_idle_step_reward_scales_trace_by_mu():
    psi = np.eye(2)
    assert reward({}, _clients(1, 2), 0, 0.1, psi) == pytest.approx(-0.2)


def test_poll_without_query_pays_full_trace():
    assert reward({}, _clients(1, 2), 3, 0.1, np.eye(2)) == pytest.approx(-2.0)


def test_query_reward_sums_weighted_mse():
    assert reward({1: 0.04}, _clients(0, 3), 2, 0.1, np.eye(2)) == pytest.approx(-0.04)


def test_zero_idle_reward():
    assert reward({}, _clients(1, 2), 4, 0.1, np.eye(2), idle_reward="zero") == 0.0
