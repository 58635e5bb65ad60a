import numpy as np
import pytest

from app.core.errors import DomainError
from app.core.estimation import cqpoints
from app.core.estimation.estimator import CubatureQuadratureFilter, FilterState, HoltParams, Propagator
from app.core.schedulers.base import StepContext
from app.core.schedulers.factory import build_scheduler
from app.core.schedulers.montecarlo import (
    MonteCarloScheduler,
    montecarlo_decide,
    predicted_response_variance,
)
from app.core.utils.numerics import RngStream, StreamFamily, StreamName
from app.core.world.queries import ClientProcess, MemorylessChain, QueryFn


def _filter(m, sigma_v2=1.0):
    pts = cqpoints.generate(m, 2)
    return CubatureQuadratureFilter(0.0025 * np.eye(m), sigma_v2 * np.eye(m), np.eye(m), pts, Propagator.holt(),
                                    cross_cov="standard", measurement_update="scalar")


def _prior(psi):
    psi = np.asarray(psi, dtype=float)
    m = psi.shape[0]
    return FilterState(x_pri=np.zeros(m), x_pos=np.zeros(m), psi_pri=psi, psi_pos=psi,
                       holt=HoltParams.zeros(m, 0.77, 0.02))


def _mean_client():
    return ClientProcess(1, QueryFn("sample_mean"), MemorylessChain(q=1.0), tau=0)


def test_single_sensor_is_always_chosen():
    cqkf = _filter(1)
    scheduler = MonteCarloScheduler(cqkf, 20, StreamFamily(1))
    ctx = StepContext(t=1, fs=_prior([[0.5]]), clients=[_mean_client()], queried=[True])
    assert all(scheduler.decide(ctx) == 1 for _ in range(5))
    assert scheduler.diagnostics()["lookaheads"] == 5


def test_no_query_means_no_poll():
    scheduler = MonteCarloScheduler(_filter(2), 20, StreamFamily(2))
    ctx = StepContext(t=1, fs=_prior(np.eye(2)), clients=[_mean_client()], queried=[False])
    assert scheduler.decide(ctx) == 0
    assert scheduler.action_space == [0, 1, 2]


def test_ties_go_to_the_lowest_sensor(mocker):
    mocker.patch("app.core.schedulers.montecarlo.predicted_response_variance",
                 return_value=np.array([0.5, 0.2, 0.2]))
    p = montecarlo_decide(_prior(np.eye(3)), _filter(3), [_mean_client()], 10, RngStream(0, 9))
    assert p == 2


def test_polling_the_uncertain_component_is_preferred():
    cqkf = _filter(2)
    fs = _prior(np.diag([100.0, 0.01]))
    picks = [montecarlo_decide(fs, cqkf, [_mean_client()], 100, RngStream(seed, int(StreamName.WHATIF)))
             for seed in range(100)]
    assert picks.count(1) / len(picks) > 0.95


def test_prior_readings_predict_equal_spread_for_every_sensor():
    # with readings drawn around the prior the mixture variance equals the prior variance
    cqkf = _filter(2)
    fs = _prior(np.diag([100.0, 0.01]))
    ratios = []
    for seed in range(40):
        nu = predicted_response_variance(fs, cqkf, [_mean_client()], 100, RngStream(seed, 9), reading="prior")
        ratios.append(nu[0] / nu[1])
    assert 0.85 < np.mean(ratios) < 1.15


def test_response_variance_is_weighted_by_alpha():
    cqkf = _filter(2)
    fs = _prior(np.eye(2))
    full = predicted_response_variance(fs, cqkf, [_mean_client()], 50, RngStream(3, 9))
    half_client = ClientProcess(1, QueryFn("sample_mean"), MemorylessChain(q=1.0), alpha=0.5)
    half = predicted_response_variance(fs, cqkf, [half_client], 50, RngStream(3, 9))
    np.testing.assert_allclose(half, 0.5 * full)


def test_invalid_lookahead_arguments():
    cqkf = _filter(2)
    fs = _prior(np.eye(2))
    with pytest.raises(DomainError):
        predicted_response_variance(fs, cqkf, [_mean_client()], 1, RngStream(0, 9))
    with pytest.raises(DomainError):
        predicted_response_variance(fs, cqkf, [], 10, RngStream(0, 9))
    with pytest.raises(DomainError):
        predicted_response_variance(fs, cqkf, [_mean_client()], 10, RngStream(0, 9), reading="posterior")
    with pytest.raises(DomainError):
        MonteCarloScheduler(cqkf, 10, StreamFamily(0), reading="posterior")


def test_factory_builds_every_scheduler():
    cqkf = _filter(3)
    streams = StreamFamily(4)
    assert build_scheduler("proposed", cqkf, 2, streams).name == "proposed"
    assert build_scheduler("benchmark_drl", cqkf, 2, streams).layer_sizes() == [14, 8, 3, 3, 3]
    assert build_scheduler("montecarlo", cqkf, 2, streams, samples=30).S == 30
    with pytest.raises(DomainError):
        build_scheduler("greedy", cqkf, 2, streams)
