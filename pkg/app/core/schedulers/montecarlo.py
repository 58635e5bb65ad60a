"""One-step lookahead Monte Carlo scheduler.

For every sensor it simulates ``S`` what-if polls: a channel draw, a
hypothetical reading, the resulting posterior, and one state sampled from
it. The spread of the querying clients' responses over those states
predicts the response MSE of polling that sensor; the sensor with the
smallest prediction is polled. Nothing is polled on steps without a query.
"""

from typing import List, Sequence

import numpy as np

from app.core.errors import DomainError
from app.core.estimation.estimator import CubatureQuadratureFilter, FilterState
from app.core.schedulers.base import Scheduler, StepContext
from app.core.utils.logger import get_logger
from app.core.utils.numerics import RngStream, StreamFamily, StreamName, cholesky
from app.core.world.dynamics import erasure_prob
from app.core.world.queries import ClientProcess, eval_query, response_spread

logger = get_logger(__name__)

READING_MODES = ("running", "prior")


def _whatif_means(fs: FilterState, h_n: np.ndarray, gain: np.ndarray, y_hat: float,
                  var_pri: float, var_pos: float, delivered: np.ndarray,
                  noise: np.ndarray, reading: str) -> np.ndarray:
    """Posterior mean of every what-if draw.

    ``running`` draws each reading around the estimate left by the previous
    draw (the prior after an erasure or at the first draw); ``prior`` always
    draws around the prior.
    """
    means = np.empty((len(delivered), fs.x_pri.shape[0]))
    x_run, var_run = fs.x_pri, var_pri
    for s, ok in enumerate(delivered):
        if ok:
            if reading == "running":
                y = float(h_n @ x_run) + np.sqrt(max(var_run, 0.0)) * noise[s]
            else:
                y = y_hat + np.sqrt(max(var_pri, 0.0)) * noise[s]
            x_run = fs.x_pri + gain * (y - y_hat)
            var_run = var_pos
        else:
            x_run, var_run = fs.x_pri, var_pri
        means[s] = x_run
    return means


def predicted_response_variance(fs: FilterState, cqkf: CubatureQuadratureFilter,
                                clients: Sequence[ClientProcess], S: int,
                                rng: RngStream, reading: str = "running") -> np.ndarray:
    """``nu_n = sum_c alpha_c VAR(u_{n,c})`` for every sensor ``n`` (index ``n-1``).

    The posterior covariance of a what-if poll does not depend on the reading,
    so each sensor's gain is computed once and only the mean moves per draw.
    """
    if S < 2:
        raise DomainError(f"sample variance needs S >= 2, got {S}")
    if not clients:
        raise DomainError("the Monte Carlo scheduler needs at least one querying client")
    if reading not in READING_MODES:
        raise DomainError(f"unknown what-if reading mode '{reading}', expected one of {READING_MODES}")

    m = fs.x_pri.shape[0]
    prior_factor = cholesky(fs.psi_pri)
    nu = np.zeros(cqkf.n_sensors)

    for n in range(1, cqkf.n_sensors + 1):
        mg = cqkf.gain(fs, n)
        h_n = cqkf.h[n - 1]
        posterior_factor = cholesky(mg.psi_pos)

        theta = rng.generator.random(S)
        noise = rng.standard_normal(S)
        z = rng.standard_normal((S, m))
        delivered = theta >= erasure_prob(n)

        means = _whatif_means(fs, h_n, mg.gain, mg.y_hat, mg.y_var,
                              float(h_n @ mg.psi_pos @ h_n), delivered, noise, reading)
        states = means + np.where(delivered[:, None], z @ posterior_factor.T, z @ prior_factor.T)

        for client in clients:
            nu[n - 1] += client.alpha * response_spread(np.asarray(eval_query(client.query, states)))

    return nu


def montecarlo_decide(fs: FilterState, cqkf: CubatureQuadratureFilter,
                      clients: Sequence[ClientProcess], S: int, rng: RngStream,
                      reading: str = "running") -> int:
    """Sensor (1-based) with the smallest predicted response variance; ties go low."""
    nu = predicted_response_variance(fs, cqkf, clients, S, rng, reading=reading)
    p = int(np.argmin(nu)) + 1
    if logger.is_debug():
        logger.debug("Monte Carlo lookahead", {"nu": np.round(nu, 6).tolist(), "p": p})
    return p


class MonteCarloScheduler(Scheduler):
    name = "montecarlo"
    idle_reward = "trace"

    def __init__(self, cqkf: CubatureQuadratureFilter, S: int, streams: StreamFamily,
                 reading: str = "running"):
        super().__init__(cqkf.n_sensors)
        if reading not in READING_MODES:
            raise DomainError(f"unknown what-if reading mode '{reading}', expected one of {READING_MODES}")
        self.cqkf = cqkf
        self.S = S
        self.reading = reading
        self.rng = streams[StreamName.WHATIF]
        self.lookaheads = 0

    @property
    def action_space(self) -> List[int]:
        return list(range(0, self.n_sensors + 1))

    def decide(self, ctx: StepContext) -> int:
        if not ctx.any_query:
            return 0
        querying = [client for client, asked in zip(ctx.clients, ctx.queried) if asked]
        self.lookaheads += 1
        return montecarlo_decide(ctx.fs, self.cqkf, querying, self.S, self.rng, reading=self.reading)

    def diagnostics(self):
        return {"lookaheads": self.lookaheads}
