"""Experiment Service - the simulation loop

Wires the world, the clients, the filter and a scheduler together and runs
one experiment step by step:

1. advance the true state
2. advance the client chains and their ``tau`` counters
3. predict, let the scheduler pick an action
4. on a poll, read the sensor and push the reading through the channel
5. compute the posterior
6. answer the queries and estimate their MSE from posterior samples
7. compute the reward
8. let the scheduler learn
9. record the step

Steps up to the warm-up length run fully but are left out of the summary.
"""

import time
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from joblib import Parallel, delayed

from app.core.config import settings
from app.core.errors import DomainError, StepError
from app.core.estimation import cqpoints
from app.core.estimation.estimator import CubatureQuadratureFilter, FilterState
from app.core.schedulers import Scheduler, StepContext, build_scheduler
from app.core.utils.logger import get_logger
from app.core.utils.numerics import StreamFamily, StreamName, gaussian_samples
from app.core.world.dynamics import initial_state, observe, step_state, transmit
from app.core.world.queries import advance_client, estimate_query_mse, eval_query, respond, reward
from app.schemas.experiment_config import ExperimentConfig
from app.schemas.run_models import (
    AggregateSummary,
    ClientStep,
    ClientSummary,
    QueryEvent,
    Quartiles,
    RunRecord,
    RunSummary,
)

logger = get_logger(__name__)


@dataclass
class RunResult:
    records: List[RunRecord]
    events: List[QueryEvent]
    summary: RunSummary
    weights: Optional[Dict[str, Any]] = None
    diagnostics: Dict[str, Any] = field(default_factory=dict)


def _as_value(z):
    return z.tolist() if isinstance(z, np.ndarray) else float(z)


class ExperimentService:
    """Runs experiments and summarizes them."""

    def build(self, cfg: ExperimentConfig, seed: int) -> Tuple[Any, CubatureQuadratureFilter, Scheduler, StreamFamily]:
        """World config, filter and scheduler for one seeded run."""
        streams = StreamFamily(seed)
        world = cfg.build_world()
        pts = cqpoints.generate(cfg.world.M, cfg.filter.nprime, cfg.numerics.root_method)
        cqkf = CubatureQuadratureFilter(
            world.sigma_v1, world.sigma_v2, world.h, pts, cfg.build_propagator(world),
            cross_cov=cfg.filter.cross_cov, measurement_update=cfg.filter.measurement_update,
        )
        scheduler = build_scheduler(
            cfg.scheduler.kind.value, cqkf, cfg.n_clients, streams,
            dqn=cfg.build_dqn(), samples=cfg.S, whatif_reading=cfg.scheduler.whatif_reading,
        )
        return world, cqkf, scheduler, streams

    def run_experiment(self, cfg: ExperimentConfig, seed: Optional[int] = None,
                       progress_every: Optional[int] = None) -> RunResult:
        seed = cfg.seed if seed is None else int(seed)
        progress_every = progress_every or settings.PROGRESS_EVERY
        start = time.time()

        world, cqkf, scheduler, streams = self.build(cfg, seed)
        fs = FilterState.initial(cfg.world.M, cfg.build_holt())
        ws = initial_state(world)
        clients = cfg.build_clients()

        logger.info("Starting experiment", {
            "scheduler": scheduler.name,
            "seed": seed,
            "horizon": cfg.horizon,
            "warmup": cfg.warmup,
            "M": cfg.world.M,
            "N": cfg.world.N,
            "clients": len(clients),
        })

        records: List[RunRecord] = []
        events: List[QueryEvent] = []
        for t in range(1, cfg.horizon + 1):
            try:
                ws = step_state(ws, world, streams[StreamName.DYNAMICS])

                queried = []
                for i, client in enumerate(clients):
                    clients[i], asked = advance_client(client, streams[StreamName.CLIENTS])
                    queried.append(asked)

                fs = cqkf.predict(fs)
                ctx = StepContext(t=t, fs=fs, clients=list(clients), queried=queried)
                p = scheduler.decide(ctx)
                if p not in scheduler.action_space:
                    raise DomainError(f"action {p} outside the action space of '{scheduler.name}'")

                delivery = None
                if p > 0:
                    y = observe(ws, world, streams[StreamName.MEASUREMENT])
                    delivery = transmit(p, y[p - 1], streams[StreamName.CHANNEL])

                trace_pri = float(np.trace(fs.psi_pri))
                fs = cqkf.posterior(fs, delivery)

                steps, mses = self._answer_queries(cfg, fs, ws.x, clients, queried, streams)
                r = reward(mses, clients, p, cfg.mu, fs.psi_pos, idle_reward=scheduler.idle_reward)
                scheduler.learn(ctx, p, r)
            except StepError:
                raise
            except Exception as exc:
                logger.failure("Experiment step failed", {"t": t, "error": str(exc)})
                raise StepError(t, exc) from exc

            record = RunRecord(
                t=t,
                action=p,
                transmitted=p != 0,
                erased=delivery is not None and not delivery.delivered,
                reward=r,
                trace_pri=trace_pri,
                trace_pos=float(np.trace(fs.psi_pos)),
                warmup=t <= cfg.warmup,
                err_norm=float(np.linalg.norm(ws.x - fs.x_pos)),
                clients=steps,
            )
            records.append(record)
            for client, step in zip(clients, steps):
                if step.queried:
                    events.append(QueryEvent(t=t, client=client.client_id, z_true=step.z_true,
                                             z_hat=step.z_hat, mse=step.mse))

            if t % progress_every == 0:
                logger.progress(t, cfg.horizon, {"scheduler": scheduler.name, **scheduler.diagnostics()})

        wall_clock = time.time() - start
        summary = self.summarize(records, scheduler.action_space, seed=seed, scheduler=scheduler.name,
                                 config_echo=cfg.echo(), wall_clock_s=wall_clock)
        logger.performance("Experiment finished", wall_clock, {
            "scheduler": scheduler.name,
            "seed": seed,
            "transmissions": summary.transmissions,
            "total_reward": round(summary.total_reward, 6),
        })
        weights = scheduler.snapshot() if cfg.outputs.weight_snapshot else None
        return RunResult(records=records, events=events, summary=summary, weights=weights,
                         diagnostics=scheduler.diagnostics())

    def _answer_queries(self, cfg: ExperimentConfig, fs: FilterState, x_true: np.ndarray,
                        clients, queried: Sequence[bool],
                        streams: StreamFamily) -> Tuple[List[ClientStep], Dict[int, float]]:
        steps = [ClientStep() for _ in clients]
        mses: Dict[int, float] = {}
        if not any(queried):
            return steps, mses

        samples = gaussian_samples(fs.x_pos, fs.psi_pos, streams[StreamName.MSE_SAMPLING], cfg.S)
        for i, (client, asked) in enumerate(zip(clients, queried)):
            if not asked:
                continue
            mse = estimate_query_mse(fs.x_pos, fs.psi_pos, client.query, cfg.S,
                                     streams[StreamName.MSE_SAMPLING], samples=samples)
            z_hat = respond(fs.x_pos, client.query, samples if cfg.response == "sample_mean" else None)
            mses[client.client_id] = mse
            steps[i] = ClientStep(queried=True, mse=mse, z_true=_as_value(eval_query(client.query, x_true)),
                                  z_hat=_as_value(z_hat))
        return steps, mses

    @staticmethod
    def summarize(records: Sequence[RunRecord], actions: Sequence[int], seed: int = 0,
                  scheduler: str = "", config_echo: Optional[Dict[str, Any]] = None,
                  wall_clock_s: float = 0.0) -> RunSummary:
        """ASF, transmissions, per-client MSE quartiles and total reward over non-warm-up records."""
        evaluation = [r for r in records if not r.warmup]
        if not evaluation:
            raise DomainError("nothing to summarize: every record is in the warm-up window")

        counts = {a: 0 for a in actions}
        for r in evaluation:
            if r.action not in counts:
                raise DomainError(f"action {r.action} outside the action space {list(actions)}")
            counts[r.action] += 1
        asf = [counts[a] / len(evaluation) for a in actions]

        n_clients = max((len(r.clients) for r in evaluation), default=0)
        per_client = []
        for c in range(n_clients):
            values = [r.clients[c].mse for r in evaluation if r.clients[c].queried]
            if values:
                q1, median, q3 = np.percentile(values, [25, 50, 75])
                per_client.append(ClientSummary(median_mse=float(median), q1=float(q1), q3=float(q3),
                                                queries=len(values)))
            else:
                per_client.append(ClientSummary(queries=0))

        return RunSummary(
            scheduler=scheduler,
            actions=list(actions),
            asf=asf,
            transmissions=sum(1 for r in evaluation if r.transmitted),
            per_client=per_client,
            total_reward=float(sum(r.reward for r in evaluation)),
            seed=seed,
            evaluation_steps=len(evaluation),
            query_steps=sum(1 for r in evaluation if any(c.queried for c in r.clients)),
            wall_clock_s=wall_clock_s,
            config_echo=config_echo or {},
        )

    @staticmethod
    def replication_seeds(master_seed: int, count: int) -> List[int]:
        """Independent child seeds spawned from the master seed."""
        children = np.random.SeedSequence(master_seed).spawn(count)
        return [int(child.generate_state(1)[0]) for child in children]

    def run_replications(self, cfg: ExperimentConfig, count: int,
                         n_jobs: Optional[int] = None) -> Tuple[List[RunResult], AggregateSummary]:
        if count < 1:
            raise DomainError(f"need at least one replication, got {count}")
        seeds = self.replication_seeds(cfg.seed, count)
        n_jobs = settings.N_JOBS if n_jobs is None else n_jobs
        logger.info("Starting replications", {"count": count, "n_jobs": n_jobs, "master_seed": cfg.seed})

        results = Parallel(n_jobs=n_jobs)(delayed(_run_one)(cfg, seed) for seed in seeds)
        aggregate = self.aggregate([r.summary for r in results])
        logger.success("Replications finished", {"count": count})
        return results, aggregate

    @staticmethod
    def aggregate(summaries: Sequence[RunSummary]) -> AggregateSummary:
        """Median and interquartile range of the headline metrics across seeds."""
        series: Dict[str, List[float]] = {
            "transmissions": [s.transmissions for s in summaries],
            "total_reward": [s.total_reward for s in summaries],
        }
        for summary in summaries:
            for c, client in enumerate(summary.per_client, start=1):
                if client.median_mse is not None:
                    series.setdefault(f"client_{c}_median_mse", []).append(client.median_mse)

        metrics = {}
        for name, values in series.items():
            q1, median, q3 = np.percentile(values, [25, 50, 75])
            metrics[name] = Quartiles(median=float(median), q1=float(q1), q3=float(q3))
        return AggregateSummary(seeds=[s.seed for s in summaries], metrics=metrics)


def _run_one(cfg: ExperimentConfig, seed: int) -> RunResult:
    return ExperimentService().run_experiment(cfg, seed=seed)


# Global instance
experiment_service = ExperimentService()


def run_experiment(cfg: ExperimentConfig, seed: Optional[int] = None) -> RunResult:
    return experiment_service.run_experiment(cfg, seed)


def summarize(records: Sequence[RunRecord], actions: Sequence[int]) -> RunSummary:
    return ExperimentService.summarize(records, actions)
