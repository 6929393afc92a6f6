"""Monte Carlo sweeps over SINR target, user count or antenna count."""

from __future__ import annotations

import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from ..antsel import select_antennas
from ..model import BeamformerSet, Channel, PowerBreakdown, SystemConfig
from ..sca import ProblemInfeasible, ScaOptions, Scheme, SolverError, evaluate_scheme, sca_solve
from .channels import gen_channel, trial_seed
from .config import ExperimentConfig
from .records import DEGRADED, FAILED, INFEASIBLE, SOLVED, TrialRecord

log = logging.getLogger(__name__)

WORKERS_ENV = "GREENBEAM_WORKERS"


@dataclass(frozen=True)
class SchemeResult:
    """Outcome of one scheme on one channel."""

    breakdown: PowerBreakdown
    w: BeamformerSet
    sca_iterations: int
    candidates: Optional[int]
    degraded: bool


def run_scheme(channel: Channel, cfg: SystemConfig, scheme: Scheme,
               opts: Optional[ScaOptions] = None) -> SchemeResult:
    """Joint schemes go through antenna selection, BfOnly schemes through one SCA run.

    Raises ProblemInfeasible when the SINR targets cannot be met.
    """
    opts = replace(opts or ScaOptions(), scheme=Scheme(scheme))
    if opts.scheme.joint:
        sel = select_antennas(channel, cfg, opts)
        degraded = any(c.trace.degraded for c in sel.candidates if c.trace is not None)
        return SchemeResult(sel.breakdown, sel.w, sel.sca_iterations, sel.n_candidates, degraded)
    trace = sca_solve(channel, cfg, opts)
    return SchemeResult(evaluate_scheme(trace, cfg), trace.w, trace.iterations, None, trace.degraded)


def _sinr_db(cfg: SystemConfig) -> float:
    return 10.0 * math.log10(float(cfg.gamma[0]))


def _instance(exp: ExperimentConfig, value_index: int, trial: int) -> list:
    value = exp.sweep_values[value_index]
    cfg = exp.point(value)
    channel = gen_channel(trial_seed(exp.seed, trial), cfg.n_users, cfg.n_antennas, exp.pathloss_scale)
    sinr_db = float(value) if exp.sweep_axis == "sinr_db" else _sinr_db(cfg)
    out = []
    for scheme in exp.schemes:
        common = dict(
            value=None if value is None else float(value), trial=trial, seed=exp.seed,
            scheme=scheme.value, n_antennas=cfg.n_antennas, n_users=cfg.n_users,
            sinr_db=sinr_db, beta=cfg.beta, epsilon=cfg.epsilon,
        )
        t0 = time.perf_counter()
        try:
            res = run_scheme(channel, cfg, scheme, exp.sca)
        except ProblemInfeasible:
            out.append(TrialRecord(status=INFEASIBLE, wall_time_ms=1e3 * (time.perf_counter() - t0),
                                   **common))
            continue
        except SolverError as exc:
            log.warning("trial %d value %s scheme %s failed: %s", trial, value, scheme.value, exc)
            out.append(TrialRecord(status=FAILED, wall_time_ms=1e3 * (time.perf_counter() - t0),
                                   **common))
            continue
        b = res.breakdown
        t = res.w.antenna_powers()
        out.append(TrialRecord(
            status=DEGRADED if res.degraded else SOLVED,
            total_w=b.total, pa_w=b.pa, rf_w=b.rf, static_w=b.static, tx_w=float(t.sum()),
            active_antennas=int(np.count_nonzero(t > cfg.on_threshold)),
            sca_iterations=res.sca_iterations, candidates=res.candidates,
            wall_time_ms=1e3 * (time.perf_counter() - t0), **common,
        ))
    return out


def _task(args):
    exp, value_index, trial = args
    return value_index, trial, _instance(exp, value_index, trial)


def default_workers() -> int:
    env = os.environ.get(WORKERS_ENV)
    if env:
        n = int(env)
        if n < 1:
            raise ValueError(f"{WORKERS_ENV} must be >= 1, got {env}")
        return n
    return os.cpu_count() or 1


def run_sweep(exp: ExperimentConfig, workers: Optional[int] = None) -> list:
    """All records of ``exp``, sorted by (sweep value, trial, scheme) in config order.

    Every record depends only on its own (value, trial, scheme), so the
    result is the same for any worker count.  ``workers`` defaults to the
    ``GREENBEAM_WORKERS`` environment variable, then the CPU count.
    """
    workers = default_workers() if workers is None else int(workers)
    tasks = [(exp, v, t) for v in range(len(exp.sweep_values)) for t in range(exp.trials)]
    if workers <= 1 or len(tasks) <= 1:
        results = [_task(a) for a in tasks]
    else:
        with ProcessPoolExecutor(max_workers=min(workers, len(tasks))) as pool:
            results = list(pool.map(_task, tasks, chunksize=1))
    # each instance lists its schemes in config order
    return [r for _, _, recs in sorted(results, key=lambda x: (x[0], x[1])) for r in recs]
