"""Antenna switch-off driven by beamforming weights, plus an exhaustive oracle."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .model import BeamformerSet, Channel, PowerBreakdown, SystemConfig
from .sca import ProblemInfeasible, ScaOptions, ScaTrace, evaluate_scheme, sca_solve

TIE_TOL = 1e-12


def antenna_weights(w: BeamformerSet) -> np.ndarray:
    """Per-antenna beamforming weight ``v_n = sum_k |w_{k,n}|^2``."""
    return w.antenna_powers()


@dataclass(frozen=True)
class Candidate:
    antennas: tuple
    feasible: bool
    breakdown: Optional[PowerBreakdown]
    trace: Optional[ScaTrace]


@dataclass(frozen=True)
class SelectionResult:
    weights: np.ndarray
    candidates: tuple
    chosen: int
    w: BeamformerSet
    breakdown: PowerBreakdown

    @property
    def chosen_subset(self) -> tuple:
        return self.candidates[self.chosen].antennas

    @property
    def active_set(self) -> tuple:
        """Antennas of the chosen beamformer whose output exceeds the on threshold."""
        trace = self.candidates[self.chosen].trace
        on = trace.w.antenna_powers() > trace.design_config.on_threshold
        return tuple(a for a, flag in zip(self.chosen_subset, on) if flag)

    @property
    def n_candidates(self) -> int:
        return len(self.candidates)

    @property
    def sca_iterations(self) -> int:
        return sum(c.trace.iterations for c in self.candidates if c.trace is not None)


def _evaluate_subset(channel, cfg, opts, subset, trace=None) -> Candidate:
    sub_cfg = cfg.restrict(subset)
    if trace is None:
        try:
            trace = sca_solve(channel.restrict(subset), sub_cfg, opts)
        except ProblemInfeasible:
            return Candidate(tuple(subset), False, None, None)
    return Candidate(tuple(subset), True, evaluate_scheme(trace, sub_cfg), trace)


def _pick(candidates) -> int:
    best = None
    best_key = None
    for i, cand in enumerate(candidates):
        if not cand.feasible:
            continue
        key = (cand.breakdown.total, cand.breakdown.rf)
        if best is None:
            best, best_key = i, key
            continue
        total, rf = key
        if total < best_key[0] - TIE_TOL * max(1.0, best_key[0]):
            best, best_key = i, key
        elif abs(total - best_key[0]) <= TIE_TOL * max(1.0, best_key[0]) and rf < best_key[1]:
            best, best_key = i, key
    return best


def _result(weights, candidates, cfg) -> SelectionResult:
    chosen = _pick(candidates)
    cand = candidates[chosen]
    return SelectionResult(
        weights=weights,
        candidates=tuple(candidates),
        chosen=chosen,
        w=cand.trace.w.embed(cand.antennas, cfg.n_antennas),
        breakdown=cand.breakdown,
    )


def select_antennas(channel: Channel, cfg: SystemConfig, opts: Optional[ScaOptions] = None) -> SelectionResult:
    """Switch antennas off in ascending order of their full-array weight.

    Every nested candidate array is re-optimised from scratch and scored by
    its exact total power.  Expansion stops at the first infeasible
    candidate, since all smaller nested arrays are infeasible too.

    Raises ProblemInfeasible when the full array cannot meet the targets.
    """
    opts = opts or ScaOptions()
    full = tuple(range(cfg.n_antennas))
    full_trace = sca_solve(channel, cfg, opts)
    weights = antenna_weights(full_trace.w)
    order = np.argsort(weights, kind="stable")
    candidates = [_evaluate_subset(channel, cfg, opts, full, full_trace)]
    for j in range(1, cfg.n_antennas):
        subset = tuple(sorted(int(n) for n in order[j:]))
        cand = _evaluate_subset(channel, cfg, opts, subset)
        candidates.append(cand)
        if not cand.feasible:
            break
    return _result(weights, candidates, cfg)


def exhaustive_select(channel: Channel, cfg: SystemConfig, opts: Optional[ScaOptions] = None,
                      max_antennas: int = 12) -> SelectionResult:
    """Best exact total power over every non-empty antenna subset.

    Exponential in N; meant as a test oracle for small arrays.
    """
    if cfg.n_antennas > max_antennas:
        raise ValueError(f"exhaustive search limited to {max_antennas} antennas, got {cfg.n_antennas}")
    opts = opts or ScaOptions()
    full = tuple(range(cfg.n_antennas))
    full_trace = sca_solve(channel, cfg, opts)
    candidates = [_evaluate_subset(channel, cfg, opts, full, full_trace)]
    for size in range(cfg.n_antennas - 1, 0, -1):
        for subset in itertools.combinations(full, size):
            candidates.append(_evaluate_subset(channel, cfg, opts, subset))
    return _result(antenna_weights(full_trace.w), candidates, cfg)
