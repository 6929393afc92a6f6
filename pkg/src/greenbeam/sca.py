"""Sequential convex approximation driver and the four benchmark schemes."""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .model import (
    BeamformerSet,
    Channel,
    PowerBreakdown,
    SystemConfig,
    pa_power_of,
    rf_power_smoothed_of,
)
from .socp import DEFAULT_TOL, ConeProblem, ConeSpec, Status
from .subproblems import (
    ConeRows,
    LiftedLayout,
    build_power_epigraphs,
    build_sinr_cones,
    solve_lifted,
    subproblem_coefficients,
)

log = logging.getLogger(__name__)

STALL_REL_TOL = 1e-7


class ProblemInfeasible(Exception):
    """No beamformer satisfies the SINR targets under the power caps."""

    def __init__(self, message: str, certificate_violation: float = float("nan")):
        super().__init__(message)
        self.certificate_violation = certificate_violation


class SolverError(RuntimeError):
    """The cone solver failed on the initialisation problem."""


class Scheme(str, enum.Enum):
    JOINT_NONLINEAR = "JointNonlinear"
    JOINT_FIXED_PA = "JointFixedPA"
    BF_ONLY_NONLINEAR = "BfOnlyNonlinear"
    BF_ONLY_FIXED_PA = "BfOnlyFixedPA"

    @property
    def fixed_pa(self) -> bool:
        return self in (Scheme.JOINT_FIXED_PA, Scheme.BF_ONLY_FIXED_PA)

    @property
    def joint(self) -> bool:
        """Whether the scheme switches antennas off (RF power is optimised)."""
        return self in (Scheme.JOINT_NONLINEAR, Scheme.JOINT_FIXED_PA)

    def design_config(self, cfg: SystemConfig) -> SystemConfig:
        """Configuration the optimiser sees (fixed-PA schemes use beta = 0)."""
        return cfg.with_(beta=0.0) if self.fixed_pa else cfg


class Termination(str, enum.Enum):
    CONVERGED = "converged"
    MAX_ITERATIONS = "max_iterations"
    STALLED = "stalled"
    NUMERICAL_FAILURE = "numerical_failure"


@dataclass(frozen=True)
class ScaOptions:
    max_iterations: int = 100
    tol: float = 1e-6
    scheme: Scheme = Scheme.JOINT_NONLINEAR
    anneal: bool = False
    anneal_stages: int = 3
    anneal_factor: float = 10.0
    solver_tol: float = DEFAULT_TOL

    def __post_init__(self):
        if self.tol <= 0:
            raise ValueError("tol must be > 0")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        object.__setattr__(self, "scheme", Scheme(self.scheme))


@dataclass(frozen=True)
class IterationRecord:
    surrogate: float
    smoothed: float
    exact: float
    antenna_powers: np.ndarray
    epsilon: float
    w: BeamformerSet


@dataclass(frozen=True)
class ScaTrace:
    """History of one SCA run.

    ``records[0]`` describes the initial point; every later record is an
    accepted iterate.  ``iterations`` counts solved subproblems, including a
    rejected final one.
    """

    records: tuple
    w: BeamformerSet
    termination: Termination
    scheme: Scheme
    design_config: SystemConfig
    init_objective: float
    iterations: int
    degraded: bool = False

    @property
    def smoothed(self) -> np.ndarray:
        return np.array([r.smoothed for r in self.records])

    @property
    def exact(self) -> np.ndarray:
        return np.array([r.exact for r in self.records])

    @property
    def surrogate(self) -> np.ndarray:
        return np.array([r.surrogate for r in self.records])


def smoothed_objective(t: np.ndarray, cfg: SystemConfig, include_rf: bool) -> float:
    """PA power plus smoothed RF power; constant N * P_RF when RF is not optimised."""
    rf = rf_power_smoothed_of(t, cfg) if include_rf else cfg.n_antennas * cfg.p_rf
    return pa_power_of(t, cfg) + rf


def exact_objective(t: np.ndarray, cfg: SystemConfig, include_rf: bool) -> float:
    if include_rf:
        rf = cfg.p_rf * int(np.count_nonzero(t > cfg.on_threshold))
    else:
        rf = cfg.n_antennas * cfg.p_rf
    return pa_power_of(t, cfg) + rf


class _ProblemTemplate:
    """Constraint rows shared by every subproblem of one instance."""

    def __init__(self, channel: Channel, cfg: SystemConfig):
        channel.check(cfg)
        self.layout = LiftedLayout.for_config(cfg)
        rows = ConeRows.stack([build_power_epigraphs(cfg, self.layout),
                               build_sinr_cones(channel, cfg, self.layout)])
        self.G, self.h, self.cones = rows.G, rows.h, ConeSpec(rows.blocks)

    def problem(self, t_weights: np.ndarray) -> ConeProblem:
        c = np.zeros(self.layout.n_var)
        c[self.layout.t_slice] = t_weights
        return ConeProblem(c=c, G=self.G, h=self.h, cones=self.cones)


def initial_point(channel: Channel, cfg: SystemConfig, tol: float = DEFAULT_TOL):
    """Solve the minimum sum-power problem; returns ``(w, sum_power, template)``.

    Raises ProblemInfeasible with the solver's certificate residual when the
    targets cannot be met.
    """
    tmpl = _ProblemTemplate(channel, cfg)
    # every user alone needs Gamma_k sigma^2 / |h_k|^2; dividing by the largest
    # such bound puts the optimum at >= 1, so the solver's gap test is relative
    gains = np.sum(np.abs(channel.entries) ** 2, axis=1)
    bound = float(np.max(cfg.gamma * cfg.sigma2 / gains)) if np.all(gains > 0) else 1.0
    scale = 1.0 / bound if np.isfinite(bound) and bound > 0 else 1.0
    res = solve_lifted(tmpl.problem(np.full(cfg.n_antennas, scale)), tmpl.layout, tol)
    if res.status == Status.PRIMAL_INFEASIBLE:
        raise ProblemInfeasible("SINR targets are infeasible under the power caps",
                                res.solution.certificate_violation)
    if res.status != Status.OPTIMAL:
        raise SolverError(f"initialisation problem ended with {res.status.value}")
    return res.w, res.solution.primal_objective / scale, tmpl


def sca_solve(channel: Channel, cfg: SystemConfig, opts: Optional[ScaOptions] = None) -> ScaTrace:
    """Run SCA from the minimum sum-power beamformer.

    Each iteration minimises the linearised objective at the current anchor
    over the exact constraint set and adopts the minimiser.  The run stops
    when the smoothed objective changes by at most ``opts.tol`` relative.
    """
    opts = opts or ScaOptions()
    scheme = opts.scheme
    include_rf = scheme.joint
    design = scheme.design_config(cfg)
    w, init_obj, tmpl = initial_point(channel, design, opts.solver_tol)

    def record(w_, surrogate, c_):
        t = w_.antenna_powers()
        return IterationRecord(surrogate=surrogate,
                               smoothed=smoothed_objective(t, c_, include_rf),
                               exact=exact_objective(t, c_, include_rf),
                               antenna_powers=t, epsilon=c_.epsilon, w=w_)

    stages = opts.anneal_stages if (opts.anneal and include_rf) else 1
    stage_cfg = design
    first = record(w, float("nan"), stage_cfg)
    records = [IterationRecord(first.smoothed, first.smoothed, first.exact,
                               first.antenna_powers, first.epsilon, w)]
    iterations = 0
    degraded = False
    termination = Termination.MAX_ITERATIONS
    for stage in range(stages):
        if stage > 0:
            stage_cfg = stage_cfg.with_(epsilon=stage_cfg.epsilon / opts.anneal_factor)
            records.append(record(w, float("nan"), stage_cfg))
        current = records[-1].smoothed
        termination = Termination.MAX_ITERATIONS
        for _ in range(opts.max_iterations):
            coef = subproblem_coefficients(stage_cfg, w, include_rf)
            res = solve_lifted(tmpl.problem(coef.weights), tmpl.layout, opts.solver_tol)
            iterations += 1
            if res.status != Status.OPTIMAL:
                log.warning("subproblem ended with %s; keeping previous iterate", res.status.value)
                degraded = True
                termination = Termination.NUMERICAL_FAILURE
                break
            w_new = res.w
            t_new = w_new.antenna_powers()
            surrogate_new = coef.value(t_new)
            surrogate_anchor = coef.value(w.antenna_powers())
            nxt = record(w_new, surrogate_new, stage_cfg)
            scale = max(1.0, abs(surrogate_anchor))
            if surrogate_new > surrogate_anchor + STALL_REL_TOL * scale or nxt.smoothed > current:
                # no descent left at solver accuracy
                termination = Termination.STALLED
                break
            records.append(nxt)
            w = w_new
            change = current - nxt.smoothed
            current = nxt.smoothed
            if change <= opts.tol * max(abs(current), 1e-300):
                termination = Termination.CONVERGED
                break
        if termination == Termination.NUMERICAL_FAILURE:
            break
    return ScaTrace(
        records=tuple(records), w=w, termination=termination, scheme=scheme,
        design_config=stage_cfg, init_objective=init_obj, iterations=iterations,
        degraded=degraded,
    )


def evaluate_scheme(trace: ScaTrace, cfg: SystemConfig) -> PowerBreakdown:
    """Exact total power of the trace's final beamformer under ``cfg``.

    ``cfg`` is the true system model, so fixed-PA designs are charged their
    real non-linear PA consumption.  Schemes without antenna switching pay
    for all N RF chains.
    """
    t = trace.w.antenna_powers()
    rf = cfg.p_rf * (int(np.count_nonzero(t > cfg.on_threshold)) if trace.scheme.joint
                     else cfg.n_antennas)
    return PowerBreakdown(pa=pa_power_of(t, cfg), rf=rf, static=cfg.p_static)
