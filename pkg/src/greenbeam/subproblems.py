"""Real-valued cone programs for the beamforming problems.

Variable vector layout (``LiftedLayout``)::

    [Re w_{1,1}, Im w_{1,1}, Re w_{1,2}, ..., Im w_{K,N}, t_1, ..., t_N]

where ``t_n`` is an epigraph variable for the output power of antenna n.
The slack vector stacks, in order: the N + 1 linear power caps, N
epigraph cones of dimension 2K + 2 and K SINR cones of dimension 2K.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .model import BeamformerSet, Channel, SystemConfig, pa_slopes, rf_slopes
from .socp import (
    DEFAULT_TOL,
    ConeProblem,
    ConeSolution,
    ConeSpec,
    NonNeg,
    SecondOrder,
    Status,
    solve_socp,
)


@dataclass(frozen=True)
class LiftedLayout:
    n_users: int
    n_antennas: int

    @classmethod
    def for_config(cls, cfg: SystemConfig) -> "LiftedLayout":
        return cls(cfg.n_users, cfg.n_antennas)

    @property
    def n_beam(self) -> int:
        return 2 * self.n_users * self.n_antennas

    @property
    def n_var(self) -> int:
        return self.n_beam + self.n_antennas

    def re_index(self, k: int, n: int) -> int:
        return 2 * (k * self.n_antennas + n)

    def im_index(self, k: int, n: int) -> int:
        return 2 * (k * self.n_antennas + n) + 1

    def t_index(self, n: int) -> int:
        return self.n_beam + n

    @property
    def t_slice(self) -> slice:
        return slice(self.n_beam, self.n_var)

    def antenna_columns(self, n: int) -> np.ndarray:
        """Positions of (Re, Im) of ``w_{k,n}`` for k = 1..K, interleaved."""
        k = np.arange(self.n_users)
        base = 2 * (k * self.n_antennas + n)
        return np.column_stack([base, base + 1]).ravel()

    def user_columns(self, k: int) -> slice:
        start = 2 * k * self.n_antennas
        return slice(start, start + 2 * self.n_antennas)


def lift(w: BeamformerSet, layout: Optional[LiftedLayout] = None) -> np.ndarray:
    """Real vector for ``w``; the epigraph entries are set to the antenna powers."""
    if layout is None:
        layout = LiftedLayout(w.n_users, w.n_antennas)
    if (w.n_users, w.n_antennas) != (layout.n_users, layout.n_antennas):
        raise ValueError("beamformer shape does not match the layout")
    z = np.empty(layout.n_var)
    z[: layout.n_beam] = w.vectors.view(float).ravel()
    z[layout.t_slice] = w.antenna_powers()
    return z


def unlift(z: np.ndarray, layout: LiftedLayout) -> BeamformerSet:
    z = np.asarray(z, dtype=float)
    if z.size != layout.n_var:
        raise ValueError(f"vector has length {z.size}, layout needs {layout.n_var}")
    w = np.ascontiguousarray(z[: layout.n_beam]).view(complex)
    return BeamformerSet(w.reshape(layout.n_users, layout.n_antennas))


@dataclass
class ConeRows:
    """A batch of constraint rows ``G z + s = h`` with their cone blocks."""

    G: np.ndarray
    h: np.ndarray
    blocks: list

    @staticmethod
    def stack(parts) -> "ConeRows":
        parts = list(parts)
        return ConeRows(
            np.vstack([p.G for p in parts]),
            np.concatenate([p.h for p in parts]),
            [b for p in parts for b in p.blocks],
        )


def _complex_row_maps(a: np.ndarray, layout: LiftedLayout, user: int):
    """Rows mapping z to Re(a w_user) and Im(a w_user) for a complex row ``a``."""
    re_row = np.zeros(layout.n_var)
    im_row = np.zeros(layout.n_var)
    cols = layout.user_columns(user)
    block_re = np.empty(2 * layout.n_antennas)
    block_im = np.empty(2 * layout.n_antennas)
    # Re(a w) = ar*wr - ai*wi ; Im(a w) = ar*wi + ai*wr
    block_re[0::2], block_re[1::2] = a.real, -a.imag
    block_im[0::2], block_im[1::2] = a.imag, a.real
    re_row[cols] = block_re
    im_row[cols] = block_im
    return re_row, im_row


def build_sinr_cones(channel: Channel, cfg: SystemConfig, layout: LiftedLayout) -> ConeRows:
    """One cone per user: ``||(h_k^H w_i)_{i != k}, sigma|| <= Re(h_k^H w_k) / sqrt(Gamma_k)``.

    Every row is divided by sigma, which leaves the set unchanged and keeps
    the coefficients near unit scale for physical noise powers.
    """
    channel.check(cfg)
    gamma = cfg.gamma
    if np.any(gamma <= 0):
        raise ValueError("SINR targets must be > 0")
    K = cfg.n_users
    sigma = np.sqrt(cfg.sigma2)
    dim = 2 * K
    G = np.zeros((K * dim, layout.n_var))
    h = np.zeros(K * dim)
    for k in range(K):
        g = channel.entries[k] / sigma
        base = k * dim
        re_kk, _ = _complex_row_maps(g, layout, k)
        G[base] = -re_kk / np.sqrt(gamma[k])
        row = base + 1
        for i in range(K):
            if i == k:
                continue
            re_ki, im_ki = _complex_row_maps(g, layout, i)
            G[row] = -re_ki
            G[row + 1] = -im_ki
            row += 2
        h[base + dim - 1] = 1.0
    return ConeRows(G, h, [SecondOrder(dim)] * K)


def build_power_epigraphs(cfg: SystemConfig, layout: LiftedLayout) -> ConeRows:
    """Caps ``t_n <= P_n^max``, ``sum t_n <= P_t`` and cones ``t_n >= sum_k |w_{k,n}|^2``.

    Each quadratic epigraph enters as ``||(2 u_n, t_n - 1)|| <= t_n + 1``.
    """
    N, K = cfg.n_antennas, cfg.n_users
    nv = layout.n_var
    lin_G = np.zeros((N + 1, nv))
    lin_h = np.empty(N + 1)
    for n in range(N):
        lin_G[n, layout.t_index(n)] = 1.0
    lin_h[:N] = cfg.pmax
    lin_G[N, layout.t_slice] = 1.0
    lin_h[N] = cfg.p_sum_max

    dim = 2 * K + 2
    epi_G = np.zeros((N * dim, nv))
    epi_h = np.zeros(N * dim)
    for n in range(N):
        base = n * dim
        tn = layout.t_index(n)
        epi_G[base, tn] = -1.0
        epi_h[base] = 1.0
        cols = layout.antenna_columns(n)
        epi_G[base + 1 + np.arange(2 * K), cols] = -2.0
        epi_G[base + dim - 1, tn] = -1.0
        epi_h[base + dim - 1] = -1.0
    return ConeRows(
        np.vstack([lin_G, epi_G]),
        np.concatenate([lin_h, epi_h]),
        [NonNeg(N + 1)] + [SecondOrder(dim)] * N,
    )


def _assemble(channel, cfg, layout, t_weights) -> ConeProblem:
    rows = ConeRows.stack([build_power_epigraphs(cfg, layout), build_sinr_cones(channel, cfg, layout)])
    c = np.zeros(layout.n_var)
    c[layout.t_slice] = t_weights
    return ConeProblem(c=c, G=rows.G, h=rows.h, cones=ConeSpec(rows.blocks))


def build_init_problem(channel: Channel, cfg: SystemConfig) -> ConeProblem:
    """Minimum sum-power beamforming under all constraints.

    Optimal means the original problem is feasible and gives the starting
    point; PrimalInfeasible certifies that no beamformer meets the targets.
    """
    layout = LiftedLayout.for_config(cfg)
    return _assemble(channel, cfg, layout, np.ones(cfg.n_antennas))


@dataclass(frozen=True)
class SubproblemCoefficients:
    """Objective ``sum_n (pa_slope_n + rf_slope_n) t_n + offset``."""

    pa_slope: np.ndarray
    rf_slope: np.ndarray
    offset: float

    @property
    def weights(self) -> np.ndarray:
        return self.pa_slope + self.rf_slope

    def value(self, t: np.ndarray) -> float:
        return float(self.weights @ np.asarray(t, dtype=float) + self.offset)


def subproblem_coefficients(cfg: SystemConfig, anchor: BeamformerSet,
                            include_rf: bool = True) -> SubproblemCoefficients:
    tbar = anchor.antenna_powers()
    pa_slope, pa_off = pa_slopes(tbar, cfg)
    if include_rf:
        rf_slope, rf_off = rf_slopes(tbar, cfg)
    else:
        rf_slope, rf_off = np.zeros(cfg.n_antennas), 0.0
    return SubproblemCoefficients(pa_slope, rf_slope, pa_off + rf_off)


def build_sca_subproblem(channel: Channel, cfg: SystemConfig, anchor: BeamformerSet,
                         include_rf: bool = True) -> ConeProblem:
    """Convex surrogate problem at ``anchor``.

    The solver objective omits the surrogate's constant term; add
    ``subproblem_coefficients(...).offset`` to recover the surrogate value.
    """
    layout = LiftedLayout.for_config(cfg)
    coef = subproblem_coefficients(cfg, anchor, include_rf)
    return _assemble(channel, cfg, layout, coef.weights)


@dataclass(frozen=True)
class LiftedSolution:
    status: Status
    w: Optional[BeamformerSet]
    t: Optional[np.ndarray]
    solution: ConeSolution


def solve_lifted(problem: ConeProblem, layout: LiftedLayout, tol: float = DEFAULT_TOL) -> LiftedSolution:
    sol = solve_socp(problem, tol=tol)
    if sol.status != Status.OPTIMAL:
        return LiftedSolution(sol.status, None, None, sol)
    return LiftedSolution(sol.status, unlift(sol.x, layout), sol.x[layout.t_slice].copy(), sol)
