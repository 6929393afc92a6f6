"""Physical data types and closed-form power / SINR formulas.

All quantities are linear scale, powers in watts.  ``t`` below always denotes
the per-antenna transmit power vector, ``t_n = sum_k |w_{k,n}|^2``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional, Sequence, Union

import numpy as np

# Fractions of the per-antenna cap used for the numerical conventions below.
EPSILON_FRACTION = 1e-4
GRADIENT_FLOOR_FRACTION = 1e-8
ON_THRESHOLD_FRACTION = 1e-6


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class SystemConfig:
    """Physical parameters of one base station and its users.

    Parameters
    ----------
    n_antennas : int
        Number of transmit antennas N (the figures of the original study
        call it M).
    n_users : int
        Number of single-antenna users K.
    sinr_targets : sequence of float
        Linear SINR floor per user.  A scalar is broadcast to all users.
    p_antenna_max : float or sequence of float
        Per-antenna maximum output power in W.  A scalar applies to all
        antennas.
    p_sum_max : float
        Sum transmit power cap in W.
    eta_max : float
        Peak PA efficiency in (0, 1].
    beta : float
        PA efficiency exponent in [0, 1]; 0 is the fixed-efficiency model,
        0.5 a class-B amplifier.
    p_rf : float
        Power of one active RF chain in W.
    p_static : float
        Static power in W.
    sigma2 : float
        Receiver noise power in W.
    epsilon : float, optional
        Indicator smoothing parameter in W.  Defaults to
        ``1e-4 * max(p_antenna_max)``.
    """

    n_antennas: int
    n_users: int
    sinr_targets: tuple
    p_antenna_max: Union[float, tuple]
    p_sum_max: float
    eta_max: float
    beta: float
    p_rf: float
    p_static: float
    sigma2: float
    epsilon: Optional[float] = None

    def __post_init__(self):
        if int(self.n_antennas) != self.n_antennas or self.n_antennas < 1:
            raise ValueError(f"n_antennas must be a positive integer, got {self.n_antennas}")
        if int(self.n_users) != self.n_users or self.n_users < 1:
            raise ValueError(f"n_users must be a positive integer, got {self.n_users}")
        object.__setattr__(self, "n_antennas", int(self.n_antennas))
        object.__setattr__(self, "n_users", int(self.n_users))

        targets = np.atleast_1d(np.asarray(self.sinr_targets, dtype=float))
        if targets.size == 1:
            targets = np.full(self.n_users, targets[0])
        if targets.shape != (self.n_users,):
            raise ValueError("sinr_targets must have one entry per user")
        if not np.all(np.isfinite(targets)) or np.any(targets <= 0):
            raise ValueError("sinr_targets must be finite and > 0")
        object.__setattr__(self, "sinr_targets", tuple(float(g) for g in targets))

        pmax = np.atleast_1d(np.asarray(self.p_antenna_max, dtype=float))
        if pmax.size not in (1, self.n_antennas):
            raise ValueError("p_antenna_max must be a scalar or have one entry per antenna")
        if not np.all(np.isfinite(pmax)) or np.any(pmax <= 0):
            raise ValueError("p_antenna_max must be finite and > 0")
        object.__setattr__(
            self,
            "p_antenna_max",
            float(pmax[0]) if pmax.size == 1 else tuple(float(p) for p in pmax),
        )

        for name in ("p_sum_max", "p_rf", "p_static"):
            v = float(getattr(self, name))
            if not np.isfinite(v) or v < 0:
                raise ValueError(f"{name} must be finite and >= 0, got {v}")
            object.__setattr__(self, name, v)
        if not 0 < self.eta_max <= 1:
            raise ValueError(f"eta_max must lie in (0, 1], got {self.eta_max}")
        if not 0 <= self.beta <= 1:
            raise ValueError(f"beta must lie in [0, 1], got {self.beta}")
        if not np.isfinite(self.sigma2) or self.sigma2 <= 0:
            raise ValueError(f"sigma2 must be > 0, got {self.sigma2}")
        object.__setattr__(self, "eta_max", float(self.eta_max))
        object.__setattr__(self, "beta", float(self.beta))
        object.__setattr__(self, "sigma2", float(self.sigma2))
        if self.epsilon is None:
            object.__setattr__(self, "epsilon", EPSILON_FRACTION * float(self.pmax.max()))
        elif not np.isfinite(self.epsilon) or self.epsilon <= 0:
            raise ValueError(f"epsilon must be > 0, got {self.epsilon}")
        else:
            object.__setattr__(self, "epsilon", float(self.epsilon))

    @property
    def pmax(self) -> np.ndarray:
        """Per-antenna power caps as a length-N array."""
        return np.broadcast_to(np.asarray(self.p_antenna_max, dtype=float), (self.n_antennas,)).copy()

    @property
    def gamma(self) -> np.ndarray:
        return np.asarray(self.sinr_targets, dtype=float)

    @property
    def gradient_floor(self) -> np.ndarray:
        return GRADIENT_FLOOR_FRACTION * self.pmax

    @property
    def on_threshold(self) -> np.ndarray:
        return ON_THRESHOLD_FRACTION * self.pmax

    def with_(self, **changes) -> "SystemConfig":
        """Copy with some fields replaced (validation re-runs)."""
        return replace(self, **changes)

    def restrict(self, active: Sequence[int]) -> "SystemConfig":
        """Configuration for the sub-array made of the ``active`` antennas.

        The smoothing parameter is kept as is so the restricted problem uses
        the same indicator approximation as the full array.
        """
        active = list(active)
        pmax = self.p_antenna_max
        if isinstance(pmax, tuple):
            pmax = tuple(pmax[n] for n in active)
        return replace(self, n_antennas=len(active), p_antenna_max=pmax, epsilon=self.epsilon)


@dataclass(frozen=True)
class Channel:
    """K x N complex channel; row k is ``h_k^H``."""

    entries: np.ndarray

    def __post_init__(self):
        h = np.array(self.entries, dtype=complex, copy=True)
        if h.ndim != 2:
            raise ValueError("channel must be a K x N matrix")
        if not np.all(np.isfinite(h)):
            raise ValueError("channel entries must be finite")
        object.__setattr__(self, "entries", _readonly(h))

    @property
    def n_users(self) -> int:
        return self.entries.shape[0]

    @property
    def n_antennas(self) -> int:
        return self.entries.shape[1]

    def restrict(self, active: Sequence[int]) -> "Channel":
        return Channel(self.entries[:, list(active)])

    def check(self, cfg: SystemConfig) -> None:
        if self.entries.shape != (cfg.n_users, cfg.n_antennas):
            raise ValueError(
                f"channel is {self.entries.shape}, config expects "
                f"({cfg.n_users}, {cfg.n_antennas})"
            )


@dataclass(frozen=True)
class BeamformerSet:
    """The K beamforming vectors, stored as a K x N matrix (row k is w_k)."""

    vectors: np.ndarray

    def __post_init__(self):
        w = np.array(self.vectors, dtype=complex, copy=True)
        if w.ndim != 2:
            raise ValueError("beamformers must be a K x N matrix")
        if not np.all(np.isfinite(w)):
            raise ValueError("beamformer entries must be finite")
        object.__setattr__(self, "vectors", _readonly(w))

    @classmethod
    def zeros(cls, n_users: int, n_antennas: int) -> "BeamformerSet":
        return cls(np.zeros((n_users, n_antennas), dtype=complex))

    @property
    def n_users(self) -> int:
        return self.vectors.shape[0]

    @property
    def n_antennas(self) -> int:
        return self.vectors.shape[1]

    def antenna_powers(self) -> np.ndarray:
        """Output power of every antenna, ``sum_k |w_{k,n}|^2``."""
        w = self.vectors
        return np.sum(w.real ** 2 + w.imag ** 2, axis=0)

    def per_antenna_power(self, n: int) -> float:
        return float(self.antenna_powers()[n])

    def sum_power(self) -> float:
        return float(self.antenna_powers().sum())

    def embed(self, active: Sequence[int], n_antennas: int) -> "BeamformerSet":
        """Scatter a sub-array beamformer back into an ``n_antennas`` array."""
        full = np.zeros((self.n_users, n_antennas), dtype=complex)
        full[:, list(active)] = self.vectors
        return BeamformerSet(full)


@dataclass(frozen=True)
class PowerBreakdown:
    pa: float
    rf: float
    static: float
    total: float = field(init=False)

    def __post_init__(self):
        for name in ("pa", "rf", "static"):
            v = float(getattr(self, name))
            if v < 0 or not np.isfinite(v):
                raise ValueError(f"{name} power must be finite and >= 0, got {v}")
            object.__setattr__(self, name, v)
        object.__setattr__(self, "total", self.pa + self.rf + self.static)


# -- SINR -------------------------------------------------------------------


def _check_dims(channel: Channel, w: BeamformerSet) -> None:
    if channel.entries.shape != w.vectors.shape:
        raise ValueError(
            f"channel {channel.entries.shape} and beamformers {w.vectors.shape} disagree"
        )


def sinr_all(channel: Channel, w: BeamformerSet, sigma2: float) -> np.ndarray:
    """SINR of every user at once."""
    _check_dims(channel, w)
    # gains[k, i] = |h_k^H w_i|^2
    gains = np.abs(channel.entries @ w.vectors.T) ** 2
    signal = np.diag(gains)
    interference = gains.sum(axis=1) - signal
    return signal / (interference + sigma2)


def sinr(channel: Channel, w: BeamformerSet, k: int, sigma2: float) -> float:
    _check_dims(channel, w)
    if not 0 <= k < channel.n_users:
        raise IndexError(f"user index {k} out of range for {channel.n_users} users")
    if not np.isfinite(sigma2) or sigma2 <= 0:
        raise ValueError("sigma2 must be finite and > 0")
    h = channel.entries[k]
    signal = abs(h @ w.vectors[k]) ** 2
    interference = sum(abs(h @ w.vectors[i]) ** 2 for i in range(w.n_users) if i != k)
    return float(signal / (interference + sigma2))


# -- PA power -----------------------------------------------------------------


def pa_power_of(t: np.ndarray, cfg: SystemConfig) -> float:
    """PA consumption for the antenna power vector ``t``.

    An antenna with zero output draws nothing, for every ``beta``.
    """
    t = np.asarray(t, dtype=float)
    on = t > 0
    terms = np.zeros_like(t)
    pmax = cfg.pmax
    terms[on] = pmax[on] ** cfg.beta * t[on] ** (1.0 - cfg.beta)
    return float(terms.sum() / cfg.eta_max)


def pa_power(w: BeamformerSet, cfg: SystemConfig) -> float:
    return pa_power_of(w.antenna_powers(), cfg)


def pa_slopes(anchor_t: np.ndarray, cfg: SystemConfig) -> tuple:
    """Linearisation of the PA power around the anchor powers.

    Returns ``(slope, offset)`` such that the surrogate is
    ``slope @ t + offset``.  Only the slope sees the gradient floor, so
    the surrogate is tangent at every anchor.  It upper-bounds the concave
    PA power exactly for anchors at or above the floor, and up to
    ``beta * coef * floor**(1 - beta)`` per antenna below it.
    """
    tbar = np.asarray(anchor_t, dtype=float)
    coef = cfg.pmax ** cfg.beta / cfg.eta_max
    slope = (1.0 - cfg.beta) * coef * np.maximum(tbar, cfg.gradient_floor) ** (-cfg.beta)
    offset = pa_power_of(tbar, cfg) - float(slope @ tbar)
    return slope, offset


def pa_surrogate_of(t: np.ndarray, anchor_t: np.ndarray, cfg: SystemConfig) -> float:
    slope, offset = pa_slopes(anchor_t, cfg)
    return float(slope @ np.asarray(t, dtype=float) + offset)


def pa_surrogate(w: BeamformerSet, anchor: BeamformerSet, cfg: SystemConfig) -> float:
    return pa_surrogate_of(w.antenna_powers(), anchor.antenna_powers(), cfg)


# -- RF chain power -----------------------------------------------------------


def indicator_approx(x, eps: float):
    """Smooth stand-in for the on/off indicator: log(1 + x/eps) / log(1 + 1/eps).

    Works element-wise on arrays; a scalar in gives a float out.
    """
    if eps <= 0:
        raise ValueError("eps must be > 0")
    xa = np.asarray(x, dtype=float)
    if np.any(xa < 0):
        raise ValueError("indicator_approx is defined for x >= 0 only")
    out = np.log1p(xa / eps) / np.log1p(1.0 / eps)
    return float(out) if out.ndim == 0 else out


def rf_power_exact(w: BeamformerSet, cfg: SystemConfig, on_threshold=None) -> float:
    """RF-chain power counting antennas whose output exceeds ``on_threshold``."""
    if on_threshold is None:
        on_threshold = cfg.on_threshold
    if np.any(np.asarray(on_threshold) < 0):
        raise ValueError("on_threshold must be >= 0")
    return cfg.p_rf * int(np.count_nonzero(w.antenna_powers() > on_threshold))


def rf_power_smoothed_of(t: np.ndarray, cfg: SystemConfig) -> float:
    return float(cfg.p_rf * np.sum(indicator_approx(np.asarray(t, dtype=float), cfg.epsilon)))


def rf_power_smoothed(w: BeamformerSet, cfg: SystemConfig) -> float:
    return rf_power_smoothed_of(w.antenna_powers(), cfg)


def rf_slopes(anchor_t: np.ndarray, cfg: SystemConfig) -> tuple:
    """Linearisation of the smoothed RF power around the anchor powers."""
    tbar = np.asarray(anchor_t, dtype=float)
    eps = cfg.epsilon
    scale = cfg.p_rf / np.log1p(1.0 / eps)
    slope = scale / (tbar + eps)
    offset = float(np.sum(scale * np.log1p(tbar / eps) - slope * tbar))
    return slope, offset


def rf_surrogate_of(t: np.ndarray, anchor_t: np.ndarray, cfg: SystemConfig) -> float:
    slope, offset = rf_slopes(anchor_t, cfg)
    return float(slope @ np.asarray(t, dtype=float) + offset)


def rf_surrogate(w: BeamformerSet, anchor: BeamformerSet, cfg: SystemConfig) -> float:
    return rf_surrogate_of(w.antenna_powers(), anchor.antenna_powers(), cfg)


# -- totals -------------------------------------------------------------------


def total_power(w: BeamformerSet, cfg: SystemConfig, on_threshold=None) -> PowerBreakdown:
    return PowerBreakdown(
        pa=pa_power(w, cfg),
        rf=rf_power_exact(w, cfg, on_threshold),
        static=cfg.p_static,
    )


def feasibility_violation(channel: Channel, w: BeamformerSet, cfg: SystemConfig) -> dict:
    """Worst violation of each constraint family (<= 0 means satisfied).

    SINR violation is the absolute shortfall below the target, power
    violations are in W.
    """
    s = sinr_all(channel, w, cfg.sigma2)
    t = w.antenna_powers()
    return {
        "sinr": float(np.max(cfg.gamma - s)),
        "antenna": float(np.max(t - cfg.pmax)),
        "sum": float(t.sum() - cfg.p_sum_max),
    }


def is_feasible(channel: Channel, w: BeamformerSet, cfg: SystemConfig,
                sinr_slack: float = 1e-6, power_slack: float = 1e-8) -> bool:
    v = feasibility_violation(channel, w, cfg)
    return v["sinr"] <= sinr_slack and v["antenna"] <= power_slack and v["sum"] <= power_slack
