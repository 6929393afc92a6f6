"""Seeded Rayleigh channels and noise power.

Channel generator (version 1)
-----------------------------
Column ``n`` of the K x N matrix is drawn from its own PCG64 stream seeded
by ``numpy.random.SeedSequence(entropy=seed, spawn_key=(n,))``.  The stream
yields ``standard_normal((K, 2))``; row k becomes
``sqrt(scale / 2) * (re + 1j * im)``.  Because each antenna and each user
prefix is drawn independently of the array size, the channel for (K, N) is
the top-left block of the channel for any larger (K', N') with the same
seed, which gives common random numbers across antenna and user sweeps.
"""

from __future__ import annotations

from typing import Sequence, Union

import numpy as np

from ..model import Channel

CHANNEL_ALGORITHM = "pcg64-seedseq-column-v1"

Seed = Union[int, Sequence[int]]


def trial_seed(base_seed: int, trial: int) -> tuple:
    """Entropy of one Monte Carlo trial; the sweep value is deliberately left out."""
    if base_seed < 0 or trial < 0:
        raise ValueError("seeds and trial indices must be non-negative")
    return (int(base_seed), int(trial))


def gen_channel(seed: Seed, n_users: int, n_antennas: int, pathloss_scale: float = 1.0) -> Channel:
    """K x N i.i.d. CN(0, pathloss_scale) channel fully determined by ``seed``."""
    if n_users < 1 or n_antennas < 1:
        raise ValueError("n_users and n_antennas must be >= 1")
    if not pathloss_scale >= 0:
        raise ValueError(f"pathloss_scale must be >= 0, got {pathloss_scale}")
    entropy = [int(seed)] if np.isscalar(seed) else [int(s) for s in seed]
    H = np.empty((n_users, n_antennas), dtype=complex)
    amp = np.sqrt(pathloss_scale / 2.0)
    for n in range(n_antennas):
        ss = np.random.SeedSequence(entropy=entropy, spawn_key=(n,))
        g = np.random.Generator(np.random.PCG64(ss)).standard_normal((n_users, 2))
        H[:, n] = amp * (g[:, 0] + 1j * g[:, 1])
    return Channel(H)


def noise_power(psd_dbm_per_hz: float, bandwidth_hz: float) -> float:
    """Thermal noise power in W from a PSD in dBm/Hz and a bandwidth in Hz."""
    if not bandwidth_hz > 0:
        raise ValueError(f"bandwidth must be > 0, got {bandwidth_hz}")
    return 10.0 ** ((psd_dbm_per_hz + 10.0 * np.log10(bandwidth_hz) - 30.0) / 10.0)


def dbm_to_watts(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)
