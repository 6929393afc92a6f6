"""Mean and standard-error series from a trial CSV, ready for external plotting."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np

from .records import TrialRecord

# per-trial quantities summarised at every series point
METRICS = ("total_w", "pa_w", "rf_w", "tx_w", "active_antennas", "tx_per_active_w")

SERIES_FIELDS = ("scheme", "value", "n_trials", "n_solved", "n_infeasible") + tuple(
    f"{m}_{stat}" for m in METRICS for stat in ("mean", "stderr")
)


def _metric(r: TrialRecord, name: str) -> float:
    if name == "tx_per_active_w":
        return r.tx_w / r.active_antennas if r.active_antennas else math.nan
    return float(getattr(r, name))


def mean_stderr(values) -> tuple:
    """Sample mean and standard error (NaN entries dropped; stderr NaN below two samples)."""
    x = np.asarray([v for v in values if not math.isnan(v)], dtype=float)
    if x.size == 0:
        return math.nan, math.nan
    if x.size == 1:
        return float(x[0]), math.nan
    return float(x.mean()), float(x.std(ddof=1) / math.sqrt(x.size))


@dataclass(frozen=True)
class SeriesPoint:
    scheme: str
    value: object
    n_trials: int
    n_solved: int
    n_infeasible: int
    stats: dict

    def row(self) -> list:
        cells = [self.scheme, "" if self.value is None else repr(self.value),
                 self.n_trials, self.n_solved, self.n_infeasible]
        for m in METRICS:
            mean, se = self.stats[m]
            cells += [repr(mean), repr(se)]
        return cells


def aggregate(records: Iterable[TrialRecord]) -> list:
    """One point per (scheme, sweep value) in first-appearance order; only solved trials enter the statistics."""
    groups: dict = {}
    for r in records:
        groups.setdefault((r.scheme, r.value), []).append(r)
    points = []
    for (scheme, value), recs in groups.items():
        solved = [r for r in recs if r.solved]
        stats = {m: mean_stderr([_metric(r, m) for r in solved]) for m in METRICS}
        points.append(SeriesPoint(
            scheme=scheme, value=value, n_trials=len(recs), n_solved=len(solved),
            n_infeasible=sum(r.status == "infeasible" for r in recs), stats=stats,
        ))
    points.sort(key=lambda p: p.scheme)
    return points


def write_series(points, path) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SERIES_FIELDS)
        for p in points:
            w.writerow(p.row())
