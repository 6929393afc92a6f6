"""Trial records and their CSV form.

The CSV is UTF-8 with a fixed header in ``CSV_FIELDS`` order, '.' as the
decimal separator and ``repr`` floats, so every value round-trips exactly.
Empty cells mean "not available" (power columns of unsolved trials, the
sweep value of an unswept experiment).  Wall time is not part of the
file: it would break byte-for-byte reproducibility.  ``write_timing``
stores it separately.
"""

from __future__ import annotations

import csv
import dataclasses
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional

SOLVED = "solved"
DEGRADED = "degraded"
INFEASIBLE = "infeasible"
FAILED = "failed"
STATUSES = (SOLVED, DEGRADED, INFEASIBLE, FAILED)


@dataclass(frozen=True)
class TrialRecord:
    """One (sweep value, trial, scheme) result.

    ``value`` is the sweep value (None when nothing is swept), ``seed`` the
    experiment's base seed.  Powers are in W and present iff ``status`` is
    solved or degraded; ``tx_w`` is the radiated power sum.
    """

    value: Optional[float]
    trial: int
    seed: int
    scheme: str
    n_antennas: int
    n_users: int
    sinr_db: float
    beta: float
    epsilon: float
    status: str
    total_w: Optional[float] = None
    pa_w: Optional[float] = None
    rf_w: Optional[float] = None
    static_w: Optional[float] = None
    tx_w: Optional[float] = None
    active_antennas: Optional[int] = None
    sca_iterations: Optional[int] = None
    candidates: Optional[int] = None
    wall_time_ms: float = field(default=math.nan, compare=False)

    def __post_init__(self):
        if self.status not in STATUSES:
            raise ValueError(f"status must be one of {STATUSES}, got {self.status!r}")
        powers = (self.total_w, self.pa_w, self.rf_w, self.static_w, self.tx_w)
        solved = self.status in (SOLVED, DEGRADED)
        if solved and any(p is None for p in powers):
            raise ValueError("solved records need all power fields")
        if not solved and any(p is not None for p in powers):
            raise ValueError(f"{self.status} records carry no power fields")
        if solved:
            parts = self.pa_w + self.rf_w + self.static_w
            if abs(self.total_w - parts) > 1e-9 * max(1.0, abs(parts)):
                raise ValueError("total_w must equal pa_w + rf_w + static_w")

    @property
    def solved(self) -> bool:
        return self.status in (SOLVED, DEGRADED)


_FIELDS = [f for f in dataclasses.fields(TrialRecord)]
CSV_FIELDS = tuple(f.name for f in _FIELDS if f.name != "wall_time_ms")
_INT_FIELDS = {"trial", "seed", "n_antennas", "n_users", "active_antennas", "sca_iterations",
               "candidates"}
_STR_FIELDS = {"scheme", "status"}


def _format(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _parse(name: str, text: str):
    if text == "":
        return None
    if name in _STR_FIELDS:
        return text
    if name in _INT_FIELDS:
        return int(text)
    return float(text)


def write_csv(records: Iterable[TrialRecord], path) -> None:
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_FIELDS)
        for r in records:
            w.writerow([_format(getattr(r, name)) for name in CSV_FIELDS])


def read_csv(path) -> list:
    path = Path(path)
    with path.open("r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(header) != CSV_FIELDS:
            raise ValueError(f"{path}: unexpected header {header}")
        out = []
        for line_no, row in enumerate(reader, start=2):
            if len(row) != len(CSV_FIELDS):
                raise ValueError(f"{path}:{line_no}: expected {len(CSV_FIELDS)} cells, got {len(row)}")
            out.append(TrialRecord(**{k: _parse(k, v) for k, v in zip(CSV_FIELDS, row)}))
    return out


def write_timing(records: Iterable[TrialRecord], path) -> None:
    """Wall times keyed by (value, trial, scheme)."""
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("value", "trial", "scheme", "wall_time_ms"))
        for r in records:
            w.writerow((_format(r.value), r.trial, r.scheme, _format(float(r.wall_time_ms))))
