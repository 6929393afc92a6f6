"""Experiment configuration files.

Schema (``schema_version: 1``, YAML)::

    schema_version: 1
    system:
      n_antennas: 16
      n_users: 4
      sinr_db: 12                 # or sinr_linear
      p_antenna_max_w: 1.5        # or p_antenna_max_dbm
      p_sum_max_dbm: 46           # or p_sum_max_w
      eta_max: 0.38
      beta: 0.5
      p_rf_w: 0.35                # or p_rf_dbm
      p_static_w: 20              # or p_static_dbm
      noise_psd_dbm_per_hz: -174  # with bandwidth_hz, or sigma2_w / sigma2_dbm
      bandwidth_hz: 2.0e7
      epsilon_w: 1.5e-4           # optional
    channel:
      snr_db: 20                  # pathloss * p_antenna_max / sigma2, or pathloss_scale
    experiment:
      sweep_axis: sinr_db         # sinr_db | n_users | n_antennas | none
      sweep_values: [0, 6, 12, 18]
      trials: 30
      seed: 2024
      schemes: [JointNonlinear, JointFixedPA, BfOnlyNonlinear, BfOnlyFixedPA]
      output: results.csv         # relative to the config file
    sca:                          # optional
      max_iterations: 100
      tol: 1.0e-6
      anneal: false

Unit suffixes mark the boundary conversions: ``_db`` and ``_dbm`` values
are converted to linear scale and watts on parse.  Unknown keys and
conflicting alternatives are errors.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import yaml

from ..model import SystemConfig
from ..sca import ScaOptions, Scheme
from .channels import db_to_linear, dbm_to_watts, noise_power

SCHEMA_VERSION = 1
SWEEP_AXES = ("sinr_db", "n_users", "n_antennas", "none")


class ConfigError(ValueError):
    """Malformed experiment configuration."""


class _Loader(yaml.SafeLoader):
    """SafeLoader that also reads YAML 1.2 floats such as ``2e7``."""


# PyYAML follows YAML 1.1, where an exponent needs a sign and a dot
_Loader.add_implicit_resolver(
    "tag:yaml.org,2002:float",
    re.compile(r"""^(?:[-+]?(?:[0-9][0-9_]*)\.[0-9_]*(?:[eE][-+]?[0-9]+)?
    |[-+]?(?:[0-9][0-9_]*)(?:[eE][-+]?[0-9]+)
    |\.[0-9_]+(?:[eE][-+]?[0-9]+)?
    |[-+]?\.(?:inf|Inf|INF)
    |\.(?:nan|NaN|NAN))$""", re.X),
    list("-+0123456789."),
)


@dataclass(frozen=True)
class ExperimentConfig:
    """One Monte Carlo experiment.

    ``system`` holds the values for every parameter that is not swept;
    ``point(value)`` returns the configuration at one sweep value.
    """

    system: SystemConfig
    sweep_axis: str = "none"
    sweep_values: tuple = (None,)
    trials: int = 1
    seed: int = 0
    schemes: tuple = (Scheme.JOINT_NONLINEAR,)
    pathloss_scale: float = 1.0
    output: Optional[Path] = None
    sca: ScaOptions = field(default_factory=ScaOptions)

    def __post_init__(self):
        if self.sweep_axis not in SWEEP_AXES:
            raise ConfigError(f"sweep_axis must be one of {SWEEP_AXES}, got {self.sweep_axis!r}")
        values = tuple(self.sweep_values)
        if self.sweep_axis == "none":
            if values not in ((), (None,)):
                raise ConfigError("sweep_values given but sweep_axis is none")
            values = (None,)
        else:
            if not values:
                raise ConfigError("sweep_values must not be empty")
            if self.sweep_axis in ("n_users", "n_antennas"):
                if any(int(v) != v or v < 1 for v in values):
                    raise ConfigError(f"{self.sweep_axis} values must be positive integers")
                values = tuple(int(v) for v in values)
            else:
                if any(not math.isfinite(v) for v in values):
                    raise ConfigError("sinr_db values must be finite")
                values = tuple(float(v) for v in values)
            if len(set(values)) != len(values):
                raise ConfigError("sweep_values must be distinct")
        object.__setattr__(self, "sweep_values", values)
        if int(self.trials) != self.trials or self.trials < 1:
            raise ConfigError(f"trials must be an integer >= 1, got {self.trials}")
        if int(self.seed) != self.seed or self.seed < 0:
            raise ConfigError(f"seed must be a non-negative integer, got {self.seed}")
        schemes = tuple(Scheme(s) for s in self.schemes)
        if not schemes or len(set(schemes)) != len(schemes):
            raise ConfigError("schemes must be a non-empty list without repeats")
        object.__setattr__(self, "schemes", schemes)
        if not self.pathloss_scale >= 0:
            raise ConfigError("pathloss_scale must be >= 0")

    def point(self, value) -> SystemConfig:
        """System configuration at one sweep value; ``epsilon`` is kept from the base."""
        base = self.system
        if self.sweep_axis == "none":
            return base
        if self.sweep_axis == "sinr_db":
            return base.with_(sinr_targets=(db_to_linear(value),) * base.n_users)
        targets = tuple(base.gamma)
        if self.sweep_axis == "n_users":
            if len(set(targets)) != 1:
                raise ConfigError("sweeping n_users needs a common SINR target")
            return base.with_(n_users=value, sinr_targets=(targets[0],) * value)
        pmax = base.p_antenna_max
        if not isinstance(pmax, float):
            if len(set(pmax)) != 1:
                raise ConfigError("sweeping n_antennas needs a uniform per-antenna cap")
            pmax = float(pmax[0])
        return base.with_(n_antennas=value, p_antenna_max=pmax)


# -- parsing --------------------------------------------------------------------


def _take(section: dict, name: str, *alternatives, required: bool = True):
    """Pop exactly one of ``alternatives``; returns (key, value) or (None, None)."""
    present = [k for k in alternatives if k in section]
    if len(present) > 1:
        raise ConfigError(f"{name}: give only one of {', '.join(present)}")
    if not present:
        if required:
            raise ConfigError(f"{name}: one of {', '.join(alternatives)} is required")
        return None, None
    key = present[0]
    return key, section.pop(key)


def _number(key, value) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{key} must be a number, got {value!r}")
    return float(value)


def _power(section: dict, name: str, required: bool = True) -> Optional[float]:
    key, value = _take(section, name, f"{name}_w", f"{name}_dbm", required=required)
    if key is None:
        return None
    value = _number(key, value)
    return dbm_to_watts(value) if key.endswith("_dbm") else value


def _section(doc: dict, name: str, required: bool = True) -> dict:
    sec = doc.pop(name, None)
    if sec is None:
        if required:
            raise ConfigError(f"missing section {name!r}")
        return {}
    if not isinstance(sec, dict):
        raise ConfigError(f"section {name!r} must be a mapping")
    return dict(sec)


def _no_leftovers(section: dict, name: str):
    if section:
        raise ConfigError(f"unknown keys in {name}: {', '.join(sorted(map(str, section)))}")


def _system(sec: dict) -> SystemConfig:
    n_antennas = sec.pop("n_antennas", None)
    n_users = sec.pop("n_users", None)
    if n_antennas is None or n_users is None:
        raise ConfigError("system: n_antennas and n_users are required")
    key, sinr = _take(sec, "sinr", "sinr_db", "sinr_linear")
    sinr = [_number(key, v) for v in (sinr if isinstance(sinr, list) else [sinr])]
    if key == "sinr_db":
        sinr = [db_to_linear(v) for v in sinr]
    p_antenna_max = _power(sec, "p_antenna_max")
    p_sum_max = _power(sec, "p_sum_max")
    p_rf = _power(sec, "p_rf")
    p_static = _power(sec, "p_static")
    sigma2 = _power(sec, "sigma2", required=False)
    has_psd = "noise_psd_dbm_per_hz" in sec or "bandwidth_hz" in sec
    if sigma2 is not None and has_psd:
        raise ConfigError("system: give sigma2 or noise_psd_dbm_per_hz/bandwidth_hz, not both")
    if sigma2 is None:
        if not ("noise_psd_dbm_per_hz" in sec and "bandwidth_hz" in sec):
            raise ConfigError("system: sigma2_w/sigma2_dbm or noise_psd_dbm_per_hz with "
                              "bandwidth_hz is required")
        sigma2 = noise_power(_number("noise_psd_dbm_per_hz", sec.pop("noise_psd_dbm_per_hz")),
                             _number("bandwidth_hz", sec.pop("bandwidth_hz")))
    epsilon = _power(sec, "epsilon", required=False)
    try:
        cfg = SystemConfig(
            n_antennas=n_antennas, n_users=n_users, sinr_targets=sinr,
            p_antenna_max=p_antenna_max, p_sum_max=p_sum_max,
            eta_max=_number("eta_max", sec.pop("eta_max", None)),
            beta=_number("beta", sec.pop("beta", None)),
            p_rf=p_rf, p_static=p_static, sigma2=sigma2, epsilon=epsilon,
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"system: {exc}") from exc
    _no_leftovers(sec, "system")
    return cfg


def _pathloss(sec: dict, cfg: SystemConfig) -> float:
    key, value = _take(sec, "channel", "pathloss_scale", "snr_db")
    value = _number(key, value)
    _no_leftovers(sec, "channel")
    if key == "snr_db":
        # single-antenna SNR at the per-antenna cap
        return db_to_linear(value) * cfg.sigma2 / float(max(cfg.pmax))
    return value


def config_from_dict(doc: dict, base_dir: Optional[Path] = None) -> ExperimentConfig:
    """Build an ExperimentConfig from a parsed document; see the module docstring."""
    if not isinstance(doc, dict):
        raise ConfigError("config must be a mapping")
    doc = dict(doc)
    version = doc.pop("schema_version", None)
    if version != SCHEMA_VERSION:
        raise ConfigError(f"schema_version must be {SCHEMA_VERSION}, got {version!r}")
    system = _system(_section(doc, "system"))
    pathloss = _pathloss(_section(doc, "channel"), system)
    exp = _section(doc, "experiment")
    sca = _section(doc, "sca", required=False)
    _no_leftovers(doc, "config")

    output = exp.pop("output", None)
    if output is not None:
        output = Path(output)
        if base_dir is not None and not output.is_absolute():
            output = base_dir / output
    if "scheme" in sca:
        raise ConfigError("sca: the scheme is chosen per run by experiment.schemes")
    try:
        opts = ScaOptions(**sca)
        result = ExperimentConfig(
            system=system,
            sweep_axis=exp.pop("sweep_axis", "none"),
            sweep_values=tuple(exp.pop("sweep_values", ())),
            trials=exp.pop("trials", 1),
            seed=exp.pop("seed", 0),
            schemes=tuple(exp.pop("schemes", (Scheme.JOINT_NONLINEAR.value,))),
            pathloss_scale=pathloss,
            output=output,
            sca=opts,
        )
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    _no_leftovers(exp, "experiment")
    return result


def parse_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        doc = yaml.load(path.read_text(encoding="utf-8"), Loader=_Loader)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return config_from_dict(doc, base_dir=path.parent)
