"""Monte Carlo benchmark harness and command-line interface."""

from .aggregate import aggregate, mean_stderr, write_series
from .channels import CHANNEL_ALGORITHM, gen_channel, noise_power, trial_seed
from .config import ConfigError, ExperimentConfig, config_from_dict, parse_config
from .records import TrialRecord, read_csv, write_csv
from .sweep import run_scheme, run_sweep

__all__ = [
    "CHANNEL_ALGORITHM",
    "ConfigError",
    "ExperimentConfig",
    "TrialRecord",
    "aggregate",
    "config_from_dict",
    "gen_channel",
    "mean_stderr",
    "noise_power",
    "parse_config",
    "read_csv",
    "run_scheme",
    "run_sweep",
    "trial_seed",
    "write_csv",
    "write_series",
]
