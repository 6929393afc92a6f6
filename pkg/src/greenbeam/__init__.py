"""Energy-efficient downlink beamforming with non-linear PA efficiency.

Total base-station power (PA + RF chains + static) is minimised under
per-user SINR floors by sequential convex approximation over second-order
cone subproblems, followed by beamforming-weight antenna switch-off.
"""

from .model import (
    BeamformerSet,
    Channel,
    PowerBreakdown,
    SystemConfig,
    indicator_approx,
    pa_power,
    pa_surrogate,
    rf_power_exact,
    rf_power_smoothed,
    rf_surrogate,
    sinr,
    total_power,
)
from .socp import ConeProblem, ConeSolution, ConeSpec, Status, kkt_residuals, solve_socp
from .sca import Scheme, ScaOptions, ScaTrace, evaluate_scheme, sca_solve
from .antsel import SelectionResult, antenna_weights, exhaustive_select, select_antennas

__version__ = "0.1.0"

__all__ = [
    "BeamformerSet",
    "Channel",
    "ConeProblem",
    "ConeSolution",
    "ConeSpec",
    "PowerBreakdown",
    "ScaOptions",
    "ScaTrace",
    "Scheme",
    "SelectionResult",
    "Status",
    "SystemConfig",
    "antenna_weights",
    "evaluate_scheme",
    "exhaustive_select",
    "indicator_approx",
    "kkt_residuals",
    "pa_power",
    "pa_surrogate",
    "rf_power_exact",
    "rf_power_smoothed",
    "rf_surrogate",
    "sca_solve",
    "select_antennas",
    "sinr",
    "solve_socp",
    "total_power",
]
