"""Thermal scalability of 3D chip multiprocessors.

Power-law core power, closed-form chip temperature, Pollack/Amdahl
performance, stacked floorplans and power traces, and a compact grid
thermal solver for the die stack and its package.
"""

from .analytic_model import ThermalEnv, curve_family, temp_asymmetric, temp_symmetric
from .config import CmpConfig, ConfigError, parse_config
from .perf_model import WorkloadSpec, perf, phase_plan, speedup
from .power_model import (
    DomainError,
    IdleModel,
    PowerLawParams,
    chip_power_asymmetric,
    chip_power_symmetric,
    core_power,
    idle_power,
)

__version__ = "0.1.0"
