"""Closed-form chip temperature for fully parallel (f = 1) workloads.

A single 256-BCE layer is treated as a uniform heat source behind an areal
thermal resistance: ``T = r_th * P / A + T_ambient``.
"""

import csv
import io
from dataclasses import dataclass, field, replace

from .power_model import (
    DomainError,
    PowerLawParams,
    chip_power_asymmetric,
    chip_power_symmetric,
)


@dataclass(frozen=True)
class ThermalEnv:
    r_th: float = 60.0  # mm^2 K / W
    t_ambient: float = 20.0  # degC

    def __post_init__(self):
        if not self.r_th > 0:
            raise DomainError(f"r_th must be > 0, got {self.r_th!r}")
        if self.t_ambient != self.t_ambient or abs(self.t_ambient) == float("inf"):
            raise DomainError(f"t_ambient must be finite, got {self.t_ambient!r}")


@dataclass
class AnalyticCurve:
    alpha: float
    kind: str = "symmetric"
    points: list = field(default_factory=list)  # (r, temp_c)


def temp_symmetric(r, params=PowerLawParams(), env=ThermalEnv()):
    return env.r_th * chip_power_symmetric(r, params) / params.chip_area + env.t_ambient


def temp_asymmetric(r, params=PowerLawParams(), env=ThermalEnv()):
    return env.r_th * chip_power_asymmetric(r, params) / params.chip_area + env.t_ambient


_TEMP_FN = {"symmetric": temp_symmetric, "asymmetric": temp_asymmetric}


def curve_family(kind, alphas, r_values, params=PowerLawParams(), env=ThermalEnv()):
    """One temperature-vs-core-size curve per exponent in ``alphas``."""
    try:
        fn = _TEMP_FN[kind]
    except KeyError:
        raise DomainError(f"kind must be 'symmetric' or 'asymmetric', got {kind!r}") from None
    r_values = list(r_values)
    if any(b <= a for a, b in zip(r_values, r_values[1:])):
        raise DomainError("r_values must be strictly increasing")
    curves = []
    for alpha in alphas:
        p = replace(params, alpha=alpha)
        curves.append(AnalyticCurve(alpha, kind, [(r, fn(r, p, env)) for r in r_values]))
    return curves


def curves_to_csv(curves):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["alpha", "r", "temp_c"])
    for curve in curves:
        for r, t in curve.points:
            writer.writerow([repr(float(curve.alpha)), r, repr(float(t))])
    return buf.getvalue()
