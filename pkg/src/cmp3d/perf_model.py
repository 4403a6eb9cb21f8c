"""Pollack-rule core performance, phase durations and Amdahl speedup."""

import math
from dataclasses import dataclass

from .power_model import PERF_EXPONENT, DomainError


@dataclass(frozen=True)
class WorkloadSpec:
    f: float = 1.0
    t_base: float = 1.0  # sequential runtime on one 1-BCE core, seconds

    def __post_init__(self):
        if not 0 <= self.f <= 1:
            raise DomainError(f"parallel fraction f must be in [0, 1], got {self.f!r}")
        if not self.t_base > 0:
            raise DomainError(f"t_base must be > 0, got {self.t_base!r}")


@dataclass(frozen=True)
class PhasePlan:
    serial_duration: float
    parallel_duration: float
    n_cores_total: int
    r: float


def perf(r, exponent=PERF_EXPONENT):
    if r < 1:
        raise DomainError(f"core size r={r!r} must be >= 1")
    if exponent == 0.5:
        return math.sqrt(r)
    return r ** exponent


def phase_plan(workload, r, n_cores_total, exponent=PERF_EXPONENT):
    """Serial phase runs on one core, parallel phase on all ``n_cores_total``."""
    if n_cores_total < 1:
        raise DomainError(f"n_cores_total must be >= 1, got {n_cores_total!r}")
    speed = perf(r, exponent)
    serial = workload.t_base * (1.0 - workload.f) / speed
    parallel = workload.t_base * workload.f / (n_cores_total * speed)
    return PhasePlan(serial, parallel, int(n_cores_total), r)


def speedup(workload, r, n_cores_total, exponent=PERF_EXPONENT):
    plan = phase_plan(workload, r, n_cores_total, exponent)
    return workload.t_base / (plan.serial_duration + plan.parallel_duration)
