"""Sublinear core power law and chip-level power aggregates.

Core power grows as a power of core area, ``p_r = p_full * (r / R) ** alpha``.
With ``alpha < 1`` many small cores burn more total power than a few large
ones occupying the same area.
"""

from dataclasses import dataclass

# performance ~ area**0.5 and power ~ performance**1.75 give power ~ area**0.875
PERF_EXPONENT = 0.5
POWER_PERF_EXPONENT = 1.75
DEFAULT_ALPHA = PERF_EXPONENT * POWER_PERF_EXPONENT

DEFAULT_ALPHAS = (0.75, 0.875, 1.0)


class DomainError(ValueError):
    """A parameter lies outside the domain of a model function."""


@dataclass(frozen=True)
class PowerLawParams:
    p_full: float = 25.0
    budget: int = 256
    alpha: float = DEFAULT_ALPHA
    chip_area: float = 28.0  # mm^2

    def __post_init__(self):
        if not self.p_full > 0:
            raise DomainError(f"p_full must be > 0, got {self.p_full!r}")
        if int(self.budget) != self.budget or self.budget < 1:
            raise DomainError(f"budget must be an integer >= 1, got {self.budget!r}")
        if not 0 < self.alpha <= 1:
            raise DomainError(f"alpha must be in (0, 1], got {self.alpha!r}")
        if not self.chip_area > 0:
            raise DomainError(f"chip_area must be > 0, got {self.chip_area!r}")


@dataclass(frozen=True)
class IdleModel:
    k_idle: float = 0.2

    def __post_init__(self):
        if not 0 <= self.k_idle <= 1:
            raise DomainError(f"k_idle must be in [0, 1], got {self.k_idle!r}")


def _check_size(r, params):
    if not 1 <= r <= params.budget:
        raise DomainError(f"core size r={r!r} outside [1, {params.budget}]")


def _check_divisor(r, params):
    _check_size(r, params)
    if int(r) != r or params.budget % int(r) != 0:
        raise DomainError(f"core size r={r!r} does not divide budget {params.budget}")


def core_power(r, params=PowerLawParams()):
    """Dynamic power in watts of one active core of ``r`` BCE."""
    _check_size(r, params)
    return params.p_full * (r / params.budget) ** params.alpha


def idle_power(r, params=PowerLawParams(), idle=IdleModel()):
    return idle.k_idle * core_power(r, params)


def chip_power_symmetric(r, params=PowerLawParams()):
    """Total power of ``budget / r`` identical cores, all active."""
    _check_divisor(r, params)
    return (params.budget // int(r)) * core_power(r, params)


def chip_power_asymmetric(r, params=PowerLawParams()):
    """One ``r``-BCE core plus ``budget - r`` unit cores, all active."""
    _check_size(r, params)
    return core_power(r, params) + (params.budget - r) * core_power(1, params)


def valid_core_sizes(budget=256):
    """Powers of two dividing ``budget``, ascending."""
    sizes = []
    r = 1
    while r <= budget:
        if budget % r == 0:
            sizes.append(r)
        r *= 2
    return sizes
