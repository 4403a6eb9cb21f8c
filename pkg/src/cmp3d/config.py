"""Design-point configuration and its flat ``key=value`` file format."""

import dataclasses
from dataclasses import dataclass, fields

from .perf_model import WorkloadSpec
from .power_model import DomainError, IdleModel, PowerLawParams, PERF_EXPONENT

TOPOLOGIES = ("symmetric", "asymmetric")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class CmpConfig:
    topology: str = "symmetric"
    r: int = 16
    cmp_layers: int = 4
    dram_layers: int = 1
    f: float = 1.0
    k_idle: float = 0.2
    alpha: float = 0.875
    p_full: float = 25.0
    budget: int = 256
    chip_area: float = 28.0  # mm^2, per layer
    dram_power: float = 0.0  # W, per dram layer
    temp_limit_dram: float = 95.0
    temp_limit_package: float = 125.0
    ambient: float = 20.0
    r_th: float = 60.0  # mm^2 K/W, analytic model only
    t_base: float = 20.0  # s
    perf_exponent: float = PERF_EXPONENT
    resolution: int = 64
    sample_interval: float = 3.333e-4  # s

    def __post_init__(self):
        if self.topology not in TOPOLOGIES:
            raise ConfigError(f"topology must be one of {TOPOLOGIES}, got {self.topology!r}")
        for name in ("cmp_layers", "budget", "resolution"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1, got {getattr(self, name)!r}")
        if self.dram_layers < 0:
            raise ConfigError(f"dram_layers must be >= 0, got {self.dram_layers!r}")
        if self.dram_power < 0:
            raise ConfigError(f"dram_power must be >= 0, got {self.dram_power!r}")
        if not self.sample_interval > 0:
            raise ConfigError(f"sample_interval must be > 0, got {self.sample_interval!r}")
        if not 1 <= self.r <= self.budget:
            raise ConfigError(f"core size r={self.r!r} outside [1, {self.budget}]")
        if self.topology == "symmetric" and self.budget % self.r:
            raise ConfigError(f"core size r={self.r!r} does not divide budget {self.budget}")
        for name in ("temp_limit_dram", "temp_limit_package"):
            if not getattr(self, name) > self.ambient:
                raise ConfigError(f"{name} must exceed ambient {self.ambient}")
        try:
            self.power_params()
            self.idle_model()
            self.workload()
        except DomainError as exc:
            raise ConfigError(str(exc)) from None

    def power_params(self):
        return PowerLawParams(self.p_full, self.budget, self.alpha, self.chip_area)

    def idle_model(self):
        return IdleModel(self.k_idle)

    def workload(self):
        return WorkloadSpec(self.f, self.t_base)

    @property
    def side(self):
        """Layer edge length in meters."""
        return (self.chip_area * 1e-6) ** 0.5

    @property
    def cores_per_layer(self):
        if self.topology == "symmetric":
            return self.budget // self.r
        return self.budget - self.r + 1

    @property
    def n_cores_total(self):
        return self.cmp_layers * self.cores_per_layer

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)


_FIELD_TYPES = {f.name: f.type for f in fields(CmpConfig)}


def _coerce(key, text):
    kind = _FIELD_TYPES[key]
    if kind in (int, "int"):
        value = float(text)
        if value != int(value):
            raise ConfigError(f"{key} must be an integer, got {text!r}")
        return int(value)
    if kind in (float, "float"):
        return float(text)
    return text


def apply_overrides(config, pairs):
    """Apply ``key=value`` strings on top of ``config``."""
    changes = {}
    for pair in pairs:
        if "=" not in pair:
            raise ConfigError(f"expected key=value, got {pair!r}")
        key, value = (s.strip() for s in pair.split("=", 1))
        if key not in _FIELD_TYPES:
            raise ConfigError(f"unknown config key {key!r}")
        try:
            changes[key] = _coerce(key, value)
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(f"bad value for {key}: {value!r}") from exc
    return config.replace(**changes) if changes else config


def parse_config_text(text):
    pairs = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {raw!r}")
        pairs.append(line)
    return apply_overrides(CmpConfig(), pairs)


def parse_config(path):
    with open(path) as fh:
        return parse_config_text(fh.read())


def config_echo(config):
    """Fully resolved config in the same ``key=value`` format."""
    return "".join(f"{f.name}={getattr(config, f.name)!r}\n".replace("'", "")
                   for f in fields(config))
