"""Two-phase (serial, parallel) per-block power traces and HotSpot ``.ptrace`` I/O."""

import math
from dataclasses import dataclass, field

from .floorplan import flat_name
from .perf_model import phase_plan
from .power_model import core_power, idle_power


class TraceConsistencyError(ValueError):
    """Floorplan and configuration (or trace) disagree."""


@dataclass
class PowerPhase:
    label: str  # serial | parallel
    duration: float
    block_power: dict  # flattened block name -> W


@dataclass
class PowerTrace:
    phases: list
    floorplan_ref: str = ""
    block_names: list = field(default_factory=list)

    def __post_init__(self):
        if not self.block_names and self.phases:
            self.block_names = list(self.phases[0].block_power)
        names = set(self.block_names)
        for ph in self.phases:
            if set(ph.block_power) != names:
                raise TraceConsistencyError(f"phase {ph.label!r} block set differs from trace")
            if any(p < 0 for p in ph.block_power.values()):
                raise TraceConsistencyError(f"phase {ph.label!r} has negative power")
        if self.phases and not any(ph.duration > 0 for ph in self.phases):
            raise TraceConsistencyError("trace has no phase with positive duration")

    def phase(self, label):
        for ph in self.phases:
            if ph.label == label:
                return ph
        raise KeyError(label)

    def average_power(self):
        """Duration-weighted mean power per block."""
        total = sum(ph.duration for ph in self.phases)
        return {name: sum(ph.block_power[name] * ph.duration for ph in self.phases) / total
                for name in self.block_names}


def total_power(phase):
    return math.fsum(phase.block_power.values())


def floorplan_id(fp):
    return f"{fp.topology}-r{fp.r}-L{len(fp.layers)}"


def phase_powers(fp, config, params=None, idle=None):
    """Per-block power of the serial and parallel phases, as (serial, parallel) dicts."""
    params = params or config.power_params()
    idle = idle or config.idle_model()
    if fp.r != config.r or fp.topology != config.topology:
        raise TraceConsistencyError(
            f"floorplan ({fp.topology}, r={fp.r}) does not match config ({config.topology}, r={config.r})")
    if len(fp.cmp_layers()) != config.cmp_layers:
        raise TraceConsistencyError(
            f"floorplan has {len(fp.cmp_layers())} cmp layers, config expects {config.cmp_layers}")

    p_big = core_power(config.r, params)
    p_big_idle = idle_power(config.r, params, idle)
    p_unit = core_power(1, params)
    p_unit_idle = idle_power(1, params, idle)

    serial, parallel = {}, {}
    for name, i, block in fp.flat_blocks():
        if block.kind == "dram":
            serial[name] = parallel[name] = config.dram_power * block.area / fp.layers[i].side ** 2
        elif block.kind == "fill":
            serial[name] = parallel[name] = 0.0
        else:
            big = fp.topology == "symmetric" or block.name == "serial_core"
            parallel[name] = p_big if big else p_unit
            if name == fp.serial_core:
                serial[name] = p_big
            else:
                serial[name] = p_big_idle if big else p_unit_idle
    return serial, parallel


def build_trace(fp, config, workload=None, params=None, idle=None):
    """Serial phase then parallel phase; zero-length phases are dropped."""
    workload = workload or config.workload()
    serial, parallel = phase_powers(fp, config, params, idle)
    plan = phase_plan(workload, config.r, config.n_cores_total, config.perf_exponent)
    phases = []
    if plan.serial_duration > 0:
        phases.append(PowerPhase("serial", plan.serial_duration, serial))
    if plan.parallel_duration > 0:
        phases.append(PowerPhase("parallel", plan.parallel_duration, parallel))
    return PowerTrace(phases, floorplan_id(fp), [n for n, _, _ in fp.flat_blocks()])


def phase_rows(duration, sample_interval):
    return max(1, math.ceil(duration / sample_interval - 1e-9))


def format_ptrace(trace, sample_interval=3.333e-4):
    """Header of block names, then one row per sampling interval."""
    lines = ["\t".join(trace.block_names)]
    for ph in trace.phases:
        row = "\t".join(repr(float(ph.block_power[n])) for n in trace.block_names)
        lines.extend([row] * phase_rows(ph.duration, sample_interval))
    return "\n".join(lines) + "\n"


def parse_ptrace(text):
    """Return (block names, list of per-row power dicts)."""
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        raise ValueError("empty ptrace")
    names = lines[0].split()
    rows = []
    for lineno, line in enumerate(lines[1:], 2):
        vals = line.split()
        if len(vals) != len(names):
            raise ValueError(f"row {lineno}: {len(vals)} values for {len(names)} blocks")
        rows.append(dict(zip(names, map(float, vals))))
    return names, rows


def collapse_rows(rows, sample_interval=3.333e-4):
    """Merge runs of identical rows into phases (durations quantized to the sample interval)."""
    phases = []
    for row in rows:
        if phases and phases[-1].block_power == row:
            phases[-1].duration += sample_interval
        else:
            phases.append(PowerPhase(f"row{len(phases)}", sample_interval, dict(row)))
    return phases
