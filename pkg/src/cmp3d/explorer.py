"""Design-space sweeps, thermal-limit search and file emission."""

import csv
import io
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields

from . import analytic_model
from .analytic_model import ThermalEnv
from .config import CmpConfig, config_echo, parse_config  # noqa: F401  (re-exported)
from .floorplan import build_floorplan, write_stack
from .perf_model import speedup
from .power_model import DEFAULT_ALPHAS, valid_core_sizes
from .power_trace import build_trace, format_ptrace, phase_powers, total_power
from .thermal_solver import PackageSpec, build_network, solve_trace

DEFAULT_F_VALUES = (0.5, 0.9, 0.99, 0.999, 1.0)


@dataclass
class SweepPoint:
    r: int
    n_cores_total: int
    f: float
    serial_power_w: float
    parallel_power_w: float
    peak_c: float
    cmp_peak_c: float
    dram_peak_c: float
    speedup: float


@dataclass
class ThermalLimit:
    f: float
    limit_c: float
    feasible: bool
    r: int  # smallest feasible core size, None when infeasible
    parallel_power_w: float  # at r
    crossing_r: int  # first candidate (largest core first) above the limit, or None
    crossing_power_w: float
    metric: str
    points: list


_networks = {}


def network_for(config, fp):
    """Thermal network for ``fp``; the grid and its factors are shared across core sizes."""
    key = (config.chip_area, config.cmp_layers, config.dram_layers, config.resolution, config.ambient)
    base = _networks.get(key)
    if base is None:
        _networks.clear()
        base = _networks[key] = build_network(fp, pkg=PackageSpec(ambient=config.ambient),
                                              resolution=config.resolution)
    return base.with_floorplan(fp)


def simulate(config):
    """Floorplan, trace and thermal result for one design point."""
    fp = build_floorplan(config)
    trace = build_trace(fp, config)
    result = solve_trace(network_for(config, fp), trace)
    return fp, trace, result


def solve_point(config):
    fp, trace, result = simulate(config)
    serial, parallel = phase_powers(fp, config)
    return SweepPoint(
        r=config.r,
        n_cores_total=config.n_cores_total,
        f=config.f,
        serial_power_w=math.fsum(serial.values()),
        parallel_power_w=math.fsum(parallel.values()),
        peak_c=result.peak_c,
        cmp_peak_c=result.cmp_peak_c,
        dram_peak_c=result.dram_peak_c,
        speedup=speedup(config.workload(), config.r, config.n_cores_total, config.perf_exponent),
    )


def run_sweep(r_values, f_values, base=CmpConfig(), jobs=1):
    """One SweepPoint per (r, f), r ascending outer, f ascending inner."""
    configs = [base.replace(r=r, f=f) for r in sorted(r_values) for f in sorted(f_values)]
    if jobs > 1 and len(configs) > 1:
        with ProcessPoolExecutor(jobs) as pool:
            return list(pool.map(solve_point, configs))
    return [solve_point(c) for c in configs]


def point_metric(point, metric):
    return {"peak": point.peak_c, "cmp": point.cmp_peak_c, "dram": point.dram_peak_c}[metric]


def find_thermal_limit(f, limit_c, base=CmpConfig(), r_candidates=None, metric="peak"):
    """Walk from the largest core down; stop at the first design above ``limit_c``.

    ``metric`` selects the temperature compared with the limit: the global
    peak (default), the CMP-layer peak, or the DRAM-layer peak.
    """
    if r_candidates is None:
        r_candidates = sorted(valid_core_sizes(base.budget), reverse=True)
    r_candidates = list(r_candidates)
    if any(b >= a for a, b in zip(r_candidates, r_candidates[1:])):
        raise ValueError("r_candidates must be strictly descending")
    best, best_power = None, None
    crossing_r = crossing_power = None
    points = []
    for r in r_candidates:
        pt = solve_point(base.replace(r=r, f=f))
        points.append(pt)
        if point_metric(pt, metric) > limit_c:
            crossing_r, crossing_power = r, pt.parallel_power_w
            break
        best, best_power = r, pt.parallel_power_w
    return ThermalLimit(f, limit_c, best is not None, best, best_power,
                        crossing_r, crossing_power, metric, points)


def analytic_report(base=CmpConfig(), alphas=DEFAULT_ALPHAS, r_values=None):
    """CSV text per topology: {'symmetric': ..., 'asymmetric': ...}."""
    if r_values is None:
        r_values = valid_core_sizes(base.budget)
    env = ThermalEnv(base.r_th, base.ambient)
    params = base.power_params()
    return {kind: analytic_model.curves_to_csv(
                analytic_model.curve_family(kind, alphas, r_values, params, env))
            for kind in ("symmetric", "asymmetric")}


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return "" if v is None else str(v)


def points_to_csv(points):
    names = [f.name for f in fields(SweepPoint)]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(names)
    for p in points:
        w.writerow([_fmt(getattr(p, n)) for n in names])
    return buf.getvalue()


def summary_csv(trace, result):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["phase", "total_power_w", "peak_c", "peak_layer", "cmp_peak_c", "dram_peak_c"])
    for ph in trace.phases:
        fld = result.phase_fields[ph.label]
        w.writerow([ph.label, _fmt(total_power(ph)), _fmt(fld.peak), fld.peak_node[0],
                    _fmt(fld.cmp_peak), _fmt(fld.dram_peak)])
    mean = math.fsum(trace.average_power().values())
    avg = result.average
    w.writerow(["average", _fmt(mean), _fmt(avg.peak), avg.peak_node[0],
                _fmt(avg.cmp_peak), _fmt(avg.dram_peak)])
    w.writerow(["trace", _fmt(mean), _fmt(result.peak_c), result.peak_layer,
                _fmt(result.cmp_peak_c), _fmt(result.dram_peak_c)])
    return buf.getvalue()


def field_csv(field):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["layer", "row", "col", "x_m", "y_m", "temp_c"])
    for layer, row, col, x, y, t in field.rows():
        w.writerow([layer, row, col, repr(float(x)), repr(float(y)), repr(float(t))])
    return buf.getvalue()


def limit_report(limit):
    lines = [
        f"f={limit.f!r} limit_c={limit.limit_c!r} metric={limit.metric}",
        f"feasible={limit.feasible} r={_fmt(limit.r)} parallel_power_w={_fmt(limit.parallel_power_w)}",
        f"crossing_r={_fmt(limit.crossing_r)} crossing_power_w={_fmt(limit.crossing_power_w)}",
    ]
    return "\n".join(lines) + "\n" + points_to_csv(limit.points)


def export_hotspot(config, out_dir):
    """Write per-layer ``.flp`` files, ``stack.manifest``, ``cmp.ptrace`` and the config echo."""
    os.makedirs(out_dir, exist_ok=True)
    fp = build_floorplan(config)
    trace = build_trace(fp, config)
    manifest = write_stack(fp, out_dir)
    ptrace = os.path.join(out_dir, "cmp.ptrace")
    with open(ptrace, "w") as fh:
        fh.write(format_ptrace(trace, config.sample_interval))
    echo = os.path.join(out_dir, "config.txt")
    with open(echo, "w") as fh:
        fh.write(config_echo(config))
    return {"manifest": manifest, "ptrace": ptrace, "config": echo,
            "flp": [os.path.join(out_dir, f"layer{i}_{layer.role}.flp")
                    for i, layer in enumerate(fp.layers)]}


def write_text(path, text):
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w") as fh:
        fh.write(text)
    return path


__all__ = [
    "CmpConfig", "SweepPoint", "ThermalLimit", "analytic_report", "export_hotspot",
    "find_thermal_limit", "parse_config", "run_sweep", "simulate", "solve_point",
]
