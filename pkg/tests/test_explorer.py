import csv
import io
import math

import pytest

from cmp3d import cli
from cmp3d.config import CmpConfig, ConfigError, apply_overrides, config_echo, parse_config, parse_config_text
from cmp3d.explorer import (
    analytic_report,
    export_hotspot,
    find_thermal_limit,
    points_to_csv,
    run_sweep,
    simulate,
    summary_csv,
)
from cmp3d.floorplan import read_stack
from cmp3d.power_trace import collapse_rows, parse_ptrace

LOW = CmpConfig(resolution=8)


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_config_defaults():
    c = CmpConfig()
    assert (c.cmp_layers, c.k_idle, c.alpha, c.p_full, c.budget, c.chip_area) == (4, 0.2, 0.875, 25.0, 256, 28.0)
    assert (c.temp_limit_dram, c.temp_limit_package, c.dram_power) == (95.0, 125.0, 0.0)


def test_parse_config(tmp_path):
    path = tmp_path / "c.txt"
    path.write_text("# design point\nr = 32\nf=0.9  # inline\n\ntopology=asymmetric\n")
    c = parse_config(path)
    assert (c.r, c.f, c.topology, c.budget) == (32, 0.9, "asymmetric", 256)
    assert parse_config_text(config_echo(c)) == c


@pytest.mark.parametrize("text, message", [
    ("colour=red\n", "unknown config key"),
    ("r\n", "expected key=value"),
    ("r=3\n", "does not divide"),
    ("r=2.5\n", "integer"),
    ("f=1.5\n", "parallel fraction"),
    ("temp_limit_dram=10\n", "exceed ambient"),
    ("topology=ring\n", "topology"),
])
def test_parse_config_errors(text, message):
    with pytest.raises(ConfigError, match=message):
        parse_config_text(text)


def test_overrides():
    c = apply_overrides(CmpConfig(), ["r=4", "alpha=0.75"])
    assert (c.r, c.alpha) == (4, 0.75)
    with pytest.raises(ConfigError):
        apply_overrides(CmpConfig(), ["nope=1"])


def test_sweep_ordering_and_fields():
    pts = run_sweep([16, 1], [1.0, 0.5], LOW)
    assert [(p.r, p.f) for p in pts] == [(1, 0.5), (1, 1.0), (16, 0.5), (16, 1.0)]
    p = pts[1]
    assert p.n_cores_total == 1024
    assert p.parallel_power_w == pytest.approx(200.0, rel=1e-12)
    assert p.serial_power_w == pytest.approx(0.1953125 * (1 + 0.2 * 1023), rel=1e-12)
    assert p.speedup == pytest.approx(1024.0)
    assert p.peak_c >= p.cmp_peak_c >= p.dram_peak_c > LOW.ambient


def test_sweep_empty():
    assert run_sweep([], [1.0], LOW) == []


def test_sweep_csv_deterministic():
    a = points_to_csv(run_sweep([4, 64], [0.9], LOW))
    b = points_to_csv(run_sweep([4, 64], [0.9], LOW))
    assert a == b
    assert a.splitlines()[0] == ("r,n_cores_total,f,serial_power_w,parallel_power_w,"
                                 "peak_c,cmp_peak_c,dram_peak_c,speedup")


def test_sweep_parallel_jobs_match_serial():
    assert run_sweep([4, 64], [0.9, 1.0], LOW, jobs=2) == run_sweep([4, 64], [0.9, 1.0], LOW)


def test_limit_unconstrained():
    lim = find_thermal_limit(1.0, math.inf, LOW, [256, 64, 16])
    assert lim.feasible and lim.r == 16 and lim.crossing_r is None


def test_limit_below_largest_core_is_infeasible():
    peak = run_sweep([256], [1.0], LOW)[0].peak_c
    lim = find_thermal_limit(1.0, peak - 1e-6, LOW, [256, 64, 16])
    assert not lim.feasible and lim.r is None
    assert lim.crossing_r == 256


def test_limit_between_candidates():
    pts = {p.r: p for p in run_sweep([16, 64, 256], [1.0], LOW)}
    limit = (pts[64].peak_c + pts[16].peak_c) / 2
    lim = find_thermal_limit(1.0, limit, LOW, [256, 64, 16])
    assert (lim.r, lim.crossing_r) == (64, 16)
    assert lim.parallel_power_w == pytest.approx(pts[64].parallel_power_w)


def test_limit_requires_descending():
    with pytest.raises(ValueError):
        find_thermal_limit(1.0, 100.0, LOW, [16, 64])


def test_analytic_report():
    csvs = analytic_report(CmpConfig())
    sym = rows(csvs["symmetric"])
    asym = rows(csvs["asymmetric"])
    by = {(float(r["alpha"]), int(r["r"])): float(r["temp_c"]) for r in sym}
    assert by[(0.875, 1)] == pytest.approx(127.143, abs=1e-3)
    assert by[(0.875, 256)] == pytest.approx(73.571, abs=1e-3)
    flat = [float(r["temp_c"]) for r in sym if float(r["alpha"]) == 1.0]
    assert max(flat) - min(flat) < 1e-9
    for s, a in zip(sym, asym):
        assert float(a["temp_c"]) >= float(s["temp_c"]) - 1e-12


def test_simulate_summary():
    fp, trace, res = simulate(LOW.replace(r=64, f=0.9))
    table = rows(summary_csv(trace, res))
    assert [r["phase"] for r in table] == ["serial", "parallel", "average", "trace"]
    assert float(table[-1]["peak_c"]) == res.peak_c


def test_export_round_trip(tmp_path):
    config = CmpConfig(r=64, f=0.5, t_base=0.01)
    files = export_hotspot(config, tmp_path)
    layers = read_stack(files["manifest"])
    assert len(layers) == 5
    fp, trace, _ = simulate(config.replace(resolution=8))
    for orig, back in zip(fp.layers, layers):
        for a, b in zip(orig.blocks, back.blocks):
            assert max(abs(a.x - b.x), abs(a.y - b.y), abs(a.width - b.width), abs(a.height - b.height)) <= 1e-12
    names, prow = parse_ptrace(open(files["ptrace"]).read())
    phases = collapse_rows(prow)
    assert [p.block_power for p in phases] == [p.block_power for p in trace.phases]
    assert parse_config(files["config"]) == config


def test_cli_analytic_and_errors(tmp_path, capsys):
    assert cli.main(["analytic", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "analytic_symmetric.csv").exists()
    assert (tmp_path / "config.resolved").exists()
    assert cli.main(["simulate", "--out", str(tmp_path), "--set", "r=3"]) != 0
    assert "does not divide" in capsys.readouterr().err
    assert cli.main(["sweep", "--out", str(tmp_path), "--set", "bogus=1"]) != 0


def test_cli_simulate_sweep_limit_export(tmp_path, capsys):
    out = str(tmp_path)
    assert cli.main(["simulate", "--out", out, "--resolution", "8", "--set", "f=0.9", "--phase-fields"]) == 0
    assert rows((tmp_path / "field.csv").read_text())[0].keys() == {"layer", "row", "col", "x_m", "y_m", "temp_c"}
    assert (tmp_path / "field_serial.csv").exists()
    assert cli.main(["sweep", "--out", out, "--resolution", "8", "--r", "16,64", "--f", "1"]) == 0
    assert len(rows((tmp_path / "sweep.csv").read_text())) == 2
    assert cli.main(["limit", "--out", out, "--resolution", "8", "--r", "256,64", "--metric", "dram"]) == 0
    assert "metric=dram" in capsys.readouterr().out
    assert cli.main(["export-hotspot", "--out", out, "--set", "r=256"]) == 0
    assert (tmp_path / "stack.manifest").exists()
