"""Command-line entry point: ``cmp3d <subcommand> [options]``."""

import argparse
import logging
import os
import sys

from . import explorer
from .config import CmpConfig, ConfigError, apply_overrides, config_echo, parse_config
from .power_model import DomainError, valid_core_sizes

log = logging.getLogger("cmp3d")


def _floats(text):
    return [float(v) for v in text.split(",") if v.strip()]


def _ints(text):
    return [int(v) for v in text.split(",") if v.strip()]


def _load_config(args):
    config = parse_config(args.config) if args.config else CmpConfig()
    overrides = list(args.set or [])
    if args.resolution is not None:
        overrides.append(f"resolution={args.resolution}")
    return apply_overrides(config, overrides)


def cmd_analytic(args, config):
    alphas = _floats(args.alphas) if args.alphas else list(explorer.DEFAULT_ALPHAS)
    r_values = _ints(args.r) if args.r else None
    csvs = explorer.analytic_report(config, alphas, r_values)
    for kind, text in csvs.items():
        path = explorer.write_text(os.path.join(args.out, f"analytic_{kind}.csv"), text)
        log.info("wrote %s", path)


def cmd_simulate(args, config):
    fp, trace, result = explorer.simulate(config)
    explorer.write_text(os.path.join(args.out, "summary.csv"), explorer.summary_csv(trace, result))
    explorer.write_text(os.path.join(args.out, "field.csv"), explorer.field_csv(result.hottest))
    if args.phase_fields:
        for label, fld in result.phase_fields.items():
            explorer.write_text(os.path.join(args.out, f"field_{label}.csv"), explorer.field_csv(fld))
    print(f"peak_c={result.peak_c:.3f} cmp_peak_c={result.cmp_peak_c:.3f} "
          f"dram_peak_c={result.dram_peak_c:.3f}")


def cmd_sweep(args, config):
    r_values = _ints(args.r) if args.r else valid_core_sizes(config.budget)
    f_values = _floats(args.f) if args.f else list(explorer.DEFAULT_F_VALUES)
    points = explorer.run_sweep(r_values, f_values, config, jobs=args.jobs)
    path = explorer.write_text(os.path.join(args.out, "sweep.csv"), explorer.points_to_csv(points))
    log.info("wrote %s (%d points)", path, len(points))


def cmd_limit(args, config):
    limit_c = args.limit if args.limit is not None else config.temp_limit_dram
    r_candidates = sorted(_ints(args.r), reverse=True) if args.r else None
    result = explorer.find_thermal_limit(config.f, limit_c, config, r_candidates, args.metric)
    text = explorer.limit_report(result)
    explorer.write_text(os.path.join(args.out, "limit.txt"), text)
    sys.stdout.write(text.split("\n", 3)[0] + "\n" + "\n".join(text.split("\n")[1:3]) + "\n")


def cmd_export(args, config):
    files = explorer.export_hotspot(config, args.out)
    log.info("wrote %s", files["manifest"])


COMMANDS = {
    "analytic": cmd_analytic,
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "limit": cmd_limit,
    "export-hotspot": cmd_export,
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value config file")
    common.add_argument("--out", default="out", help="output directory")
    common.add_argument("--resolution", type=int, help="grid cells per die side")
    common.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a config key")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="cmp3d", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("analytic", parents=[common], help="closed-form temperature curves")
    p.add_argument("--alphas", help="comma-separated exponents")
    p.add_argument("--r", help="comma-separated core sizes")
    p = sub.add_parser("simulate", parents=[common], help="one design point")
    p.add_argument("--phase-fields", action="store_true", help="also dump per-phase steady fields")
    p = sub.add_parser("sweep", parents=[common], help="peak temperature over core size and f")
    p.add_argument("--r", help="comma-separated core sizes")
    p.add_argument("--f", help="comma-separated parallel fractions")
    p.add_argument("--jobs", type=int, default=1)
    p = sub.add_parser("limit", parents=[common], help="thermal-limit search")
    p.add_argument("--limit", type=float, help="temperature limit (default: temp_limit_dram)")
    p.add_argument("--metric", choices=("peak", "cmp", "dram"), default="peak")
    p.add_argument("--r", help="comma-separated core sizes")
    sub.add_parser("export-hotspot", parents=[common], help="write .flp/.ptrace files")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        config = _load_config(args)
        os.makedirs(args.out, exist_ok=True)
        explorer.write_text(os.path.join(args.out, "config.resolved"), config_echo(config))
        COMMANDS[args.command](args, config)
    except (ConfigError, DomainError, OSError, ValueError) as exc:
        print(f"cmp3d: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
