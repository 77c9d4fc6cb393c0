"""Command-line runner.

    packetstats single      --config CFG [--out DIR] [--kinds boson,fermion,dp]
    packetstats sweep       --config CFG [--out DIR] [--threads N]
    packetstats diagnostics --config CFG [--out DIR]
    packetstats audit       --config CFG
    packetstats preset      fig3|fig4 [--out DIR]

``CFG`` is a JSON file or ``builtin:NAME`` (fig3, fig4, hom, resonance,
diagonal).  Exit codes: 0 ok, 1 configuration, 2 convergence,
3 consistency, 4 inequality violation.
"""

from __future__ import annotations

import argparse
import logging
import sys
from collections import OrderedDict
from pathlib import Path

from . import runner
from .config import load_config
from .errors import DegenerateInputError, PacketStatsError
from .io import distribution_table, dump_overlap_set, format_value, write_table
from .linalg import StatisticsKind
from .presets import builtin

log = logging.getLogger("packetstats")

EXIT_CODES = {"consistency": 3, "convergence": 2, "inequality": 4}


def _load(spec: str):
    if spec.startswith("builtin:"):
        return builtin(spec.split(":", 1)[1])
    return load_config(spec)


def _kinds(text):
    if not text:
        return None
    return tuple(StatisticsKind.parse(k) for k in text.split(",") if k.strip())


def _prepare(args, config):
    if args.quad_scale != 1.0:
        config = config.with_quad_scale(args.quad_scale)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return config, out


def cmd_single(args, config) -> int:
    config, out = _prepare(args, config)
    kinds = _kinds(args.kinds) or config.kinds
    ov, dists = runner.single_run(config, kinds)
    present = [d for d in dists.values() if d is not None]
    if not present:
        raise DegenerateInputError("no requested statistics kind has a normalizable input state")
    columns, rows = distribution_table(present)
    for kind, d in dists.items():
        if d is None:
            log.warning("%s: input state vanishes (linearly dependent modes); column omitted",
                        kind.value)
    write_table(out / "single.csv", columns, rows,
                f"full counting statistics {config.name} tau={format_value(config.tau)} [1/eps0]")
    if args.dump_overlaps:
        dump_overlap_set(ov, out / "overlaps.json")
    print(f"wrote {out / 'single.csv'} ({len(rows)} outcomes)")
    return 0


def cmd_sweep(args, config) -> int:
    config, out = _prepare(args, config)
    result = runner.run_sweep(config, _kinds(args.kinds), threads=args.threads)
    path = out / "sweep.csv"
    result.write(path)
    print(f"wrote {path} ({len(result.rows)} rows)")
    return 0


def cmd_diagnostics(args, config) -> int:
    config, out = _prepare(args, config)
    result = runner.overlap_diagnostics(config, _kinds(args.kinds), threads=args.threads)
    path = out / "diagnostics.csv"
    result.write(path)
    print(f"wrote {path} ({len(result.rows)} rows)")
    return 0


def _print_audit(checks) -> int:
    grouped = OrderedDict()
    for c in checks:
        grouped.setdefault(c.name, []).append(c)
    width = max(len(name) for name in grouped)
    code = 0
    for name, items in grouped.items():
        fails = [c for c in items if c.status == "fail"]
        passes = sum(c.status == "pass" for c in items)
        skips = sum(c.status == "skip" for c in items)
        status = "FAIL" if fails else ("PASS" if passes else "SKIP")
        detail = fails[0].detail if fails else (items[-1].detail if passes else items[0].detail)
        print(f"{status:4}  {name:<{width}}  pass={passes} skip={skips} fail={len(fails)}  {detail}")
        if fails and code == 0:
            code = EXIT_CODES.get(fails[0].category, 3)
    print("audit:", "PASSED" if code == 0 else "FAILED")
    return code


def cmd_audit(args, config) -> int:
    if args.quad_scale != 1.0:
        config = config.with_quad_scale(args.quad_scale)
    return _print_audit(runner.audit(config, _kinds(args.kinds)))


def cmd_preset(args, _config) -> int:
    config = builtin(args.name)
    config, out = _prepare(args, config)
    result = runner.run_sweep(config, _kinds(args.kinds), threads=args.threads)
    path = out / f"{args.name}.csv"
    result.write(path)
    audits = result.column("audit")
    print(f"wrote {path} ({len(result.rows)} rows); "
          f"uncorrelated points {int((audits >= 0).sum())}, "
          f"inequality failures {int((audits == 0).sum())}")
    return 4 if (audits == 0).any() else 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default=".", help="output directory")
    common.add_argument("--kinds", default="", help="comma list of boson,fermion,dp")
    common.add_argument("--threads", type=int, default=1, help="worker threads for sweeps")
    common.add_argument("--quad-scale", type=float, default=1.0,
                        help="multiply quadrature node counts")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(
        prog="packetstats",
        description="Counting statistics of identical particles scattered as wave packets.",
        epilog="exit codes: 0 ok, 1 configuration, 2 convergence, 3 consistency, 4 inequality")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn, help_ in [
        ("single", cmd_single, "full distribution at one delay"),
        ("sweep", cmd_sweep, "observables over the configured delay sweep"),
        ("diagnostics", cmd_diagnostics, "per/det of I and mean numbers over the sweep"),
        ("audit", cmd_audit, "run every invariant and print a pass/fail table"),
    ]:
        p = sub.add_parser(name, parents=[common], help=help_)
        p.add_argument("--config", required=True, help="JSON file or builtin:NAME")
        p.set_defaults(func=fn)
        if name == "single":
            p.add_argument("--dump-overlaps", action="store_true",
                           help="also write overlaps.json")
    p = sub.add_parser("preset", parents=[common], help="resonant-cavity delay sweeps")
    p.add_argument("name", choices=["fig3", "fig4"])
    p.set_defaults(func=cmd_preset)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        config = _load(args.config) if hasattr(args, "config") else None
        return args.func(args, config)
    except PacketStatsError as exc:
        print(f"error ({type(exc).__name__}): {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
