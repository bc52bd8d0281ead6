"""fdnet command line: sweep, validate, plot, si-dist.

Exit codes: 0 success, 1 config error, 2 numeric failure, 3 validation failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

from . import config, plot, sweep, validation

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_VALIDATION = 0, 1, 2, 3


def _overrides(items: list[str]) -> dict[str, str]:
    out = {}
    for item in items or []:
        key, sep, value = item.partition("=")
        if not sep:
            raise config.ConfigError(f"--set {item!r} must look like section.key=value")
        out[key.strip()] = value.strip()
    return out


def _write(text: str, path: str | None) -> None:
    if path:
        Path(path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def cmd_sweep(args) -> int:
    sc = config.load(args.config, _overrides(args.set))
    if args.workers:
        sc = dataclasses.replace(sc, workers=args.workers)
    header, rows = sweep.run_sweep(sc)
    _write(sweep.to_csv(header, rows), args.output)
    bad = sweep.failed(rows)
    for i in bad:
        print(f"grid point {i}: {rows[i]['status']}", file=sys.stderr)
    return EXIT_NUMERIC if bad else EXIT_OK


def cmd_si_dist(args) -> int:
    sc = config.load(args.config, _overrides(args.set))
    header, rows = sweep.si_histogram(sc, args.samples)
    _write(sweep.to_csv(header, rows), args.output)
    return EXIT_OK


def cmd_validate(args) -> int:
    def show(r):
        print(r.line(), flush=True)

    results = validation.run(args.level, progress=show)
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} checks passed")
    return EXIT_VALIDATION if failed else EXIT_OK


def cmd_plot(args) -> int:
    text = Path(args.csv).read_text(encoding="utf-8")
    svg = plot.emit_plot(text, args.cols, x=args.x, log_x=args.log_x, log_y=args.log_y, title=args.title)
    _write(svg, args.output)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fdnet", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", help="run a parameter sweep and write CSV")
    p.add_argument("config")
    p.add_argument("-o", "--output")
    p.add_argument("--set", action="append", metavar="SECTION.KEY=VALUE", help="override a config entry")
    p.add_argument("--workers", type=int, help="worker processes for grid points")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("si-dist", help="SI power histogram against the gamma fit")
    p.add_argument("config")
    p.add_argument("-o", "--output")
    p.add_argument("--samples", type=int)
    p.add_argument("--set", action="append", metavar="SECTION.KEY=VALUE")
    p.set_defaults(func=cmd_si_dist)

    p = sub.add_parser("validate", help="run the self-check suite")
    p.add_argument("--level", choices=sorted(validation.LEVELS), default="quick")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("plot", help="SVG line plot of CSV columns")
    p.add_argument("csv")
    p.add_argument("--cols", nargs="*", default=[])
    p.add_argument("--x")
    p.add_argument("--log-x", dest="log_x", action="store_true", default=None)
    p.add_argument("--linear-x", dest="log_x", action="store_false")
    p.add_argument("--log-y", action="store_true")
    p.add_argument("--title", default="")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_plot)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except config.ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except plot.PlotError as exc:
        print(f"plot error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except sweep.NUMERIC_FAILURES as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
