"""Command line: ``stenzel-slag {potential,verify,scan,export}``.

Exit codes: 0 success / pass, 1 a verification check failed, 2 invalid
flags or configuration, 3 potential range error, 4 empty level set,
5 I/O error.
"""

from __future__ import annotations

import argparse
import logging
import sys

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .pipeline import (
    EXAMPLE_IDS,
    EmptyLevelSet,
    OdeConfig,
    RunConfig,
    SCAN_COLUMNS,
    Sampling,
    Tolerances,
    export_angle_series,
    export_samples,
    parse_levels,
    scan_levels,
    verify_example,
    verify_pieces,
    write_csv,
)
from .potential import PotentialRangeError, build_potential

__all__ = ["main", "build_parser", "load_config"]

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_RANGE, EXIT_EMPTY, EXIT_IO = 0, 1, 2, 3, 4, 5

log = logging.getLogger("stenzel_slag")


def _positive_float(name):
    def parse(text):
        try:
            value = float(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"{name} must be a number, got {text!r}") from None
        if not value > 0:
            raise argparse.ArgumentTypeError(f"{name} must be positive, got {text}")
        return value

    return parse


def _unit_float(name):
    def parse(text):
        value = _positive_float(name)(text)
        if value >= 1:
            raise argparse.ArgumentTypeError(f"{name} must lie in (0, 1), got {text}")
        return value

    return parse


def _positive_int(name):
    def parse(text):
        try:
            value = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"{name} must be an integer, got {text!r}") from None
        if value < 1:
            raise argparse.ArgumentTypeError(f"{name} must be positive, got {text}")
        return value

    return parse


def _shared(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", metavar="PATH", help="TOML file; flags override its values")
    p.add_argument("--seed", type=int)
    p.add_argument("--n", type=_positive_int("--n"))
    p.add_argument("--c", type=_positive_float("--c"), help="Stenzel constant c > 0")
    p.add_argument("--t-max", type=_positive_float("--t-max"))
    p.add_argument("--tol", type=_unit_float("--tol"), help="ODE tolerance")
    p.add_argument("--grid-size", type=_positive_int("--grid-size"))
    for name in ("omega", "perp", "angle", "phase"):
        p.add_argument(f"--tol-{name}", type=_unit_float(f"--tol-{name}"))
    p.add_argument("-v", "--verbose", action="store_true")


def _example_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--example", choices=EXAMPLE_IDS)
    p.add_argument("--conormal", choices=("L1", "L2", "L"), help="bundle for --example conormal")
    p.add_argument("--samples", type=_positive_int("--samples"), help="total swept samples")
    p.add_argument("--v-count", type=_positive_int("--v-count"), help="level-set points")
    p.add_argument("--h-grid", type=_positive_int("--h-grid"), help="group samples per level-set point")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="stenzel-slag", description="Special Lagrangian sweeps in the Stenzel manifold T*S^n")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("potential", help="tabulate and save the Stenzel potential")
    _shared(p)
    p.add_argument("--out", metavar="PATH", help="JSON output file")

    p = sub.add_parser("verify", help="certify one example and level")
    _shared(p)
    _example_flags(p)
    p.add_argument("--level", type=float, help="level c for the U(1) examples")
    p.add_argument("--c1", type=float)
    p.add_argument("--c2", type=float)
    p.add_argument("--pieces", action="store_true", help="so223 at (0,0): certify the five pieces separately")
    p.add_argument("--report", "--out", dest="report", metavar="PATH")

    p = sub.add_parser("scan", help="reduced verification over a range of levels")
    _shared(p)
    _example_flags(p)
    p.add_argument("--levels", required=True, help="lo:hi:step (inclusive)")
    p.add_argument("--c2", type=float, default=0.1, help="fixed c2 when scanning c1 for so223")
    p.add_argument("--out", metavar="PATH", help="CSV output (stdout if omitted)")

    p = sub.add_parser("export", help="dump swept samples or the angle series as CSV")
    _shared(p)
    _example_flags(p)
    p.add_argument("--level", type=float)
    p.add_argument("--c1", type=float)
    p.add_argument("--c2", type=float)
    p.add_argument("--what", choices=("samples", "angle-series"), default="samples")
    p.add_argument("--format", choices=("csv",), default="csv")
    p.add_argument("--out", metavar="PATH", required=True)
    return parser


def load_config(path) -> dict:
    with open(path, "rb") as fh:
        return tomllib.load(fh)


def _set(d: dict, key, value):
    if value is not None:
        d[key] = value


def _run_config(args, parser) -> RunConfig:
    raw = load_config(args.config) if args.config else {}
    ode = dict(raw.get("ode", {}))
    tols = dict(raw.get("tolerances", {}))
    samp = dict(raw.get("sampling", {}))
    top = {k: raw[k] for k in ("example", "n", "levels", "conormal") if k in raw}
    _set(ode, "c", args.c)
    _set(ode, "t_max", args.t_max)
    _set(ode, "tol", args.tol)
    _set(ode, "grid_size", args.grid_size)
    for name in ("omega", "perp", "angle", "phase"):
        _set(tols, name, getattr(args, f"tol_{name}"))
    _set(samp, "seed", args.seed)
    _set(top, "n", args.n)
    for key in ("example", "conormal"):
        _set(top, key, getattr(args, key, None))
    _set(samp, "v_count", getattr(args, "v_count", None))
    _set(samp, "h_grid", getattr(args, "h_grid", None))
    total = getattr(args, "samples", None)
    if total is not None:
        v = samp.get("v_count", Sampling().v_count)
        samp["h_grid"] = -(-total // v)
    level = _level_from_args(args, top.get("example", "u1-l1"), parser)
    if level is not None:
        top["levels"] = [level]
    try:
        return RunConfig(
            ode=OdeConfig(**ode),
            tolerances=Tolerances(**tols),
            sampling=Sampling(**samp),
            **top,
        )
    except (TypeError, ValueError) as exc:
        parser.error(f"invalid configuration: {exc}")


def _level_from_args(args, example, parser):
    level, c1, c2 = getattr(args, "level", None), getattr(args, "c1", None), getattr(args, "c2", None)
    if args.command == "scan":
        return None
    if example == "so223":
        if level is not None:
            parser.error("--level applies to the U(1) examples; use --c1/--c2 for so223")
        if (c1 is None) != (c2 is None):
            parser.error("--c1 and --c2 must be given together")
        return None if c1 is None else [c1, c2]
    if c1 is not None or c2 is not None:
        parser.error("--c1/--c2 apply to the so223 example only")
    return None if level is None else [level]


def _cmd_potential(args, parser) -> int:
    cfg = _run_config(args, parser)
    n = args.n if args.n is not None else cfg.n
    table = build_potential(n, cfg.ode.c, cfg.ode.t_max, cfg.ode.tol, cfg.ode.grid_size)
    up1, _ = table.u_from_excess(0.0)
    if args.out:
        table.to_json(args.out)
    print(f"n = {n}  c = {cfg.ode.c!r}  u'(1) = {up1!r}  U'(t_max) = {float(table.Uprime(table.t_max))!r}")
    return EXIT_OK


def _cmd_verify(args, parser) -> int:
    cfg = _run_config(args, parser)
    if args.pieces:
        if cfg.example != "so223" or any(c != 0.0 for c in cfg.levels[0]):
            parser.error("--pieces needs --example so223 --c1 0 --c2 0")
        report = verify_pieces(cfg)
    else:
        report = verify_example(cfg)
    if args.report:
        report.to_json(args.report)
    for check in report.checks:
        log.info("%-28s %.3e < %.1e  %s", check.name, check.residual, check.tol, "pass" if check.passed else "FAIL")
    if report.status == "empty":
        print(f"{report.example}: level {report.level} is empty")
        return EXIT_EMPTY
    print(f"{report.example}: {'PASS' if report.passed else 'FAIL'}")
    return EXIT_OK if report.passed else EXIT_FAIL


def _cmd_scan(args, parser) -> int:
    cfg = _run_config(args, parser)
    if cfg.example == "conormal":
        parser.error("scan needs a level-set example")
    try:
        levels = parse_levels(args.levels)
    except ValueError as exc:
        parser.error(f"--levels: {exc}")
    rows = scan_levels(cfg, levels, fixed_c2=args.c2)
    table = [[row[k] for k in SCAN_COLUMNS] for row in rows]
    write_csv(args.out or sys.stdout, SCAN_COLUMNS, table)
    return EXIT_OK


def _cmd_export(args, parser) -> int:
    cfg = _run_config(args, parser)
    if cfg.example == "conormal":
        parser.error("export needs a level-set example")
    try:
        writer = export_samples if args.what == "samples" else export_angle_series
        count = writer(cfg, args.out)
    except EmptyLevelSet as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_EMPTY
    print(f"wrote {count} rows to {args.out}")
    return EXIT_OK


COMMANDS = {"potential": _cmd_potential, "verify": _cmd_verify, "scan": _cmd_scan, "export": _cmd_export}


def _glue_negative_values(argv):
    # argparse reads "-1:1:0.25" as an option; bind it to its flag instead
    out, it = [], iter(argv)
    for tok in it:
        if tok in ("--levels", "--level", "--c1", "--c2"):
            nxt = next(it, None)
            out.append(tok if nxt is None else f"{tok}={nxt}")
        else:
            out.append(tok)
    return out


def main(argv=None) -> int:
    parser = build_parser()
    argv = _glue_negative_values(sys.argv[1:] if argv is None else list(argv))
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return COMMANDS[args.command](args, parser)
    except SystemExit as exc:  # parser.error inside a command
        return int(exc.code or 0)
    except PotentialRangeError as exc:
        print(f"range error: {exc}", file=sys.stderr)
        return EXIT_RANGE
    except (OSError, tomllib.TOMLDecodeError) as exc:
        if isinstance(exc, tomllib.TOMLDecodeError):
            print(f"invalid config: {exc}", file=sys.stderr)
            return EXIT_USAGE
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
