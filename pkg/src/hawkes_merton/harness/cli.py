"""Command-line entry point.

Exit codes: 0 success, 1 usage or validation error, 2 runtime error or a
failed verification.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from ..errors import ConfigError, ModelError
from . import serialize
from .config import load, validate
from .experiments import run_experiment
from .verification import DEFAULT_SEED, run_suite

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME = 0, 1, 2

# subcommand -> experiment kinds it accepts (first is the default)
_KINDS = {
    "params": ("params",),
    "simulate": ("fclt_gchp", "lln_gchp", "lln_hp", "fclt_hp"),
    "optimal-finance": ("finance_opt",),
    "optimal-insurance": ("insurance_opt",),
    "ruin": ("ruin",),
}


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(f"{self.prog}: error: {message}\n{self.format_usage()}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, help="override run.seed")
    common.add_argument("--out", type=Path, help="directory for report.json and CSV tables")
    common.add_argument("--format", choices=("json", "csv"), default="json", help="stdout format")

    parser = _Parser(prog="hawkes-merton", description="Hawkes-based Merton investment models")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    helps = {
        "params": "print diffusion-limit parameters of the configured GCHP",
        "simulate": "run a simulation experiment (lln_hp, fclt_hp, lln_gchp, fclt_gchp)",
        "optimal-finance": "closed-form and Monte Carlo log-optimal fraction",
        "optimal-insurance": "closed-form exponential-utility fraction for the insurer",
        "ruin": "Monte Carlo ruin probability",
    }
    for name, text in helps.items():
        p = sub.add_parser(name, parents=[common], help=text)
        p.add_argument("config", type=Path)
    v = sub.add_parser("verify", parents=[common], help="run the acceptance suite")
    v.add_argument("--quick", action="store_true", help="reduced Monte Carlo sizes")
    return parser


def _emit(result, fmt: str, out: Path | None):
    if out is not None:
        for p in result.write(out):
            print(p, file=sys.stderr)
    if fmt == "json" or not result.tables:
        sys.stdout.write(serialize.dumps(result.report))
    else:
        header, rows = next(iter(result.tables.values()))
        sys.stdout.write(serialize.rows_to_csv_text(header, rows))


def _verify(args) -> int:
    seed = DEFAULT_SEED if args.seed is None else args.seed
    report, _ = run_suite(seed=seed, quick=args.quick, log=lambda line: print(line, file=sys.stderr))
    if args.out is not None:
        args.out.mkdir(parents=True, exist_ok=True)
        serialize.write_json(report, args.out / "report.json")
    if args.format == "json":
        sys.stdout.write(serialize.dumps(report))
    else:
        rows = [(c["id"], c["name"], int(c["passed"])) for c in report["criteria"]]
        sys.stdout.write(serialize.rows_to_csv_text(["id", "name", "passed"], rows))
    return EXIT_OK if report["all_passed"] else EXIT_RUNTIME


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_INVALID
    if args.command == "verify":
        return _verify(args)
    try:
        cfg = load(args.config)
        allowed = _KINDS[args.command]
        if cfg.kind not in allowed:
            if args.command == "simulate":
                cfg = cfg.with_kind("fclt_gchp" if cfg.has_chain else "fclt_hp")
            else:
                cfg = cfg.with_kind(allowed[0])
        if args.seed is not None:
            cfg = cfg.with_seed(args.seed)
        validate(cfg)
        result = run_experiment(cfg)
    except (ConfigError, ModelError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except Exception as exc:  # noqa: BLE001 - report and map to the runtime exit code
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    _emit(result, args.format, args.out)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
