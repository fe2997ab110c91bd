"""Command-line interface.

Subcommands::

    pidfair audit     --input data.csv --z-col sex --y-col label [--yhat-col pred]
    pidfair scenario  example2 [--param rho=0.8]
    pidfair sweep     markov_sweep --param steps=101 --out curve.csv
    pidfair blackwell (--input data.csv ... | --scenario KIND) [--sufficient y]

Exit codes: 0 success, 2 ingestion error, 3 solver did not converge,
4 a relation check failed, 5 bad arguments or scenario parameters.
Errors are also written to stderr as one JSON object per line.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .dist import EstimationError
from .pid import blackwell_check
from .report import AuditReport, format_sweep, ingest_csv, run_audit, sweep_rows
from .scenarios import KINDS, SWEEP_KINDS, ScenarioError, ScenarioSpec, generate_scenario
from .solver import SolverConfig

EXIT_OK = 0
EXIT_INGEST = 2
EXIT_NONCONVERGED = 3
EXIT_BREACH = 4
EXIT_USAGE = 5


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _param(text: str) -> tuple[str, str]:
    name, sep, value = text.partition("=")
    if not sep or not name:
        raise argparse.ArgumentTypeError(f"expected NAME=VALUE, got {text!r}")
    return name.strip(), value.strip()


def _common(p: argparse.ArgumentParser):
    p.add_argument("--tol", type=float, default=1e-9, help="certified-gap threshold in bits (default 1e-9)")
    p.add_argument("--max-iters", type=int, default=10_000, help="solver iteration cap (default 10000)")
    p.add_argument("--format", choices=("json", "text"), default="json")
    p.add_argument("--units", choices=("bits", "nats"), default="bits")
    p.add_argument("--out", type=Path, default=None, help="write output here instead of stdout")
    p.add_argument("--seed", type=int, default=None, help="seed for sampled scenario kinds")


def _input_args(p: argparse.ArgumentParser, required: bool):
    p.add_argument("--input", type=Path, required=required, help="UTF-8 CSV with a header row")
    p.add_argument("--z-col", default="z", help="sensitive-attribute column (default z)")
    p.add_argument("--y-col", default="y", help="label column (default y)")
    p.add_argument("--yhat-col", default=None, help="prediction column; omit for dataset-only mode")
    p.add_argument("--smoothing", type=float, default=0.0, help="additive smoothing per cell (default 0)")


def _scenario_args(p: argparse.ArgumentParser, kinds, positional: bool = True):
    if positional:
        p.add_argument("kind", choices=kinds)
    p.add_argument(
        "--param", type=_param, action="append", default=[], metavar="NAME=VALUE", help="scenario parameter"
    )


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pidfair", description="PID-based fairness audit of discrete distributions.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("audit", help="audit a CSV of (attribute, label[, prediction]) rows")
    _input_args(p, required=True)
    _common(p)

    single = [k for k in KINDS if k not in SWEEP_KINDS]
    p = sub.add_parser("scenario", help="audit a built-in distribution")
    _scenario_args(p, single)
    _common(p)

    p = sub.add_parser("sweep", help="audit every point of a distribution family and write CSV")
    _scenario_args(p, SWEEP_KINDS)
    _common(p)

    p = sub.add_parser("blackwell", help="test whether one variable's channel can be degraded into the other's")
    _input_args(p, required=False)
    p.add_argument("--scenario", choices=single, default=None, help="use a built-in distribution instead of --input")
    _scenario_args(p, KINDS, positional=False)
    p.add_argument("--sufficient", choices=("y", "yhat"), default="y", help="candidate sufficient variable")
    _common(p)
    return parser


def _diag(kind: str, message: str, **extra):
    sys.stderr.write(json.dumps({"error": kind, "message": message, **extra}, sort_keys=True) + "\n")


def _emit(text: str, out: Path | None):
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text, encoding="utf-8")


def _spec(args) -> ScenarioSpec:
    kind = args.kind if args.command != "blackwell" else args.scenario
    params = dict(args.param)
    if args.seed is not None:
        if "seed" not in ScenarioSpec.describe(kind):
            raise ScenarioError(f"{kind} does not take a seed")
        params["seed"] = args.seed
    return ScenarioSpec(kind, params)


def _config(args) -> SolverConfig:
    try:
        return SolverConfig(tol=args.tol, max_iters=args.max_iters)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _report_exit(report: AuditReport) -> int:
    if not report.converged:
        _diag("nonconvergence", "unique-information solver did not reach the requested tolerance",
              gap=report.solver["gap"])
        return EXIT_NONCONVERGED
    if report.breaches:
        _diag("theorem_breach", "relation check failed", checks=report.breaches)
        return EXIT_BREACH
    return EXIT_OK


def _render(report: AuditReport, fmt: str) -> str:
    return report.to_json() if fmt == "json" else report.to_text()


def _cmd_audit(args) -> int:
    if args.smoothing < 0:
        raise UsageError("--smoothing must be nonnegative")
    cfg = _config(args)
    dist, n = ingest_csv(args.input, args.z_col, args.y_col, args.yhat_col, args.smoothing)
    report = run_audit(
        dist,
        cfg,
        source=str(args.input),
        n_records=n,
        smoothing=args.smoothing,
        units=args.units,
        dataset_only=args.yhat_col is None,
    )
    _emit(_render(report, args.format), args.out)
    return _report_exit(report)


def _cmd_scenario(args) -> int:
    cfg = _config(args)
    spec = _spec(args)
    dist = generate_scenario(spec)
    report = run_audit(dist, cfg, source=f"scenario:{spec.kind}", units=args.units)
    report.meta["params"] = dict(spec.params)
    _emit(_render(report, args.format), args.out)
    return _report_exit(report)


def _cmd_sweep(args) -> int:
    cfg = _config(args)
    spec = _spec(args)
    rows = sweep_rows(spec, cfg)
    text = format_sweep(rows, args.units)
    if args.format == "text":
        lines = text.splitlines()
        cells = [line.split(",") for line in lines]
        widths = [max(len(c[i]) for c in cells) for i in range(len(cells[0]))]
        text = "\n".join("  ".join(c.rjust(w) for c, w in zip(row, widths)) for row in cells) + "\n"
    _emit(text, args.out)
    if not all(r["converged"] for r in rows):
        _diag("nonconvergence", "solver did not converge on some sweep points")
        return EXIT_NONCONVERGED
    return EXIT_OK


def _cmd_blackwell(args) -> int:
    if (args.input is None) == (args.scenario is None):
        raise UsageError("give exactly one of --input or --scenario")
    if args.scenario is not None:
        dist = generate_scenario(_spec(args))
        source = f"scenario:{args.scenario}"
    else:
        if args.yhat_col is None:
            raise UsageError("--yhat-col is required with --input")
        dist, _ = ingest_csv(args.input, args.z_col, args.y_col, args.yhat_col, args.smoothing)
        source = str(args.input)
    verdict = blackwell_check(dist, "z", args.sufficient)
    channel = None
    if verdict.channel is not None:
        channel = [[round(float(x), 6) for x in row] for row in verdict.channel]
    payload = {
        "source": source,
        "sufficient": verdict.sufficient,
        "degraded": verdict.degraded,
        "feasible": verdict.feasible,
        "residual": float(f"{verdict.residual:.6e}"),
        "channel": channel,
    }
    if args.format == "json":
        text = json.dumps(payload, indent=2) + "\n"
    else:
        text = "".join(f"{k:<11}{json.dumps(v)}\n" for k, v in payload.items())
    _emit(text, args.out)
    return EXIT_OK


COMMANDS = {"audit": _cmd_audit, "scenario": _cmd_scenario, "sweep": _cmd_sweep, "blackwell": _cmd_blackwell}


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        _diag("usage", str(exc))
        return EXIT_USAGE
    except ScenarioError as exc:
        _diag("scenario", str(exc))
        return EXIT_USAGE
    except EstimationError as exc:
        _diag("ingestion", str(exc))
        return EXIT_INGEST
    except OSError as exc:
        _diag("io", str(exc))
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
