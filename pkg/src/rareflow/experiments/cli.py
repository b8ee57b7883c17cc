"""Command-line harness.

Subcommands: ``run <config.json>``, ``table <report.json>``, and the
convenience checks ``bound-check``, ``mixing-check``, ``gf-check``.
Exit codes: 0 all declared tolerances passed, 1 a tolerance failed,
2 configuration or runtime error.
"""

from __future__ import annotations

import argparse
import sys

from .config import ConfigError, ScenarioConfig, default_config
from .report import ExperimentReport, convergence_table, emit_report
from .scenarios import run_scenario

_CHECK_KINDS = {
    "bound-check": "statement_bound_sweep",
    "mixing-check": "mixing_zero_check",
    "gf-check": "gf_consistency",
}


def _add_run_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=None, help="master seed (u64)")
    parser.add_argument("--reps", type=int, default=None, help="replication count")
    parser.add_argument("--out", type=str, default=None, help="output directory")
    parser.add_argument("--workers", type=int, default=None, help="worker processes")
    parser.add_argument("--format", choices=("json", "csv", "both"), default="both",
                        help="report file format")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rareflow",
        description="Seeded Monte Carlo experiments for thinned renewal subflows.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a scenario from a JSON config")
    run_p.add_argument("config", help="path to the scenario config (JSON)")
    _add_run_flags(run_p)

    table_p = sub.add_parser("table", help="print the convergence table of a report")
    table_p.add_argument("report", help="path to a report JSON file")

    for name, kind in _CHECK_KINDS.items():
        check_p = sub.add_parser(name, help=f"run the default {kind} scenario")
        _add_run_flags(check_p)
        if name == "bound-check":
            check_p.add_argument("--configs", type=int, default=None,
                                 help="number of random configurations")
    return parser


def _apply_overrides(config: ScenarioConfig, args) -> ScenarioConfig:
    payload = config.to_json()
    if args.seed is not None:
        payload["seed"] = args.seed
    if args.reps is not None:
        payload["replications"] = args.reps
    if args.workers is not None:
        payload["workers"] = args.workers
    if args.out is not None:
        payload["out_dir"] = args.out
    if getattr(args, "configs", None) is not None:
        payload["options"]["n_configs"] = args.configs
    payload["out_dir"] = payload.get("out_dir")  # may stay None: no files
    return ScenarioConfig.from_json(payload)


def _formats(args) -> tuple:
    return ("json", "csv") if args.format == "both" else (args.format,)


def _run_and_report(config: ScenarioConfig, args) -> int:
    # emit explicitly so --format is honored
    out_dir, config.out_dir = config.out_dir, None
    report = run_scenario(config)
    if out_dir:
        paths = emit_report(report, out_dir, _formats(args))
        for p in paths:
            print(f"wrote {p}")
    status = "PASS" if report.passed else "FAIL"
    if report.incomplete:
        status = "INCOMPLETE"
    print(f"[{report.kind}] seed={report.seed} reps={report.config['replications']} "
          f"wall={report.wall_seconds:.1f}s -> {status}")
    for key, value in report.summary.items():
        print(f"  {key}: {value}")
    if report.incomplete:
        return 2
    return 0 if report.passed else 1


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            config = ScenarioConfig.from_json(args.config)
            return _run_and_report(_apply_overrides(config, args), args)
        if args.command == "table":
            table = convergence_table(ExperimentReport.from_json(args.report))
            print(table["text"])
            return 0
        if args.command in _CHECK_KINDS:
            config = _apply_overrides(default_config(_CHECK_KINDS[args.command]), args)
            return _run_and_report(config, args)
        raise AssertionError(args.command)
    except ConfigError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except (OSError, ValueError, KeyError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
