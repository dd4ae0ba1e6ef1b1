"""Command-line front end: scenario files in, deterministic reports out.

Commands:

- ``session``  run one authentication session from a scenario file.
  Exit 0 when accepted, 1 when aborted, 2 on a configuration error.
- ``estimate`` Monte Carlo estimate of the scenario's quantity, with the
  closed-form oracle and z-score when one exists. Exit 0, or 2 on error.
- ``reproduce-paper`` run the built-in verification battery (closed-form
  security and robustness figures vs simulation) and print one pass/fail
  line per claim. Exit 0 iff every row passes.

All randomness flows from --seed (or the scenario file's seed). Reports carry
a schema_version field and render byte-identically for identical inputs.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace

from . import checks, montecarlo, reports
from .protocol import run_session


def _write_output(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _load_scenario(args) -> "montecarlo.Scenario":
    with open(args.scenario, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    scenario = reports.scenario_from_dict(raw)
    return reports.apply_overrides(scenario, args.seed, getattr(args, "trials", None))


def _render(report: dict, fmt: str) -> str:
    return reports.render_csv(report) if fmt == "csv" else reports.render_json(report)


def cmd_session(args) -> int:
    scenario = _load_scenario(args)
    strategy = scenario.strategy.build() if scenario.strategy else None
    result = run_session(scenario.config, strategy)
    report = reports.session_report(scenario, result)
    _write_output(_render(report, args.format), args.out)
    return 0 if result.accepted else 1


def cmd_estimate(args) -> int:
    scenario = _load_scenario(args)
    report = reports.estimate_report(scenario)
    _write_output(_render(report, args.format), args.out)
    return 0


def cmd_reproduce_paper(args) -> int:
    results = []
    for check in checks.ALL_CHECKS:
        result = check(args.seed if args.seed is not None else checks.DEFAULT_SEED)
        results.append(result)
        print(result.line())
    if args.out is not None:
        _write_output(_render(reports.check_report(results), args.format), args.out)
    failed = [r.name for r in results if not r.passed]
    if failed:
        print(f"{len(failed)} check(s) failed: {', '.join(failed)}")
        return 1
    print(f"all {len(results)} checks passed")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="eprauth",
        description="Simulate and analyze the shared-pair authentication protocol.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_scenario: bool = True) -> None:
        if needs_scenario:
            p.add_argument("--scenario", required=True, help="path to a JSON scenario file")
        p.add_argument("--seed", type=int, default=None, help="override the master seed")
        p.add_argument(
            "--format", choices=("json", "csv"), default="json", help="report format"
        )
        p.add_argument("--out", default=None, help="write the report here (default stdout)")

    p = sub.add_parser("session", help="run one authentication session")
    common(p)
    p.set_defaults(func=cmd_session)

    p = sub.add_parser("estimate", help="Monte Carlo estimate with oracle comparison")
    common(p)
    p.add_argument("--trials", type=int, default=None, help="override the trial count")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser(
        "reproduce-paper",
        help="run every closed-form-vs-simulation verification check",
    )
    common(p, needs_scenario=False)
    p.set_defaults(func=cmd_reproduce_paper)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, KeyError, OSError, json.JSONDecodeError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
