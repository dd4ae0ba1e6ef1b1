"""Declarative scenario files and deterministic report rendering.

Scenario files are JSON with fields
{K, K_prime, theta_mode, theta, strategy, strategy_params, quantity, trials,
 seed, challenge_ensemble}; strategies are referenced by name plus a parameter
map, never by code. Reports are {schema_version, config_echo, results[]} in
JSON, or a flat CSV projection of results[]. Rendering is byte-deterministic:
keys are sorted, floats use repr round-tripping, no timestamps.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import replace

from .montecarlo import Estimate, Scenario, StrategySpec, run
from .protocol import RoundResult, SessionConfig

SCHEMA_VERSION = 1


def scenario_from_dict(raw: dict) -> Scenario:
    """Validate and build a Scenario from a parsed scenario file."""
    if not isinstance(raw, dict):
        raise ValueError("scenario file must hold a JSON object")
    known = {
        "K",
        "K_prime",
        "theta_mode",
        "theta",
        "seed",
        "strategy",
        "strategy_params",
        "quantity",
        "trials",
        "challenge_ensemble",
        "variance_reduced",
    }
    unknown = set(raw) - known
    if unknown:
        raise ValueError(f"unknown scenario fields: {sorted(unknown)}")
    try:
        config = SessionConfig(
            K=int(raw["K"]),
            K_prime=int(raw["K_prime"]),
            theta_mode=raw.get("theta_mode", "random"),
            theta=None if raw.get("theta") is None else float(raw["theta"]),
            seed=int(raw.get("seed", 0)),
        )
    except KeyError as missing:
        raise ValueError(f"scenario file is missing required field {missing}") from None
    strategy = None
    if raw.get("strategy"):
        strategy = StrategySpec(str(raw["strategy"]), dict(raw.get("strategy_params") or {}))
    return Scenario(
        config=config,
        strategy=strategy,
        quantity=raw.get("quantity", "acceptance"),
        trials=int(raw.get("trials", 1000)),
        challenge_ensemble=raw.get("challenge_ensemble"),
        variance_reduced=bool(raw.get("variance_reduced", False)),
    )


def apply_overrides(scenario: Scenario, seed: int | None, trials: int | None) -> Scenario:
    """Command-line --seed/--trials take precedence over file values."""
    if seed is not None:
        scenario = replace(scenario, config=replace(scenario.config, seed=int(seed)))
    if trials is not None:
        scenario = replace(scenario, trials=int(trials))
    return scenario


def config_echo(scenario: Scenario) -> dict:
    cfg = scenario.config
    return {
        "K": cfg.K,
        "K_prime": cfg.K_prime,
        "theta_mode": cfg.theta_mode,
        "theta": cfg.theta,
        "seed": cfg.seed,
        "strategy": scenario.strategy.name if scenario.strategy else None,
        "strategy_params": scenario.strategy.params if scenario.strategy else {},
        "quantity": scenario.quantity,
        "trials": scenario.trials,
        "challenge_ensemble": scenario.ensemble,
        "variance_reduced": scenario.variance_reduced,
    }


def estimate_report(scenario: Scenario) -> dict:
    """Run the scenario and wrap the Estimate as a one-row report."""
    estimate = run(scenario, scenario.config.seed)
    row = {"record": "estimate", "quantity": scenario.quantity, **estimate.as_dict()}
    return {
        "schema_version": SCHEMA_VERSION,
        "config_echo": config_echo(scenario),
        "results": [row],
    }


def sweep_report(scenario: Scenario, points: list) -> dict:
    rows = [
        {"record": "estimate", "quantity": scenario.quantity, "theta": p.theta,
         **p.estimate.as_dict()}
        for p in points
    ]
    return {
        "schema_version": SCHEMA_VERSION,
        "config_echo": config_echo(scenario),
        "results": rows,
    }


def session_report(scenario: Scenario, result: RoundResult) -> dict:
    rows: list[dict] = [
        {
            "record": "session",
            "verdict": result.verdict,
            "abort_reason": result.abort_reason,
            "keys_retained": result.keys_retained,
            "retained_indices": list(result.retained_indices),
            "discarded_indices": list(result.discarded_indices),
            "pass_probability_product": result.pass_probability_product,
            "analytic_acceptance": result.analytic_acceptance,
        }
    ]
    for rec in result.records:
        rows.append(
            {
                "record": "challenge",
                "pair_index": rec.pair_index,
                "prob_pass": rec.prob_pass,
                "outcome": rec.outcome,
            }
        )
    return {
        "schema_version": SCHEMA_VERSION,
        "config_echo": config_echo(scenario),
        "results": rows,
    }


def check_report(results) -> dict:
    rows = [
        {"record": "check", "name": r.name, "passed": r.passed, "detail": r.detail, **r.values}
        for r in results
    ]
    return {
        "schema_version": SCHEMA_VERSION,
        "config_echo": {},
        "results": rows,
    }


def render_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True, default=_jsonify) + "\n"


def _jsonify(value):
    if hasattr(value, "item"):  # numpy scalars
        return value.item()
    raise TypeError(f"cannot serialize {type(value)!r}")


def render_csv(report: dict) -> str:
    """Flat projection of results[]: the union of row fields, sorted."""
    rows = report["results"]
    fields = sorted({key for row in rows for key in row})
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=fields, restval="", lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: _csv_cell(v) for k, v in row.items()})
    return buf.getvalue()


def _csv_cell(value):
    if isinstance(value, (list, tuple)):
        return ";".join(str(v) for v in value)
    if value is None:
        return ""
    return value
