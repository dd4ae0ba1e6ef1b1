"""Seeded Monte Carlo estimation with oracle comparison.

A Scenario names a session configuration, an optional strategy (declaratively,
by name plus parameter map), the quantity to estimate, and a trial count.
``run`` produces an Estimate with a binomial (or sample) standard error, the
matching closed-form oracle when one exists, and the z-score against it.

Per-trial randomness comes from counter-based streams derived from the master
seed and the trial index, so estimates are bit-identical for a given
(scenario, seed) regardless of execution order or parallelism.

Challenge ensembles: scenarios default to Haar challenges except for the
GHZ-share strategies, whose closed-form curves average over the real
amplitude circle; those default to the "real" ensemble. Either can be forced
via ``challenge_ensemble``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import analysis
from .adversary import EveStrategy, strategy_from_spec
from .protocol import (
    Challenge,
    RegisterMap,
    SessionConfig,
    SessionView,
    THETA_FIXED,
    alice_label,
    bob_label,
    make_challenge,
    make_real_challenge,
    run_session,
    run_single_challenge,
)
from .seeding import DOMAIN_TRIAL, derive_rng
from .states import Party, bell_pair, fidelity

QUANTITIES = ("acceptance", "pass", "detection", "key_fidelity")
SHARE_STRATEGIES = (
    "ghz_inject",
    "quarter_pi_key_steal",
    "fixed_angle_impersonate",
    "fixed_angle_key_steal",
)
KNOWN_ANGLE_STRATEGIES = ("fixed_angle_impersonate", "fixed_angle_key_steal")


@dataclass(frozen=True)
class StrategySpec:
    """Declarative strategy reference: name plus JSON-friendly parameters."""

    name: str
    params: dict = field(default_factory=dict)

    def build(self) -> EveStrategy:
        return strategy_from_spec(self.name, self.params)


@dataclass(frozen=True)
class Scenario:
    config: SessionConfig
    strategy: StrategySpec | None = None
    quantity: str = "acceptance"
    trials: int = 1000
    challenge_ensemble: str | None = None  # "haar" | "real"; None picks per strategy
    variance_reduced: bool = False

    def __post_init__(self) -> None:
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if self.quantity not in QUANTITIES:
            raise ValueError(f"unknown quantity {self.quantity!r}; known: {QUANTITIES}")
        if self.challenge_ensemble not in (None, "haar", "real"):
            raise ValueError("challenge_ensemble must be 'haar' or 'real'")
        if self.strategy is not None and self.strategy.name in KNOWN_ANGLE_STRATEGIES:
            if self.config.theta_mode != THETA_FIXED:
                raise ValueError(
                    f"{self.strategy.name} assumes a fixed, known rotation angle"
                )

    @property
    def ensemble(self) -> str:
        if self.challenge_ensemble is not None:
            return self.challenge_ensemble
        if self.strategy is not None and self.strategy.name in SHARE_STRATEGIES:
            return "real"
        return "haar"


@dataclass(frozen=True)
class Estimate:
    """Mean with binomial/sample error bars and optional oracle comparison."""

    mean: float
    se: float
    ci_low: float
    ci_high: float
    trials: int
    oracle: float | None
    z: float | None

    @classmethod
    def from_samples(
        cls, values: np.ndarray, bernoulli: bool, oracle: float | None
    ) -> "Estimate":
        n = values.size
        mean = float(values.mean())
        if bernoulli:
            se = math.sqrt(max(mean * (1.0 - mean), 0.0) / n)
        else:
            se = float(values.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
        z: float | None = None
        if oracle is not None:
            if se > 0.0:
                z = (mean - oracle) / se
            else:
                z = 0.0 if abs(mean - oracle) < 1e-12 else math.inf
        return cls(mean, se, mean - 1.96 * se, mean + 1.96 * se, n, oracle, z)

    def as_dict(self) -> dict:
        return {
            "mean": self.mean,
            "se": self.se,
            "ci_low": self.ci_low,
            "ci_high": self.ci_high,
            "trials": self.trials,
            "oracle": self.oracle,
            "z": self.z,
        }


def oracle_for(scenario: Scenario) -> float | None:
    """Closed-form value of the scenario's quantity, where one exists."""
    cfg = scenario.config
    name = scenario.strategy.name if scenario.strategy else None
    theta = cfg.theta if cfg.theta_mode == THETA_FIXED else None
    q = scenario.quantity

    if name is None:
        return {"acceptance": 1.0, "pass": 1.0, "detection": 0.0, "key_fidelity": 1.0}[q]
    if name == "random_impersonation":
        if q == "pass":
            return 0.5
        if q == "detection":
            return 0.5
        if q == "acceptance":
            return analysis.detection_bound(cfg.K_prime)
    if name in ("ghz_inject", "fixed_angle_impersonate"):
        if theta is None:
            det = 0.25  # uniform-theta average of sin^2/2
        elif name == "fixed_angle_impersonate":
            det = 1.0 - analysis.impersonation_success_probability(theta)
        else:
            det = analysis.ghz_detection_probability(theta)
        if q == "detection":
            return det
        if q == "pass":
            return 1.0 - det
    if name in ("quarter_pi_key_steal", "fixed_angle_key_steal") and theta is not None:
        quarter = abs(abs(np.cos(theta)) - abs(np.sin(theta))) < 1e-12
        if quarter and q in ("pass", "key_fidelity"):
            return 1.0
        if quarter and q == "detection":
            return 0.0
    return None


def _challenge_factory(scenario: Scenario):
    return make_real_challenge if scenario.ensemble == "real" else make_challenge


def _cleanup_round(registers: RegisterMap, tested, challenge: Challenge, outcome: bool) -> None:
    vec = (
        (challenge.a, challenge.b)
        if outcome
        else (np.conj(challenge.b), -np.conj(challenge.a))
    )
    registers.remove_qubit(tested, vec)


def _focused_trial(scenario: Scenario, rng: np.random.Generator) -> tuple[float, float | None]:
    """One per-challenge trial on a single pair; returns (prob_pass, outcome).

    Share-based strategies get a full injection round first (their share is
    acquired through the regular hooks), then the bilateral rotation of the
    next session, then the measured round.
    """
    cfg = scenario.config
    factory = _challenge_factory(scenario)
    theta = cfg.theta if cfg.theta_mode == THETA_FIXED else rng.uniform(0.0, 2.0 * np.pi)
    strategy = scenario.strategy.build() if scenario.strategy else None
    if strategy is not None:
        strategy.record_key_quality = scenario.quantity == "key_fidelity"

    registers = RegisterMap()
    a1, b1 = alice_label(1), bob_label(1)
    registers.add_state(bell_pair(a1, b1))
    view = SessionView(registers, rng, 1, 1)

    if strategy is not None and scenario.strategy.name in SHARE_STRATEGIES:
        # injection session: rotation (a no-op on the intact pair), one round
        strategy.session_start(view)
        registers.apply_rotation(a1, theta)
        registers.apply_rotation(b1, theta)
        ch = factory(rng, 1)
        res, tested = run_single_challenge(
            registers, 1, ch, Party.BOB, Party.ALICE, strategy, rng, rng
        )
        _cleanup_round(registers, tested, ch, bool(res.outcome))
        strategy.session_end(view)

    if strategy is not None:
        strategy.session_start(view)
    registers.apply_rotation(a1, theta)
    registers.apply_rotation(b1, theta)
    ch = factory(rng, 1)
    res, tested = run_single_challenge(
        registers, 1, ch, Party.BOB, Party.ALICE, strategy, rng, rng
    )
    _cleanup_round(registers, tested, ch, bool(res.outcome))
    if strategy is not None:
        strategy.session_end(view)

    if scenario.quantity == "key_fidelity":
        if strategy is not None and strategy.state.accumulated_key:
            return strategy.state.accumulated_key[-1][1], None
        return fidelity(bell_pair(a1, b1), registers.reduced_state((a1, b1))), None
    return res.prob_pass, bool(res.outcome)


def _trial_value(scenario: Scenario, seed: int, index: int) -> float:
    rng = derive_rng(seed, DOMAIN_TRIAL, index)
    if scenario.quantity == "acceptance":
        cfg = replace(scenario.config, seed=int(rng.integers(0, 2**62)))
        strategy = scenario.strategy.build() if scenario.strategy else None
        result = run_session(
            cfg,
            strategy,
            sample_outcomes=not scenario.variance_reduced,
            challenge_factory=_challenge_factory(scenario),
        )
        if scenario.variance_reduced:
            return result.pass_probability_product
        return 1.0 if result.accepted else 0.0

    prob, outcome = _focused_trial(scenario, rng)
    if scenario.quantity == "key_fidelity":
        return prob
    if scenario.variance_reduced:
        value = prob
    else:
        value = 1.0 if outcome else 0.0
    return value if scenario.quantity == "pass" else 1.0 - value


def run(scenario: Scenario, seed: int) -> Estimate:
    """Estimate the scenario's quantity over seeded independent trials."""
    values = np.fromiter(
        (_trial_value(scenario, seed, t) for t in range(scenario.trials)),
        dtype=float,
        count=scenario.trials,
    )
    bernoulli = scenario.quantity != "key_fidelity" and not scenario.variance_reduced
    return Estimate.from_samples(values, bernoulli, oracle_for(scenario))


@dataclass(frozen=True)
class SweepPoint:
    theta: float
    estimate: Estimate


def sweep(scenario: Scenario, parameter: str, grid, seed: int) -> list[SweepPoint]:
    """Run the scenario across a grid of fixed rotation angles.

    Each point re-fixes the session angle and, for strategies that know the
    angle, their matching parameter; the per-point oracle comes along in the
    Estimate.
    """
    if parameter != "theta":
        raise ValueError("only theta sweeps are supported")
    points = []
    for theta in grid:
        cfg = replace(scenario.config, theta_mode=THETA_FIXED, theta=float(theta))
        strat = scenario.strategy
        if strat is not None and strat.name in KNOWN_ANGLE_STRATEGIES + ("quarter_pi_key_steal",):
            params = dict(strat.params)
            params["theta"] = float(theta)
            strat = StrategySpec(strat.name, params)
        point = replace(scenario, config=cfg, strategy=strat)
        points.append(SweepPoint(float(theta), run(point, seed)))
    return points
