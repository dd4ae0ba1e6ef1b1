"""Verification battery: every published security figure against simulation.

Each check pits a closed-form result from the analysis module against the
simulator (protocol + adversary + montecarlo) at a stated tolerance and
returns a CheckResult. ``run_all`` executes the battery; the CLI's
reproduce-paper command prints it as a table and the acceptance test suite
asserts each row.

Monte Carlo rows use fixed seeds, so the suite is deterministic; the 4-sigma
tolerances leave roughly a 6e-5 per-row false-alarm budget had the seeds been
drawn fresh.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import adversary, analysis, montecarlo, reports, states
from .montecarlo import Scenario, StrategySpec
from .protocol import (
    SessionConfig,
    alice_label,
    bob_label,
    make_challenge,
    run_session,
    setup_keys,
)
from .seeding import derive_rng
from .states import bell_pair, fidelity

DEFAULT_SEED = 20260810


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str
    values: dict

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        return f"[{flag}] {self.name}: {self.detail}"


def check_bilateral_invariance(seed: int = DEFAULT_SEED) -> CheckResult:
    """Rotating both halves of the shared pair by any common angle is a no-op."""
    rng = derive_rng(seed, 1)
    a, b = alice_label(1), bob_label(1)
    pair = bell_pair(a, b)
    worst = 0.0
    for _ in range(1000):
        theta = rng.uniform(0.0, 2.0 * np.pi)
        rotated = states.apply_rotation(states.apply_rotation(pair, a, theta), b, theta)
        worst = max(worst, float(np.abs(rotated.amplitudes - pair.amplitudes).max()))
    return CheckResult(
        "bilateral-invariance",
        worst < 1e-12,
        f"max deviation {worst:.2e} over 1000 angles (tol 1e-12)",
        {"max_deviation": worst},
    )


def check_honest_completeness(seed: int = DEFAULT_SEED, sessions: int = 1000) -> CheckResult:
    """Honest sessions always accept, with exact per-challenge pass probability 1
    and every key pair returned to the shared state."""
    rng = derive_rng(seed, 2)
    worst_prob = 1.0
    worst_fid = 1.0
    accepted = 0
    for s in range(sessions):
        K = int(rng.integers(1, 6))
        K_prime = int(rng.integers(1, K + 1))
        if s % 2 == 0:
            cfg = SessionConfig(K, K_prime, seed=int(rng.integers(2**62)))
        else:
            cfg = SessionConfig(
                K, K_prime, theta_mode="fixed", theta=float(rng.uniform(0, 2 * np.pi)),
                seed=int(rng.integers(2**62)),
            )
        keys = setup_keys(cfg)
        result = run_session(cfg, keys=keys)
        accepted += result.accepted
        worst_prob = min(worst_prob, min(rec.prob_pass for rec in result.records))
        registers = keys[2]
        for i in range(1, 2 * K + 1):
            la, lb = alice_label(i), bob_label(i)
            fid = fidelity(bell_pair(la, lb), registers.reduced_state((la, lb)))
            worst_fid = min(worst_fid, fid)
    passed = accepted == sessions and worst_prob > 1 - 1e-12 and worst_fid > 1 - 1e-12
    return CheckResult(
        "honest-completeness",
        passed,
        f"{accepted}/{sessions} accepted; min prob_pass {worst_prob:.15f}; "
        f"min key fidelity {worst_fid:.15f} (tol 1e-12)",
        {"accepted": accepted, "sessions": sessions,
         "min_prob_pass": worst_prob, "min_key_fidelity": worst_fid},
    )


def check_impersonation_average(seed: int = DEFAULT_SEED, trials: int = 100_000) -> CheckResult:
    """Keyless impersonation passes a Haar challenge half the time."""
    scenario = Scenario(
        SessionConfig(K=1, K_prime=1),
        StrategySpec("random_impersonation"),
        "pass",
        trials=trials,
        challenge_ensemble="haar",
    )
    est = montecarlo.run(scenario, seed)
    passed = abs(est.mean - 0.5) <= 0.01
    return CheckResult(
        "impersonation-average",
        passed,
        f"pass rate {est.mean:.4f} (target 0.5 +- 0.01, {trials} trials)",
        {"estimate": est.as_dict()},
    )


def check_detection_bound(seed: int = DEFAULT_SEED) -> CheckResult:
    """Surviving K'=20 challenges without the key has probability (1/2)^20."""
    k = 20
    cfg = SessionConfig(K=k, K_prime=k, seed=seed)
    result = run_session(cfg, adversary.RandomImpersonation(), sample_outcomes=False)
    bound = analysis.detection_bound(k)
    rel = abs(result.analytic_acceptance - bound) / bound
    rel2 = abs(bound - 0.5**k) / bound
    passed = rel <= 1e-15 and rel2 <= 1e-15
    return CheckResult(
        "impersonation-detection-bound",
        passed,
        f"analytic acceptance {result.analytic_acceptance:.3e} vs (1/2)^{k} "
        f"(rel err {rel:.1e}, tol 1e-15); realized product this run "
        f"{result.pass_probability_product:.3e}",
        {"analytic_acceptance": result.analytic_acceptance, "bound": bound,
         "pass_probability_product": result.pass_probability_product},
    )


def check_ghz_exact_curve(seed: int = DEFAULT_SEED, angles: int = 100) -> CheckResult:
    """Exact detection of a stale GHZ share equals sin^2(theta)/2."""
    rng = derive_rng(seed, 3)
    worst = 0.0
    for _ in range(angles):
        theta = rng.uniform(0.0, 2.0 * np.pi)
        exact = adversary.ghz_detection_exact(theta)
        worst = max(worst, abs(exact - analysis.ghz_detection_probability(theta)))
    return CheckResult(
        "ghz-detection-curve",
        worst < 1e-12,
        f"max |evolution - closed form| {worst:.2e} over {angles} angles (tol 1e-12)",
        {"max_deviation": worst, "angles": angles},
    )


def check_ghz_average(seed: int = DEFAULT_SEED, trials: int = 100_000) -> CheckResult:
    """Uniform-angle mean detection of the GHZ exploit is 1/4."""
    scenario = Scenario(
        SessionConfig(K=1, K_prime=1),
        StrategySpec("ghz_inject"),
        "detection",
        trials=trials,
    )
    est = montecarlo.run(scenario, seed)
    passed = abs(est.mean - 0.25) <= 0.01
    return CheckResult(
        "ghz-average-detection",
        passed,
        f"detection rate {est.mean:.4f} (target 0.25 +- 0.01, {trials} trials)",
        {"estimate": est.as_dict()},
    )


def check_quarter_pi_theft(seed: int = DEFAULT_SEED) -> CheckResult:
    """At the quarter-pi angle the theft leaves (Bob, Eve) exactly on the
    shared-pair state and the verification still passes with certainty."""
    challenge = make_challenge(derive_rng(seed, 4), 1)
    out = adversary.quarter_pi_steal_outcome(np.pi / 4, challenge)
    # end-to-end: the session-level strategy over two sessions
    cfg = SessionConfig(K=1, K_prime=1, theta_mode="fixed", theta=np.pi / 4, seed=seed)
    eve = adversary.QuarterPiKeySteal()
    keys = setup_keys(cfg)
    run_session(cfg, eve, keys=keys)
    r2 = run_session(cfg, eve, keys=keys)
    session_fid = eve.state.accumulated_key[-1][1] if eve.state.accumulated_key else 0.0
    session_prob = r2.records[0].prob_pass
    passed = (
        abs(out.key_fidelity - 1.0) < 1e-12
        and abs(out.pass_probability - 1.0) < 1e-12
        and abs(session_fid - 1.0) < 1e-12
        and abs(session_prob - 1.0) < 1e-12
        and r2.accepted
    )
    return CheckResult(
        "quarter-pi-key-theft",
        passed,
        f"stolen-pair fidelity {out.key_fidelity:.15f}; verification pass "
        f"probability {out.pass_probability:.15f} (tol 1e-12)",
        {"key_fidelity": out.key_fidelity, "pass_probability": out.pass_probability,
         "session_fidelity": session_fid, "session_prob_pass": session_prob},
    )


def _theta_grid(points: int = 33) -> np.ndarray:
    return np.linspace(0.0, np.pi / 2, points)


def check_impersonation_curve(
    seed: int = DEFAULT_SEED, points: int = 33, trials: int = 10_000
) -> CheckResult:
    """Sampled fixed-angle impersonation pass rate tracks the closed-form
    curve within 4 sigma at every grid angle."""
    scenario = Scenario(
        SessionConfig(K=1, K_prime=1, theta_mode="fixed", theta=0.0),
        StrategySpec("fixed_angle_impersonate", {"theta": 0.0}),
        "pass",
        trials=trials,
    )
    sweep = montecarlo.sweep(scenario, "theta", _theta_grid(points), seed)
    worst = 0.0
    for point in sweep:
        z = point.estimate.z
        if z is None or not math.isfinite(z):
            worst = math.inf
            break
        worst = max(worst, abs(z))
    passed = worst <= 4.0
    return CheckResult(
        "impersonation-success-curve",
        passed,
        f"max |z| {worst:.2f} over {points} angles x {trials} trials (tol 4 sigma)",
        {"max_abs_z": worst, "points": points, "trials": trials},
    )


def check_theft_curve(seed: int = DEFAULT_SEED, points: int = 33) -> CheckResult:
    """Grid-plus-refinement maximum of the theft fidelity matches the closed
    form within 1e-4 at every grid angle."""
    worst = 0.0
    for theta in _theta_grid(points):
        best = adversary.best_key_steal(float(theta))
        worst = max(worst, abs(best.fidelity - analysis.key_theft_success_probability(theta)))
    return CheckResult(
        "key-theft-curve",
        worst <= 1e-4,
        f"max |grid max - closed form| {worst:.2e} over {points} angles (tol 1e-4)",
        {"max_deviation": worst, "points": points},
    )


def check_optimal_angle(seed: int = DEFAULT_SEED) -> CheckResult:
    """Balancing impersonation against theft gives |cos| in {2/sqrt5, 1/sqrt5}
    with common success probability 9/10."""
    opt = analysis.optimal_fixed_angle()
    targets = (2.0 / np.sqrt(5.0), 1.0 / np.sqrt(5.0))
    cos_err = max(abs(opt.cos_values[0] - targets[0]), abs(opt.cos_values[1] - targets[1]))
    p_err = abs(opt.success - 0.9)
    resid = max(opt.residuals)
    passed = cos_err < 1e-10 and p_err < 1e-12 and resid < 1e-10
    return CheckResult(
        "optimal-fixed-angle",
        passed,
        f"|cos| = {opt.cos_values[0]:.6f}, {opt.cos_values[1]:.6f}; "
        f"success = {opt.success:.6f} (errors {cos_err:.1e}, {p_err:.1e})",
        {"cos_values": list(opt.cos_values), "success": opt.success,
         "cos_error": cos_err, "success_error": p_err, "residual": resid},
    )


def check_robustness(seed: int = DEFAULT_SEED, draws: int = 100) -> CheckResult:
    """Worn keys: failure probability <= eps, fidelity >= 1 - eps, and
    distance <= 2 sqrt(eps), for eps in {0.01, 0.1, 0.25}."""
    rng = derive_rng(seed, 5)
    failures = []
    worst_margin = math.inf
    for eps in (0.01, 0.1, 0.25):
        for _ in range(draws):
            rho1 = analysis.random_density_matrix(rng)
            challenge = make_challenge(rng, 1)
            rep = analysis.robustness_bounds(eps, rho1, challenge=challenge)
            if not rep.within_bounds:
                failures.append((eps, rep))
            worst_margin = min(
                worst_margin,
                rep.failure_bound - rep.failure_probability,
                rep.key_fidelity - rep.fidelity_floor,
                rep.distance_bound - rep.distance,
                rep.post_key_fidelity - rep.fidelity_floor,
            )
    passed = not failures
    return CheckResult(
        "robustness-bounds",
        passed,
        f"{3 * draws} mixtures within bounds; tightest margin {worst_margin:.3e} "
        f"(tol 1e-10)",
        {"violations": len(failures), "tightest_margin": worst_margin, "draws": 3 * draws},
    )


def check_formula_cross_validation(
    seed: int = DEFAULT_SEED, samples: int = 1000, average_samples: int = 20_000
) -> CheckResult:
    """The literal impersonation-fidelity formula against decode-path
    evolution: pointwise agreement quantified, Haar averages both 0.5."""
    report = analysis.validate_impersonation_formula(samples, seed)
    rng = derive_rng(seed, 6)
    closed_sum = direct_sum = 0.0
    for k in range(average_samples):
        challenge = make_challenge(rng, k)
        guess = make_challenge(rng, k)
        ensemble = adversary.ResponseEnsemble.single(guess.a, guess.b)
        closed_sum += analysis.impersonation_fidelity(challenge, ensemble)
        direct_sum += adversary.impersonation_pass_probability(challenge, ensemble)
    closed_mean = closed_sum / average_samples
    direct_mean = direct_sum / average_samples
    passed = abs(closed_mean - 0.5) <= 0.01 and abs(direct_mean - 0.5) <= 0.01
    return CheckResult(
        "impersonation-formula-cross-validation",
        passed,
        f"max pointwise |closed - evolution| {report.abs_diff:.2e} over {samples} draws; "
        f"Haar means {closed_mean:.4f} (closed) / {direct_mean:.4f} (evolution), "
        f"target 0.5 +- 0.01",
        {"max_pointwise_diff": report.abs_diff, "closed_mean": closed_mean,
         "evolution_mean": direct_mean, "samples": samples,
         "average_samples": average_samples},
    )


def check_determinism(seed: int = DEFAULT_SEED) -> CheckResult:
    """The same estimate invocation twice renders byte-identical reports."""
    scenario = reports.scenario_from_dict(
        {
            "K": 1,
            "K_prime": 1,
            "strategy": "ghz_inject",
            "quantity": "detection",
            "trials": 500,
            "seed": seed,
        }
    )
    first = reports.render_json(reports.estimate_report(scenario))
    second = reports.render_json(reports.estimate_report(scenario))
    csv_first = reports.render_csv(reports.estimate_report(scenario))
    csv_second = reports.render_csv(reports.estimate_report(scenario))
    passed = first == second and csv_first == csv_second
    return CheckResult(
        "estimate-determinism",
        passed,
        "byte-identical JSON and CSV reports for repeated runs"
        if passed
        else "reports differ between identical runs",
        {"json_bytes": len(first)},
    )


ALL_CHECKS = (
    check_bilateral_invariance,
    check_honest_completeness,
    check_impersonation_average,
    check_detection_bound,
    check_ghz_exact_curve,
    check_ghz_average,
    check_quarter_pi_theft,
    check_impersonation_curve,
    check_theft_curve,
    check_optimal_angle,
    check_robustness,
    check_formula_cross_validation,
    check_determinism,
)


def run_all(seed: int = DEFAULT_SEED) -> list[CheckResult]:
    return [check(seed) for check in ALL_CHECKS]
