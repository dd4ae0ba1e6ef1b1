"""Closed-form security and robustness oracles, with brute-force cross-checks.

Every formula here has an independent state-evolution counterpart in the
adversary or protocol module. The ``validate_*`` functions evaluate both
routes on random inputs and report the largest deviation in an OracleReport;
differences are always surfaced, never suppressed.

Averaging conventions: wherever a rotation or challenge angle is "chosen at
random", the uniform distribution on [0, 2pi) is meant. The impersonation
fidelity averages to 1/2 over Haar (complex) challenges; the entangling-attack
curves (ghz_detection_probability, impersonation_success_probability,
key_theft_success_probability) average the wrong-branch overlap over the real
amplitude circle, where its mean is exactly 1/2.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from . import adversary
from .adversary import ResponseEnsemble, _AlwaysPass, best_key_steal
from .protocol import (
    Challenge,
    RegisterMap,
    alice_label,
    bob_label,
    challenge_label,
    make_challenge,
    verifier_decode_and_test,
    identifier_encode,
)
from .seeding import derive_rng
from .states import MixedState, Party, bell_pair, fidelity, to_density, trace_distance


@dataclass(frozen=True)
class OracleReport:
    """Closed form vs independent numeric value for one quantity.

    ``closed_form`` and ``numeric`` are means over the sampled inputs;
    ``abs_diff`` is the largest pointwise |closed - numeric| seen.
    """

    quantity: str
    closed_form: float
    numeric: float
    abs_diff: float

    def as_dict(self) -> dict:
        return {
            "quantity": self.quantity,
            "closed_form": self.closed_form,
            "numeric": self.numeric,
            "abs_diff": self.abs_diff,
        }


def impersonation_fidelity(challenge: Challenge, ensemble: ResponseEnsemble) -> float:
    """Literal closed form for a keyless response's pass probability:
    1/2 + sum_k p_k [Re(a* b a'_k b'_k*) + Re(a* b a'_k* b'_k)].

    The brute-force counterpart is adversary.impersonation_pass_probability;
    validate_impersonation_formula compares them.
    """
    a, b = challenge.a, challenge.b
    cross = 0.0
    for p, a2, b2 in ensemble.components:
        cross += p * (
            (np.conj(a) * b * a2 * np.conj(b2)).real
            + (np.conj(a) * b * np.conj(a2) * b2).real
        )
    return 0.5 + cross


def detection_bound(k_prime: int) -> float:
    """Average probability that a keyless impersonation survives K' challenges."""
    if k_prime < 0:
        raise ValueError("K' must be nonnegative")
    return 0.5 ** k_prime


def ghz_detection_probability(theta: float) -> float:
    """Per-challenge detection of a stale GHZ share after one bilateral
    rotation by theta: sin(theta)^2 / 2. Uniform-theta average is 1/4."""
    return 0.5 * np.sin(theta) ** 2


def impersonation_success_probability(theta: float) -> float:
    """Best fixed-angle impersonation pass rate with a GHZ share:
    max(1 - sin^2/2, 1 - cos^2/2)."""
    s2, c2 = np.sin(theta) ** 2, np.cos(theta) ** 2
    return max(1.0 - 0.5 * s2, 1.0 - 0.5 * c2)


def key_theft_success_probability(theta: float) -> float:
    """Best achievable (Bob, Eve) fidelity for the fixed-angle key theft:
    (|cos| + |sin|)^2 / 2."""
    return 0.5 * (abs(np.cos(theta)) + abs(np.sin(theta))) ** 2


@dataclass(frozen=True)
class OptimalAngle:
    """Fixed angle balancing impersonation against key theft."""

    thetas: tuple[float, float]
    cos_values: tuple[float, float]
    success: float
    residuals: tuple[float, float]


def optimal_fixed_angle() -> OptimalAngle:
    """Solve impersonation = theft success on [0, pi/2] by bisection.

    Two symmetric roots exist, one on each side of pi/4, with
    |cos theta| in {2/sqrt(5), 1/sqrt(5)} and common success 9/10.
    """

    def gap(theta: float) -> float:
        return impersonation_success_probability(theta) - key_theft_success_probability(theta)

    lo = brentq(gap, 1e-9, np.pi / 4 - 1e-9, xtol=1e-14)
    hi = brentq(gap, np.pi / 4 + 1e-9, np.pi / 2 - 1e-9, xtol=1e-14)
    return OptimalAngle(
        thetas=(lo, hi),
        cos_values=(abs(np.cos(lo)), abs(np.cos(hi))),
        success=float(impersonation_success_probability(lo)),
        residuals=(abs(gap(lo)), abs(gap(hi))),
    )


def random_density_matrix(rng: np.random.Generator, dim: int = 4) -> np.ndarray:
    """Hilbert-Schmidt random density matrix (normalized Ginibre product)."""
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


@dataclass(frozen=True)
class RobustnessReport:
    """One honest round on a worn key (1-eps)|pair><pair| + eps*rho1."""

    epsilon: float
    failure_probability: float
    failure_bound: float        # eps
    key_fidelity: float         # F(shared pair, worn key), exact
    fidelity_floor: float       # 1 - eps
    distance: float             # Tr|pair - worn key|
    distance_bound: float       # 2 sqrt(eps)
    post_key_fidelity: float    # same fidelity after a passed round

    @property
    def within_bounds(self) -> bool:
        tol = 1e-10
        return (
            self.failure_probability <= self.failure_bound + tol
            and self.key_fidelity >= self.fidelity_floor - tol
            and self.distance <= self.distance_bound + tol
            and self.post_key_fidelity >= self.fidelity_floor - tol
        )


def robustness_bounds(
    epsilon: float,
    rho1: np.ndarray,
    challenge: Challenge | None = None,
    seed: int = 0,
) -> RobustnessReport:
    """Build the eps-mixture, run one honest round on it exactly, and compare
    the measured failure probability and distances against the bounds."""
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError("epsilon must lie in [0, 1]")
    a, b = alice_label(1), bob_label(1)
    ideal = bell_pair(a, b)
    mixture = (1.0 - epsilon) * to_density(ideal).matrix + epsilon * np.asarray(rho1, complex)
    worn = MixedState((a, b), mixture)

    key_fid = fidelity(ideal, worn)
    dist = trace_distance(ideal, worn)

    if challenge is None:
        challenge = make_challenge(derive_rng(seed, 0xB0), 1)
    registers = RegisterMap()
    registers.add_state(worn)
    gamma = challenge_label(1)
    registers.add_qubit(gamma, (challenge.a, challenge.b))
    identifier_encode(registers, 1, gamma, Party.ALICE)
    # collapse onto the pass branch to inspect the post-round key state
    result = verifier_decode_and_test(registers, 1, gamma, challenge, Party.BOB, rng=_AlwaysPass())
    post_fid = fidelity(ideal, registers.reduced_state((a, b)))

    return RobustnessReport(
        epsilon=epsilon,
        failure_probability=1.0 - result.prob_pass,
        failure_bound=epsilon,
        key_fidelity=key_fid,
        fidelity_floor=1.0 - epsilon,
        distance=dist,
        distance_bound=2.0 * np.sqrt(epsilon),
        post_key_fidelity=post_fid,
    )


def _random_ensemble(rng: np.random.Generator) -> ResponseEnsemble:
    p = rng.uniform()
    comps = []
    for weight in (p, 1.0 - p):
        v = rng.normal(size=2) + 1j * rng.normal(size=2)
        v /= np.linalg.norm(v)
        comps.append((weight, complex(v[0]), complex(v[1])))
    return ResponseEnsemble(tuple(comps))


def validate_impersonation_formula(samples: int = 1000, seed: int = 0) -> OracleReport:
    """Literal fidelity formula vs decode-path evolution on random
    (challenge, ensemble) pairs."""
    rng = derive_rng(seed, 0xF0)
    worst, sum_closed, sum_direct = 0.0, 0.0, 0.0
    for k in range(samples):
        challenge = make_challenge(rng, k)
        ensemble = _random_ensemble(rng)
        closed = impersonation_fidelity(challenge, ensemble)
        direct = adversary.impersonation_pass_probability(challenge, ensemble)
        worst = max(worst, abs(closed - direct))
        sum_closed += closed
        sum_direct += direct
    return OracleReport(
        "impersonation pass probability",
        sum_closed / samples,
        sum_direct / samples,
        worst,
    )


def validate_ghz_detection(samples: int = 100, seed: int = 0) -> OracleReport:
    """sin^2/2 curve vs exact challenge-averaged evolution at random angles."""
    rng = derive_rng(seed, 0xF1)
    worst, sum_closed, sum_direct = 0.0, 0.0, 0.0
    for _ in range(samples):
        theta = rng.uniform(0.0, 2.0 * np.pi)
        closed = ghz_detection_probability(theta)
        direct = adversary.ghz_detection_exact(theta)
        worst = max(worst, abs(closed - direct))
        sum_closed += closed
        sum_direct += direct
    return OracleReport("ghz attack detection", sum_closed / samples, sum_direct / samples, worst)


def validate_impersonation_success(samples: int = 100, seed: int = 0) -> OracleReport:
    """Fixed-angle impersonation curve vs exact branch-best evolution."""
    rng = derive_rng(seed, 0xF2)
    worst, sum_closed, sum_direct = 0.0, 0.0, 0.0
    for _ in range(samples):
        theta = rng.uniform(0.0, 2.0 * np.pi)
        closed = impersonation_success_probability(theta)
        direct = adversary.impersonation_success_exact(theta)
        worst = max(worst, abs(closed - direct))
        sum_closed += closed
        sum_direct += direct
    return OracleReport(
        "fixed-angle impersonation success", sum_closed / samples, sum_direct / samples, worst
    )


def validate_key_theft_success(samples: int = 60, seed: int = 0, grid_size: int = 360) -> OracleReport:
    """Theft-fidelity closed form vs grid-plus-refinement maximization."""
    rng = derive_rng(seed, 0xF3)
    worst, sum_closed, sum_direct = 0.0, 0.0, 0.0
    for _ in range(samples):
        theta = rng.uniform(0.0, 2.0 * np.pi)
        closed = key_theft_success_probability(theta)
        direct = best_key_steal(theta, grid_size=grid_size).fidelity
        worst = max(worst, abs(closed - direct))
        sum_closed += closed
        sum_direct += direct
    return OracleReport(
        "fixed-angle key theft success", sum_closed / samples, sum_direct / samples, worst
    )
