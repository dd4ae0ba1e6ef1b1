"""The honest authentication protocol as an explicit state machine.

One session: both parties rotate every key pair by that pair's secret angle,
the verifier issues K' secret challenge qubits one at a time, the identifier
entangles each with its pair qubit (C-NOT, key qubit as control), the verifier
disentangles with its own C-NOT and projects onto the challenge basis. Roles
then swap. Odd pair indices (1-based) serve Bob-as-verifier rounds, even
indices Alice-as-verifier. Any failed projection, or more than K' return
requests arriving at a party, aborts the session and discards the used pairs;
an accepted session retains all 2K pairs for reuse.

Honest operation never entangles distinct pairs, so the joint key state is
stored as independent per-pair registers inside a RegisterMap;
``RegisterMap.full_state`` materializes the full tensor product on demand.

Channel transmissions route through an optional adversary strategy via hooks
(session_start / on_forward / on_return / session_end). Hooks see only public
information: qubit labels, pair indices, and the register map. The secret
rotation angles live in AuthKey and challenge amplitudes in Challenge; neither
object is ever handed to a strategy.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Protocol, runtime_checkable

import numpy as np

from .seeding import DOMAIN_CHALLENGE, DOMAIN_EVE, DOMAIN_THETAS, DOMAIN_VERIFIER, derive_rng
from .states import (
    MeasurementResult,
    MixedState,
    Party,
    PureState,
    QubitLabel,
    State,
    apply_cnot,
    apply_not,
    apply_rotation,
    apply_unitary,
    bell_pair,
    make_pure,
    measure_in_basis,
    partial_trace,
    permute_to,
    project_out,
    tensor,
    to_density,
)

ABORT_MEASUREMENT = "measurement_failed"
ABORT_EXCESS_REQUESTS = "excess_return_requests"

THETA_RANDOM = "random"
THETA_FIXED = "fixed"


@dataclass(frozen=True)
class SessionConfig:
    """Parameters of one authentication session.

    K pairs serve each verification direction (2K pairs total); K' of them
    (K' <= K) actually carry challenges. theta_mode selects per-pair uniform
    random angles on [0, 2pi) or one fixed angle for every pair.
    """

    K: int
    K_prime: int
    theta_mode: str = THETA_RANDOM
    theta: float | None = None
    seed: int = 0

    def __post_init__(self) -> None:
        if self.K < 1:
            raise ValueError("K must be at least 1")
        if not 1 <= self.K_prime <= self.K:
            raise ValueError("need 1 <= K_prime <= K")
        if self.theta_mode not in (THETA_RANDOM, THETA_FIXED):
            raise ValueError(f"unknown theta_mode {self.theta_mode!r}")
        if self.theta_mode == THETA_FIXED and self.theta is None:
            raise ValueError("fixed theta_mode needs a theta value")


@dataclass(frozen=True)
class Challenge:
    """Secret pure qubit state a|0> + b|1> issued for one pair index."""

    index: int
    a: complex
    b: complex

    def __post_init__(self) -> None:
        if abs(abs(self.a) ** 2 + abs(self.b) ** 2 - 1.0) > 1e-12:
            raise ValueError("challenge amplitudes are not normalized")


def make_challenge(rng: np.random.Generator, index: int) -> Challenge:
    """Haar-random challenge: two standard complex Gaussians, normalized."""
    v = rng.normal(size=2) + 1j * rng.normal(size=2)
    v /= np.linalg.norm(v)
    return Challenge(index, complex(v[0]), complex(v[1]))


def make_real_challenge(rng: np.random.Generator, index: int) -> Challenge:
    """Challenge with real amplitudes (cos a, sin a), a uniform on [0, 2pi).

    The closed-form attack-success curves average the post-attack basis
    overlap over this ensemble; see the analysis module notes.
    """
    alpha = rng.uniform(0.0, 2.0 * np.pi)
    return Challenge(index, complex(np.cos(alpha)), complex(np.sin(alpha)))


@dataclass(frozen=True)
class PairHandle:
    index: int  # 1-based; odd = Bob verifies, even = Alice verifies
    own: QubitLabel
    partner: QubitLabel


@dataclass
class AuthKey:
    """One party's half of the shared key: pair handles plus secret angles."""

    party: Party
    pairs: list[PairHandle]
    thetas: list[float]
    sessions_used: int = 0

    @property
    def pair_count(self) -> int:
        return len(self.pairs)

    def theta_for(self, pair_index: int) -> float:
        return self.thetas[pair_index - 1]


class RegisterMap:
    """Disjoint quantum registers addressed by qubit label.

    Registers merge automatically when an operation spans two of them, so
    callers just name qubits. All mutation happens by swapping in new
    immutable state values.
    """

    def __init__(self) -> None:
        self._registers: dict[int, State] = {}
        self._home: dict[QubitLabel, int] = {}
        self._next = 0

    @property
    def labels(self) -> tuple[QubitLabel, ...]:
        return tuple(self._home)

    def __contains__(self, label: QubitLabel) -> bool:
        return label in self._home

    def add_state(self, state: State) -> None:
        for label in state.labels:
            if label in self._home:
                raise ValueError(f"label {label} already present")
        rid = self._next
        self._next += 1
        self._registers[rid] = state
        for label in state.labels:
            self._home[label] = rid

    def add_qubit(self, label: QubitLabel, amplitudes=(1, 0)) -> None:
        self.add_state(make_pure((label,), amplitudes))

    def register_of(self, label: QubitLabel) -> State:
        return self._registers[self._home[label]]

    def _merged(self, labels: tuple[QubitLabel, ...]) -> int:
        rids = []
        for label in labels:
            if label not in self._home:
                raise ValueError(f"unknown qubit label {label}")
            rid = self._home[label]
            if rid not in rids:
                rids.append(rid)
        target = rids[0]
        state = self._registers[target]
        for rid in rids[1:]:
            state = tensor(state, self._registers[rid])
            del self._registers[rid]
        self._registers[target] = state
        for label in state.labels:
            self._home[label] = target
        return target

    def _rid(self, qubit: QubitLabel) -> int:
        try:
            return self._home[qubit]
        except KeyError:
            raise ValueError(f"unknown qubit label {qubit}") from None

    def apply_rotation(self, qubit: QubitLabel, theta: float) -> None:
        rid = self._rid(qubit)
        self._registers[rid] = apply_rotation(self._registers[rid], qubit, theta)

    def apply_not(self, qubit: QubitLabel) -> None:
        rid = self._rid(qubit)
        self._registers[rid] = apply_not(self._registers[rid], qubit)

    def apply_cnot(self, control: QubitLabel, target: QubitLabel) -> None:
        rid = self._merged((control, target))
        self._registers[rid] = apply_cnot(self._registers[rid], control, target)

    def apply_unitary(self, qubits, matrix) -> None:
        rid = self._merged(tuple(qubits))
        self._registers[rid] = apply_unitary(self._registers[rid], qubits, matrix)

    def measure_in_basis(self, qubit: QubitLabel, basis, rng=None) -> MeasurementResult:
        rid = self._rid(qubit)
        result = measure_in_basis(self._registers[rid], qubit, basis, rng)
        if result.post_state is not None:
            self._registers[rid] = result.post_state
        return result

    def remove_qubit(self, qubit: QubitLabel, vec) -> None:
        """Drop a qubit whose state is known (e.g. just measured) from its register."""
        rid = self._home[qubit]
        state = self._registers[rid]
        if state.n_qubits == 1:
            del self._registers[rid]
        else:
            self._registers[rid] = project_out(state, qubit, vec)
        del self._home[qubit]

    def reduced_state(self, labels) -> MixedState:
        """Joint reduced density matrix of any set of present labels."""
        labels = tuple(labels)
        by_reg: dict[int, list[QubitLabel]] = {}
        for label in labels:
            if label not in self._home:
                raise ValueError(f"unknown qubit label {label}")
            by_reg.setdefault(self._home[label], []).append(label)
        pieces: list[State] = [
            partial_trace(self._registers[rid], keep) for rid, keep in by_reg.items()
        ]
        out = pieces[0]
        for piece in pieces[1:]:
            out = tensor(out, piece)
        return to_density(permute_to(out, labels))  # type: ignore[arg-type]

    def full_state(self) -> State:
        """Materialize everything as one register (small sessions only)."""
        states = list(self._registers.values())
        out = states[0]
        for st in states[1:]:
            out = tensor(out, st)
        return out


def alice_label(pair_index: int) -> QubitLabel:
    return QubitLabel(Party.ALICE, pair_index)


def bob_label(pair_index: int) -> QubitLabel:
    return QubitLabel(Party.BOB, pair_index)


def challenge_label(pair_index: int) -> QubitLabel:
    return QubitLabel(Party.CHALLENGE, pair_index)


def key_label(party: Party, pair_index: int) -> QubitLabel:
    return QubitLabel(party, pair_index)


def setup_keys(config: SessionConfig) -> tuple[AuthKey, AuthKey, RegisterMap]:
    """Create 2K shared pairs plus both parties' key records."""
    registers = RegisterMap()
    alice_pairs, bob_pairs = [], []
    for i in range(1, 2 * config.K + 1):
        a, b = alice_label(i), bob_label(i)
        registers.add_state(bell_pair(a, b))
        alice_pairs.append(PairHandle(i, a, b))
        bob_pairs.append(PairHandle(i, b, a))
    if config.theta_mode == THETA_FIXED:
        thetas = [float(config.theta)] * (2 * config.K)
    else:
        rng = derive_rng(config.seed, DOMAIN_THETAS)
        thetas = list(rng.uniform(0.0, 2.0 * np.pi, size=2 * config.K))
    return (
        AuthKey(Party.ALICE, alice_pairs, thetas),
        AuthKey(Party.BOB, bob_pairs, thetas),
        registers,
    )


def bilateral_rotate(
    registers: RegisterMap, pair_index: int, alice_key: AuthKey, bob_key: AuthKey
) -> None:
    """Both parties rotate their half of one pair by the shared secret angle."""
    if not 1 <= pair_index <= alice_key.pair_count:
        raise ValueError(f"pair index {pair_index} out of range")
    registers.apply_rotation(alice_label(pair_index), alice_key.theta_for(pair_index))
    registers.apply_rotation(bob_label(pair_index), bob_key.theta_for(pair_index))


def identifier_encode(
    registers: RegisterMap, pair_index: int, qubit: QubitLabel, identifier: Party
) -> None:
    """Identifier's C-NOT: its key qubit controls the received challenge qubit."""
    registers.apply_cnot(key_label(identifier, pair_index), qubit)


def verifier_decode_and_test(
    registers: RegisterMap,
    pair_index: int,
    qubit: QubitLabel,
    challenge: Challenge,
    verifier: Party,
    rng=None,
) -> MeasurementResult:
    """Verifier's C-NOT (its key qubit as control) then the basis test."""
    registers.apply_cnot(key_label(verifier, pair_index), qubit)
    return registers.measure_in_basis(qubit, challenge, rng)


@dataclass
class SessionView:
    """What a strategy sees at session boundaries: registers and its own rng."""

    registers: RegisterMap
    rng: np.random.Generator
    K: int
    K_prime: int


@dataclass
class TransmissionContext:
    """A challenge qubit in transit, as visible to the channel.

    ``pair_index`` mirrors the public index announcement.
    ``request_extra_return`` simulates asking the identifier for extra
    send-backs; a party aborts once more than K' requests arrive in one
    direction.
    """

    registers: RegisterMap
    pair_index: int
    direction: str  # "forward" (verifier -> identifier) or "return"
    qubit: QubitLabel
    verifier: Party
    identifier: Party
    rng: np.random.Generator
    request_extra_return: Callable[[], None]


@runtime_checkable
class SessionHooks(Protocol):
    """Adversary interface; every hook is optional in spirit, see EveStrategy."""

    impersonates_identifier: bool
    impersonated_party: Party

    def session_start(self, view: SessionView) -> None: ...

    def on_forward(self, ctx: TransmissionContext) -> tuple[QubitLabel, bool]: ...

    def on_return(self, ctx: TransmissionContext) -> QubitLabel: ...

    def session_end(self, view: SessionView) -> None: ...

    def expected_pass_probability(self) -> float | None: ...


@dataclass(frozen=True)
class ChallengeRecord:
    pair_index: int
    prob_pass: float
    outcome: bool | None


@dataclass(frozen=True)
class RoundResult:
    """Transcript of one session."""

    records: tuple[ChallengeRecord, ...]
    verdict: str  # "accepted" | "aborted"
    abort_reason: str | None
    keys_retained: bool
    retained_indices: tuple[int, ...]
    discarded_indices: tuple[int, ...]
    announcements: tuple[tuple[int, str], ...]
    pass_probability_product: float
    analytic_acceptance: float | None

    @property
    def accepted(self) -> bool:
        return self.verdict == "accepted"


def _skips_encode(strategy: SessionHooks | None, identifier: Party) -> bool:
    return (
        strategy is not None
        and strategy.impersonates_identifier
        and identifier == strategy.impersonated_party
    )


def run_single_challenge(
    registers: RegisterMap,
    pair_index: int,
    challenge: Challenge,
    verifier: Party,
    identifier: Party,
    strategy: SessionHooks | None = None,
    rng=None,
    eve_rng=None,
    request_hook: Callable[[], None] = lambda: None,
) -> tuple[MeasurementResult, QubitLabel]:
    """One challenge round on existing registers (shared by sessions and trials).

    Returns the measurement result and the label of the qubit that was
    actually tested (the adversary may have substituted it).
    """
    qubit = challenge_label(pair_index)
    registers.add_qubit(qubit, (challenge.a, challenge.b))
    deliver = True
    if strategy is not None:
        ctx = TransmissionContext(
            registers, pair_index, "forward", qubit, verifier, identifier, eve_rng, request_hook
        )
        qubit, deliver = strategy.on_forward(ctx)
    if deliver and not _skips_encode(strategy, identifier):
        identifier_encode(registers, pair_index, qubit, identifier)
    if strategy is not None:
        ctx = TransmissionContext(
            registers, pair_index, "return", qubit, verifier, identifier, eve_rng, request_hook
        )
        qubit = strategy.on_return(ctx)
    return verifier_decode_and_test(registers, pair_index, qubit, challenge, verifier, rng), qubit


def run_session(
    config: SessionConfig,
    strategy: SessionHooks | None = None,
    keys: tuple[AuthKey, AuthKey, RegisterMap] | None = None,
    sample_outcomes: bool = True,
    challenge_factory: Callable[[np.random.Generator, int], Challenge] = make_challenge,
) -> RoundResult:
    """Run one authentication session, optionally against an adversary.

    ``keys`` continues with existing key material (reuse across sessions);
    otherwise fresh pairs are set up from the config. With
    ``sample_outcomes=False`` no outcomes are drawn and nothing aborts: every
    challenge is processed and only exact pass probabilities are recorded.
    ``challenge_factory`` swaps the challenge ensemble (Haar by default).

    When the strategy impersonates a party, that party's own verification
    direction is not simulated (the adversary controls that end and accepts
    unconditionally).
    """
    alice, bob, registers = keys if keys is not None else setup_keys(config)
    session_index = alice.sessions_used
    rng_verify = derive_rng(config.seed, DOMAIN_VERIFIER, session_index)
    rng_challenge = derive_rng(config.seed, DOMAIN_CHALLENGE, session_index)
    rng_eve = derive_rng(config.seed, DOMAIN_EVE, session_index)

    if strategy is not None:
        strategy.session_start(SessionView(registers, rng_eve, config.K, config.K_prime))
    for i in range(1, 2 * config.K + 1):
        bilateral_rotate(registers, i, alice, bob)

    records: list[ChallengeRecord] = []
    announcements: list[tuple[int, str]] = []
    used: list[int] = []
    prob_product = 1.0
    requests = {Party.ALICE: 0, Party.BOB: 0}
    abort_reason: str | None = None

    odd = [2 * j + 1 for j in range(config.K_prime)]
    even = [2 * j + 2 for j in range(config.K_prime)]
    directions = [(Party.BOB, Party.ALICE, odd), (Party.ALICE, Party.BOB, even)]

    for verifier, identifier, pair_indices in directions:
        if strategy is not None and strategy.impersonates_identifier:
            if verifier == strategy.impersonated_party:
                continue  # adversary-controlled verifier: vacuous accept
        for i in pair_indices:
            used.append(i)
            challenge = challenge_factory(rng_challenge, i)
            announcements.append((i, f"{verifier.value}->{identifier.value}"))
            requests[identifier] += 1

            def extra_request(identifier=identifier) -> None:
                requests[identifier] += 1

            result, tested = run_single_challenge(
                registers,
                i,
                challenge,
                verifier,
                identifier,
                strategy,
                rng_verify if sample_outcomes else None,
                rng_eve,
                extra_request,
            )
            if requests[identifier] > config.K_prime:
                abort_reason = ABORT_EXCESS_REQUESTS
            records.append(ChallengeRecord(i, result.prob_pass, result.outcome))
            prob_product *= result.prob_pass
            if result.outcome is not None:
                vec = (
                    (challenge.a, challenge.b)
                    if result.outcome
                    else (np.conj(challenge.b), -np.conj(challenge.a))
                )
                registers.remove_qubit(tested, vec)
                if not result.outcome and abort_reason is None:
                    abort_reason = ABORT_MEASUREMENT
            if abort_reason:
                break
        if abort_reason:
            break

    if strategy is not None:
        strategy.session_end(SessionView(registers, rng_eve, config.K, config.K_prime))
    alice.sessions_used += 1
    bob.sessions_used += 1

    retained = abort_reason is None
    expected = strategy.expected_pass_probability() if strategy is not None else 1.0
    return RoundResult(
        records=tuple(records),
        verdict="accepted" if retained else "aborted",
        abort_reason=abort_reason,
        keys_retained=retained,
        retained_indices=tuple(range(1, 2 * config.K + 1)) if retained else (),
        discarded_indices=() if retained else tuple(used),
        announcements=tuple(announcements),
        pass_probability_product=prob_product,
        analytic_acceptance=None if expected is None else expected ** config.K_prime,
    )
