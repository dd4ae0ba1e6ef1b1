"""Exact dense linear algebra for small registers of labeled qubits.

Conventions used throughout the package:

- A register is an ordered list of unique ``QubitLabel``s. Amplitude and
  density-matrix indices are little-endian over that order: the first label
  is the least significant bit of the basis index.
- ``fidelity`` uses the squared-overlap convention. For a pure state |u> and
  density matrix rho it equals <u|rho|u>; for two pure states |<u|v>|^2.
- ``trace_distance`` is the unnormalized Tr|A - B| (no 1/2 factor), so two
  orthogonal pure states are at distance 2.
- The single-qubit rotation is the real matrix
  ``[[cos t, sin t], [-sin t, cos t]]``; applying it to both halves of the
  shared pair (|00> + |11>)/sqrt(2) leaves that state unchanged.

States are immutable; every operation returns a new value, so values can be
shared freely between concurrent workers.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Iterable, Sequence, Union

import numpy as np

ATOL_EXACT = 1e-12
ATOL_HERMITIAN = 1e-10

_I2 = np.eye(2, dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)


class Party(str, Enum):
    """Who holds a qubit."""

    ALICE = "alice"
    BOB = "bob"
    EVE = "eve"
    CHALLENGE = "challenge"


@dataclass(frozen=True, eq=False)
class QubitLabel:
    owner: Party
    index: int
    _hash: int = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "_hash", hash((self.owner, self.index)))

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, QubitLabel)
            and self.index == other.index
            and self.owner is other.owner
        )

    def __str__(self) -> str:
        return f"{self.owner.value}[{self.index}]"


def _check_labels(labels: Sequence[QubitLabel]) -> tuple[QubitLabel, ...]:
    labels = tuple(labels)
    if len(set(labels)) != len(labels):
        raise ValueError(f"duplicate qubit labels in register: {labels}")
    return labels


@dataclass(frozen=True)
class PureState:
    """Complex amplitude vector over an ordered register of labeled qubits."""

    labels: tuple[QubitLabel, ...]
    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        labels = _check_labels(self.labels)
        amps = np.array(self.amplitudes, dtype=complex)
        if amps.shape != (2 ** len(labels),):
            raise ValueError(
                f"amplitude vector of length {amps.size} does not match "
                f"{len(labels)} qubit(s)"
            )
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > ATOL_EXACT:
            raise ValueError(f"state vector is not normalized (norm={norm!r})")
        amps.flags.writeable = False
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def n_qubits(self) -> int:
        return len(self.labels)


@dataclass(frozen=True)
class MixedState:
    """Density matrix over an ordered register of labeled qubits."""

    labels: tuple[QubitLabel, ...]
    matrix: np.ndarray

    def __post_init__(self) -> None:
        labels = _check_labels(self.labels)
        dim = 2 ** len(labels)
        mat = np.array(self.matrix, dtype=complex)
        if mat.shape != (dim, dim):
            raise ValueError(f"matrix shape {mat.shape} does not match {len(labels)} qubit(s)")
        if np.abs(mat - mat.conj().T).max() > ATOL_HERMITIAN:
            raise ValueError("density matrix is not Hermitian")
        if abs(np.trace(mat).real - 1.0) > 1e-10 or abs(np.trace(mat).imag) > 1e-10:
            raise ValueError(f"density matrix trace is {np.trace(mat)!r}, expected 1")
        if np.linalg.eigvalsh(mat).min() < -ATOL_EXACT:
            raise ValueError("density matrix has a negative eigenvalue")
        mat.flags.writeable = False
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "matrix", mat)

    @property
    def n_qubits(self) -> int:
        return len(self.labels)


State = Union[PureState, MixedState]


def _pure(labels: tuple[QubitLabel, ...], amplitudes: np.ndarray) -> PureState:
    """Unchecked constructor for internal ops whose output is valid by
    construction (unitaries, normalized projections). Invariants are covered
    by property tests instead of per-op validation."""
    state = object.__new__(PureState)
    amplitudes.flags.writeable = False
    object.__setattr__(state, "labels", labels)
    object.__setattr__(state, "amplitudes", amplitudes)
    return state


def _mixed(labels: tuple[QubitLabel, ...], matrix: np.ndarray) -> MixedState:
    """Unchecked MixedState counterpart of ``_pure``."""
    state = object.__new__(MixedState)
    matrix.flags.writeable = False
    object.__setattr__(state, "labels", labels)
    object.__setattr__(state, "matrix", matrix)
    return state


def make_pure(labels: Sequence[QubitLabel], amplitudes: Sequence[complex]) -> PureState:
    """Build a normalized pure state; rejects zero vectors and bad dimensions."""
    labels = _check_labels(labels)
    amps = np.array(amplitudes, dtype=complex)
    if amps.shape != (2 ** len(labels),):
        raise ValueError(
            f"amplitude vector of length {amps.size} does not match {len(labels)} qubit(s)"
        )
    norm = np.linalg.norm(amps)
    if norm < 1e-15:
        raise ValueError("cannot normalize the zero vector")
    return _pure(labels, amps / norm)


def bell_pair(first: QubitLabel, second: QubitLabel) -> PureState:
    """The shared key state (|00> + |11>)/sqrt(2) on two labeled qubits."""
    return make_pure((first, second), [1, 0, 0, 1])


def to_density(state: State) -> MixedState:
    """Density-matrix view of a state (projector for pure inputs)."""
    if isinstance(state, MixedState):
        return state
    v = state.amplitudes
    return _mixed(state.labels, np.outer(v, v.conj()))


def tensor(a: State, b: State) -> State:
    """Tensor product; labels concatenate and must be disjoint.

    Pure x pure stays pure; anything else returns a MixedState.
    """
    if set(a.labels) & set(b.labels):
        raise ValueError("tensor factors share qubit labels")
    labels = a.labels + b.labels
    if isinstance(a, PureState) and isinstance(b, PureState):
        # little-endian: labels of `a` occupy the low bits
        return _pure(labels, (b.amplitudes[:, None] * a.amplitudes[None, :]).ravel())
    da, db = to_density(a), to_density(b)
    return _mixed(labels, np.kron(db.matrix, da.matrix))


def rotation_matrix(theta: float) -> np.ndarray:
    """Real rotation [[cos t, sin t], [-sin t, cos t]]."""
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, s], [-s, c]], dtype=complex)


@lru_cache(maxsize=None)
def _bit_map(labels: tuple[QubitLabel, ...]) -> dict[QubitLabel, int]:
    return {label: pos for pos, label in enumerate(labels)}


def _bit(state: State, qubit: QubitLabel) -> int:
    try:
        return _bit_map(state.labels)[qubit]
    except KeyError:
        raise ValueError(f"qubit {qubit} is not in this register") from None


@lru_cache(maxsize=None)
def _arange(dim: int) -> np.ndarray:
    idx = np.arange(dim)
    idx.flags.writeable = False
    return idx


@lru_cache(maxsize=None)
def _bit_groups(n: int, bit: int) -> tuple[np.ndarray, np.ndarray]:
    """Flat indices with the given bit clear / set, in matching order."""
    idx = _arange(1 << n)
    m0 = idx[(idx >> bit) & 1 == 0]
    m1 = m0 | (1 << bit)
    m0.flags.writeable = False
    m1.flags.writeable = False
    return m0, m1


def _apply_matrix_1q(amps: np.ndarray, mat: np.ndarray, bit: int) -> np.ndarray:
    m0, m1 = _bit_groups(amps.size.bit_length() - 1, bit)
    out = np.empty_like(amps)
    a0, a1 = amps[m0], amps[m1]
    out[m0] = mat[0, 0] * a0 + mat[0, 1] * a1
    out[m1] = mat[1, 0] * a0 + mat[1, 1] * a1
    return out


def _embed_1q(mat: np.ndarray, bit: int, n: int) -> np.ndarray:
    out = np.array([[1.0 + 0j]])
    for k in range(n - 1, -1, -1):
        out = np.kron(out, mat if k == bit else _I2)
    return out


def _embed_2q(mat: np.ndarray, bit_lo: int, bit_hi: int, n: int) -> np.ndarray:
    # 4x4 `mat` is little-endian over (bit_lo, bit_hi)
    dim = 1 << n
    out = np.zeros((dim, dim), dtype=complex)
    for col in range(dim):
        s = ((col >> bit_lo) & 1) | (((col >> bit_hi) & 1) << 1)
        base = col & ~(1 << bit_lo) & ~(1 << bit_hi)
        for r in range(4):
            row = base | ((r & 1) << bit_lo) | (((r >> 1) & 1) << bit_hi)
            out[row, col] = mat[r, s]
    return out


def _apply_full(state: State, full: np.ndarray) -> State:
    if isinstance(state, PureState):
        return _pure(state.labels, full @ state.amplitudes)
    return _mixed(state.labels, full @ state.matrix @ full.conj().T)


def apply_unitary(state: State, qubits: Sequence[QubitLabel], matrix: np.ndarray) -> State:
    """Apply a 2x2 (one qubit) or 4x4 (two qubits, little-endian) unitary."""
    qubits = tuple(qubits)
    matrix = np.asarray(matrix, dtype=complex)
    if len(qubits) == 1:
        if matrix.shape != (2, 2):
            raise ValueError("expected a 2x2 matrix for a single qubit")
        bit = _bit(state, qubits[0])
        if isinstance(state, PureState):
            return _pure(state.labels, _apply_matrix_1q(state.amplitudes, matrix, bit))
        return _apply_full(state, _embed_1q(matrix, bit, state.n_qubits))
    if len(qubits) == 2:
        if matrix.shape != (4, 4):
            raise ValueError("expected a 4x4 matrix for two qubits")
        if qubits[0] == qubits[1]:
            raise ValueError("two-qubit operation needs distinct qubits")
        lo, hi = _bit(state, qubits[0]), _bit(state, qubits[1])
        return _apply_full(state, _embed_2q(matrix, lo, hi, state.n_qubits))
    raise ValueError("only one- and two-qubit operations are supported")


def apply_rotation(state: State, qubit: QubitLabel, theta: float) -> State:
    """Rotate one qubit by theta (see module docstring for the matrix)."""
    return apply_unitary(state, (qubit,), rotation_matrix(theta))


@lru_cache(maxsize=None)
def _flip_perm(n: int, bit: int) -> np.ndarray:
    perm = _arange(1 << n) ^ (1 << bit)
    perm.flags.writeable = False
    return perm


@lru_cache(maxsize=None)
def _cnot_perm(n: int, control: int, target: int) -> np.ndarray:
    idx = _arange(1 << n)
    perm = idx ^ (((idx >> control) & 1) << target)
    perm.flags.writeable = False
    return perm


def apply_not(state: State, qubit: QubitLabel) -> State:
    """Pauli-X on one qubit."""
    flip = _flip_perm(state.n_qubits, _bit(state, qubit))
    if isinstance(state, PureState):
        return _pure(state.labels, state.amplitudes[flip])
    return _mixed(state.labels, state.matrix[np.ix_(flip, flip)])


def apply_cnot(state: State, control: QubitLabel, target: QubitLabel) -> State:
    """Controlled-NOT in the computational basis."""
    if control == target:
        raise ValueError("control and target must differ")
    perm = _cnot_perm(state.n_qubits, _bit(state, control), _bit(state, target))
    if isinstance(state, PureState):
        return _pure(state.labels, state.amplitudes[perm])
    return _mixed(state.labels, state.matrix[np.ix_(perm, perm)])


def _basis_pair(basis) -> tuple[complex, complex]:
    if hasattr(basis, "a") and hasattr(basis, "b"):
        a, b = complex(basis.a), complex(basis.b)
    else:
        a, b = complex(basis[0]), complex(basis[1])
    if abs(abs(a) ** 2 + abs(b) ** 2 - 1.0) > ATOL_EXACT:
        raise ValueError("measurement basis state is not normalized")
    return a, b


@dataclass(frozen=True)
class MeasurementResult:
    """Outcome of a pass/fail projective test of one qubit.

    ``outcome`` and ``post_state`` are only populated when an rng was
    supplied; ``prob_pass`` is always the exact pass probability.
    """

    prob_pass: float
    outcome: bool | None
    post_state: State | None


def measure_in_basis(state: State, qubit: QubitLabel, basis, rng=None) -> MeasurementResult:
    """Projective measurement of ``qubit`` onto {|psi>, |psi_perp>}.

    ``basis`` is the pass state |psi> = a|0> + b|1>, given as a pair (a, b)
    or any object with .a and .b. The orthogonal (fail) state is fixed as
    conj(b)|0> - conj(a)|1>. With an rng, an outcome is drawn with the exact
    pass probability and the renormalized post-measurement state is returned.
    """
    a, b = _basis_pair(basis)
    bit = _bit(state, qubit)

    if isinstance(state, PureState):
        m0, m1 = _bit_groups(state.n_qubits, bit)
        a0, a1 = state.amplitudes[m0], state.amplitudes[m1]
        u = np.conj(a) * a0 + np.conj(b) * a1  # <pass| contraction
        prob = min(max(float(np.vdot(u, u).real), 0.0), 1.0)
        if rng is None:
            return MeasurementResult(prob, None, None)
        passed = bool(rng.random() < prob)
        out = np.empty_like(state.amplitudes)
        if passed:
            u /= np.sqrt(prob)
            out[m0], out[m1] = a * u, b * u
        else:
            w = b * a0 - a * a1  # <fail| contraction
            w /= np.linalg.norm(w)
            out[m0], out[m1] = np.conj(b) * w, -np.conj(a) * w
        return MeasurementResult(prob, passed, _pure(state.labels, out))

    pass_vec = np.array([a, b])
    fail_vec = np.array([np.conj(b), -np.conj(a)])
    proj_pass = np.outer(pass_vec, pass_vec.conj())
    full = _embed_1q(proj_pass, bit, state.n_qubits)
    prob = min(max(float(np.trace(full @ state.matrix).real), 0.0), 1.0)
    if rng is None:
        return MeasurementResult(prob, None, None)
    passed = bool(rng.random() < prob)
    proj = proj_pass if passed else np.outer(fail_vec, fail_vec.conj())
    full = _embed_1q(proj, bit, state.n_qubits)
    mat = full @ state.matrix @ full.conj().T
    post = _mixed(state.labels, mat / np.trace(mat).real)
    return MeasurementResult(prob, passed, post)


def partial_trace(state: State, keep: Iterable[QubitLabel]) -> MixedState:
    """Reduced density matrix over ``keep`` (kept labels keep their order)."""
    keep_set = set(keep)
    if not keep_set:
        raise ValueError("must keep at least one qubit")
    unknown = keep_set - set(state.labels)
    if unknown:
        raise ValueError(f"labels not in register: {sorted(map(str, unknown))}")
    kept = tuple(l for l in state.labels if l in keep_set)
    traced = tuple(l for l in state.labels if l not in keep_set)
    n = state.n_qubits
    # numpy's C-order reshape puts the last label on the fastest axis, so the
    # tensor axis of label j is n-1-j; flattening wants low bits last.
    axis = {label: n - 1 - pos for pos, label in enumerate(state.labels)}
    kept_axes = [axis[l] for l in reversed(kept)]
    traced_axes = [axis[l] for l in reversed(traced)]
    dk, dt = 2 ** len(kept), 2 ** len(traced)

    if isinstance(state, PureState):
        tens = state.amplitudes.reshape([2] * n).transpose(kept_axes + traced_axes)
        v = tens.reshape(dk, dt)
        return _mixed(kept, v @ v.conj().T)
    rows = kept_axes + traced_axes
    cols = [ax + n for ax in rows]
    tens = state.matrix.reshape([2] * (2 * n)).transpose(rows + cols)
    blocks = tens.reshape(dk, dt, dk, dt)
    return _mixed(kept, np.einsum("atbt->ab", blocks))


def project_out(state: State, qubit: QubitLabel, vec) -> State:
    """Contract one qubit against <vec| and drop it, renormalizing.

    Exact when the qubit is known to be in state ``vec`` (e.g. right after a
    projective measurement); raises if the projection has ~zero weight.
    """
    v = np.asarray(vec, dtype=complex)
    bit = _bit(state, qubit)
    labels = tuple(l for l in state.labels if l != qubit)
    if not labels:
        raise ValueError("cannot remove the last qubit of a register")
    m0, m1 = _bit_groups(state.n_qubits, bit)
    # m0 is increasing, so the bit-removal map keeps little-endian order
    if isinstance(state, PureState):
        amps = np.conj(v[0]) * state.amplitudes[m0] + np.conj(v[1]) * state.amplitudes[m1]
        norm = np.linalg.norm(amps)
        if norm < 1e-9:
            raise ValueError(f"qubit {qubit} has almost no weight on the given state")
        return _pure(labels, amps / norm)
    m = state.matrix
    block = (
        np.conj(v[0]) * v[0] * m[np.ix_(m0, m0)]
        + np.conj(v[0]) * v[1] * m[np.ix_(m0, m1)]
        + np.conj(v[1]) * v[0] * m[np.ix_(m1, m0)]
        + np.conj(v[1]) * v[1] * m[np.ix_(m1, m1)]
    )
    tr = np.trace(block).real
    if tr < 1e-12:
        raise ValueError(f"qubit {qubit} has almost no weight on the given state")
    return _mixed(labels, block / tr)


def permute_to(state: State, labels: Sequence[QubitLabel]) -> State:
    """Reorder a register to the given label order (same label set)."""
    labels = tuple(labels)
    if set(labels) != set(state.labels) or len(labels) != len(state.labels):
        raise ValueError("permutation must use exactly the register's labels")
    if labels == state.labels:
        return state
    n = state.n_qubits
    src_bit = {label: pos for pos, label in enumerate(state.labels)}
    idx = np.arange(2 ** n)
    new_idx = np.zeros_like(idx)
    for new_pos, label in enumerate(labels):
        new_idx |= ((idx >> src_bit[label]) & 1) << new_pos
    if isinstance(state, PureState):
        out = np.empty_like(state.amplitudes)
        out[new_idx] = state.amplitudes
        return _pure(labels, out)
    out = np.empty_like(state.matrix)
    out[np.ix_(new_idx, new_idx)] = state.matrix
    return _mixed(labels, out)


def _aligned_pair(a: State, b: State) -> tuple[State, State]:
    if set(a.labels) != set(b.labels):
        raise ValueError(
            f"registers do not match: {list(map(str, a.labels))} vs {list(map(str, b.labels))}"
        )
    return a, permute_to(b, a.labels)


def fidelity(a: State, b: State) -> float:
    """Squared-overlap fidelity in [0, 1]; <u|rho|u> for pure vs mixed."""
    a, b = _aligned_pair(a, b)
    if isinstance(a, PureState) and isinstance(b, PureState):
        return float(abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2)
    if isinstance(a, PureState):
        v = a.amplitudes
        return float(np.real(v.conj() @ b.matrix @ v))
    if isinstance(b, PureState):
        v = b.amplitudes
        return float(np.real(v.conj() @ a.matrix @ v))
    # general Uhlmann fidelity, squared convention
    evals, evecs = np.linalg.eigh(a.matrix)
    sqrt_a = (evecs * np.sqrt(np.clip(evals, 0.0, None))) @ evecs.conj().T
    inner = sqrt_a @ b.matrix @ sqrt_a
    lam = np.clip(np.linalg.eigvalsh(inner), 0.0, None)
    return float(np.sum(np.sqrt(lam)) ** 2)


def trace_distance(a: State, b: State) -> float:
    """Unnormalized trace distance Tr|A - B| between two states."""
    a, b = _aligned_pair(a, b)
    diff = to_density(a).matrix - to_density(b).matrix
    if np.abs(diff - diff.conj().T).max() > ATOL_HERMITIAN:
        raise ValueError("trace distance needs Hermitian inputs")
    return float(np.sum(np.abs(np.linalg.eigvalsh(diff))))
