"""Quantum-core tests: gates, measurement, partial trace, metrics.

Expected values marked by brute-force comparison come from helpers_brute,
which builds big-endian full matrices with explicit loops, independent of the
library's little-endian index arithmetic.
"""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import helpers_brute as brute
from eprauth.states import (
    MixedState,
    Party,
    PureState,
    QubitLabel,
    apply_cnot,
    apply_not,
    apply_rotation,
    apply_unitary,
    bell_pair,
    fidelity,
    make_pure,
    measure_in_basis,
    partial_trace,
    permute_to,
    project_out,
    rotation_matrix,
    tensor,
    to_density,
    trace_distance,
)

A0 = QubitLabel(Party.ALICE, 0)
B0 = QubitLabel(Party.BOB, 0)
E0 = QubitLabel(Party.EVE, 0)
C0 = QubitLabel(Party.CHALLENGE, 0)

RNG = np.random.default_rng(20260810)
INV_SQRT2 = 1.0 / np.sqrt(2.0)


def random_pure(rng, labels) -> PureState:
    v = rng.normal(size=2 ** len(labels)) + 1j * rng.normal(size=2 ** len(labels))
    return make_pure(labels, v)


class TestMakePure:
    def test_shared_pair_amplitudes(self):
        state = make_pure((A0, B0), [1, 0, 0, 1])
        assert np.allclose(state.amplitudes, [INV_SQRT2, 0, 0, INV_SQRT2], atol=1e-15)
        assert np.allclose(bell_pair(A0, B0).amplitudes, state.amplitudes)

    def test_basis_state(self):
        state = make_pure((C0,), [1, 0])
        assert np.allclose(state.amplitudes, [1, 0])

    def test_normalization_forced(self):
        state = make_pure((C0,), [2, 0])
        assert np.allclose(state.amplitudes, [1, 0])

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="does not match"):
            make_pure((C0,), [1, 0, 0, 0])

    def test_zero_vector(self):
        with pytest.raises(ValueError, match="zero vector"):
            make_pure((C0,), [0, 0])

    def test_duplicate_labels(self):
        with pytest.raises(ValueError, match="duplicate"):
            make_pure((C0, C0), [1, 0, 0, 0])

    def test_states_are_immutable(self):
        state = make_pure((C0,), [1, 0])
        with pytest.raises(ValueError):
            state.amplitudes[0] = 0.0


class TestTensor:
    def test_pair_with_challenge(self):
        a, b = brute.haar_qubit(RNG)
        combined = tensor(bell_pair(A0, B0), make_pure((C0,), [a, b]))
        assert combined.labels == (A0, B0, C0)
        expected = brute.vec_from_terms(
            3,
            {(0, 0, 0): a * INV_SQRT2, (0, 0, 1): b * INV_SQRT2,
             (1, 1, 0): a * INV_SQRT2, (1, 1, 1): b * INV_SQRT2},
            endian="big",
        )
        assert np.allclose(brute.lib_to_big(combined.amplitudes), expected, atol=1e-15)

    def test_two_zeros(self):
        state = tensor(make_pure((A0,), [1, 0]), make_pure((B0,), [1, 0]))
        assert np.allclose(state.amplitudes, [1, 0, 0, 0])

    def test_two_pairs_norm(self):
        a2, b2 = QubitLabel(Party.ALICE, 2), QubitLabel(Party.BOB, 2)
        state = tensor(bell_pair(A0, B0), bell_pair(a2, b2))
        assert state.n_qubits == 4
        assert np.linalg.norm(state.amplitudes) == pytest.approx(1.0, abs=1e-15)

    def test_overlapping_labels_rejected(self):
        with pytest.raises(ValueError, match="share"):
            tensor(bell_pair(A0, B0), make_pure((A0,), [1, 0]))

    def test_mixed_factor(self):
        mixed = MixedState((E0,), np.eye(2) / 2)
        combined = tensor(bell_pair(A0, B0), mixed)
        assert isinstance(combined, MixedState)
        assert np.trace(combined.matrix) == pytest.approx(1.0, abs=1e-14)


class TestRotation:
    def test_quarter_turn_on_zero(self):
        state = apply_rotation(make_pure((C0,), [1, 0]), C0, np.pi / 2)
        assert np.allclose(state.amplitudes, [0, -1], atol=1e-15)

    def test_eighth_turn_sign_convention(self):
        state = apply_rotation(make_pure((C0,), [1, 0]), C0, np.pi / 4)
        assert np.allclose(state.amplitudes, [INV_SQRT2, -INV_SQRT2], atol=1e-15)

    def test_bilateral_invariance(self):
        pair = bell_pair(A0, B0)
        rng = np.random.default_rng(7)
        worst = 0.0
        for _ in range(1000):
            theta = rng.uniform(0, 2 * np.pi)
            rotated = apply_rotation(apply_rotation(pair, A0, theta), B0, theta)
            worst = max(worst, np.abs(rotated.amplitudes - pair.amplitudes).max())
        assert worst < 1e-12

    def test_unknown_label(self):
        with pytest.raises(ValueError, match="not in this register"):
            apply_rotation(bell_pair(A0, B0), E0, 0.3)

    def test_matches_brute_matrix(self):
        rng = np.random.default_rng(3)
        for _ in range(25):
            state = random_pure(rng, (A0, B0, C0))
            theta = rng.uniform(0, 2 * np.pi)
            pos = rng.integers(3)
            lib = apply_rotation(state, state.labels[pos], theta)
            ref = brute.op_on(brute.rot(theta), pos, 3) @ brute.lib_to_big(state.amplitudes)
            assert np.allclose(brute.lib_to_big(lib.amplitudes), ref, atol=1e-13)

    def test_mixed_rotation_conjugates(self):
        rho = MixedState((A0,), np.array([[0.75, 0.25], [0.25, 0.25]], dtype=complex))
        out = apply_rotation(rho, A0, 0.9)
        r = rotation_matrix(0.9)
        assert np.allclose(out.matrix, r @ rho.matrix @ r.conj().T, atol=1e-14)


class TestCnot:
    def test_encode_step_three_qubits(self):
        a, b = brute.haar_qubit(RNG)
        state = tensor(bell_pair(A0, B0), make_pure((C0,), [a, b]))
        encoded = apply_cnot(state, A0, C0)
        expected = brute.vec_from_terms(
            3,
            {(0, 0, 0): a * INV_SQRT2, (0, 0, 1): b * INV_SQRT2,
             (1, 1, 1): a * INV_SQRT2, (1, 1, 0): b * INV_SQRT2},
            endian="big",
        )
        assert np.allclose(brute.lib_to_big(encoded.amplitudes), expected, atol=1e-15)

    def test_decode_step_restores_product(self):
        a, b = brute.haar_qubit(RNG)
        state = tensor(bell_pair(A0, B0), make_pure((C0,), [a, b]))
        encoded = apply_cnot(state, A0, C0)
        decoded = apply_cnot(encoded, B0, C0)
        product = tensor(bell_pair(A0, B0), make_pure((C0,), [a, b]))
        assert np.allclose(decoded.amplitudes, product.amplitudes, atol=1e-15)

    def test_on_zeros(self):
        state = make_pure((A0, C0), [1, 0, 0, 0])
        assert np.allclose(apply_cnot(state, A0, C0).amplitudes, state.amplitudes)

    def test_self_inverse(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            state = random_pure(rng, (A0, B0, C0))
            twice = apply_cnot(apply_cnot(state, B0, C0), B0, C0)
            assert np.allclose(twice.amplitudes, state.amplitudes, atol=1e-15)

    def test_matches_brute_matrix(self):
        rng = np.random.default_rng(8)
        for _ in range(20):
            state = random_pure(rng, (A0, B0, C0))
            c, t = rng.choice(3, size=2, replace=False)
            lib = apply_cnot(state, state.labels[c], state.labels[t])
            ref = brute.cnot_on(c, t, 3) @ brute.lib_to_big(state.amplitudes)
            assert np.allclose(brute.lib_to_big(lib.amplitudes), ref, atol=1e-14)

    def test_control_equals_target(self):
        with pytest.raises(ValueError, match="differ"):
            apply_cnot(bell_pair(A0, B0), A0, A0)


class TestNot:
    def test_flip(self):
        assert np.allclose(apply_not(make_pure((C0,), [1, 0]), C0).amplitudes, [0, 1])

    def test_involution(self):
        rng = np.random.default_rng(11)
        state = random_pure(rng, (A0, C0))
        assert np.allclose(apply_not(apply_not(state, C0), C0).amplitudes, state.amplitudes)

    def test_unknown_label(self):
        with pytest.raises(ValueError, match="not in this register"):
            apply_not(make_pure((C0,), [1, 0]), E0)


class TestApplyUnitary:
    def test_two_qubit_matches_brute(self):
        rng = np.random.default_rng(13)
        for _ in range(10):
            state = random_pure(rng, (A0, B0, C0))
            u = brute.random_unitary(rng, 4)
            lib = apply_unitary(state, (A0, C0), u)
            # library convention: little-endian over (A0, C0); positions 0 and 2
            big_u = np.zeros((8, 8), dtype=complex)
            for col in range(8):
                bits = [(col >> (2 - k)) & 1 for k in range(3)]
                s = bits[0] | (bits[2] << 1)
                for r in range(4):
                    nb = list(bits)
                    nb[0], nb[2] = r & 1, (r >> 1) & 1
                    big_u[brute.big_index(tuple(nb)), col] += u[r, s]
            ref = big_u @ brute.lib_to_big(state.amplitudes)
            assert np.allclose(brute.lib_to_big(lib.amplitudes), ref, atol=1e-13)

    def test_wrong_shape(self):
        with pytest.raises(ValueError, match="4x4"):
            apply_unitary(bell_pair(A0, B0), (A0, B0), np.eye(2))


class TestMeasureInBasis:
    def test_honest_decode_always_passes(self):
        a, b = brute.haar_qubit(RNG)
        state = tensor(bell_pair(A0, B0), make_pure((C0,), [a, b]))
        decoded = apply_cnot(apply_cnot(state, A0, C0), B0, C0)
        result = measure_in_basis(decoded, C0, (a, b))
        assert result.prob_pass == pytest.approx(1.0, abs=1e-12)

    def test_orthogonal_states(self):
        result = measure_in_basis(make_pure((C0,), [1, 0]), C0, (0, 1))
        assert result.prob_pass == pytest.approx(0.0, abs=1e-15)

    def test_keyless_response_matches_formula(self):
        # decode of an uncorrelated mixed response, against the closed form
        from eprauth.adversary import ResponseEnsemble
        from eprauth.analysis import impersonation_fidelity
        from eprauth.protocol import Challenge

        rng = np.random.default_rng(17)
        for k in range(300):
            a, b = brute.haar_qubit(rng)
            p = rng.uniform()
            comp = [(p, *brute.haar_qubit(rng)), (1 - p, *brute.haar_qubit(rng))]
            ensemble = ResponseEnsemble(tuple(comp))
            state = tensor(bell_pair(A0, B0), MixedState((C0,), ensemble.density_matrix()))
            decoded = apply_cnot(state, B0, C0)
            result = measure_in_basis(decoded, C0, (a, b))
            expected = impersonation_fidelity(Challenge(k, a, b), ensemble)
            assert result.prob_pass == pytest.approx(expected, abs=1e-12)

    def test_pass_fail_probabilities_sum_to_one(self):
        rng = np.random.default_rng(19)
        for _ in range(50):
            state = random_pure(rng, (A0, C0))
            a, b = brute.haar_qubit(rng)
            p_pass = measure_in_basis(state, C0, (a, b)).prob_pass
            p_fail = measure_in_basis(state, C0, (np.conj(b), -np.conj(a))).prob_pass
            assert p_pass + p_fail == pytest.approx(1.0, abs=1e-12)

    def test_sampling_collapses(self):
        rng = np.random.default_rng(23)
        state = random_pure(rng, (A0, C0))
        a, b = brute.haar_qubit(rng)
        result = measure_in_basis(state, C0, (a, b), rng)
        assert result.outcome in (True, False)
        again = measure_in_basis(result.post_state, C0, (a, b))
        assert again.prob_pass == pytest.approx(1.0 if result.outcome else 0.0, abs=1e-12)

    def test_unnormalized_basis_rejected(self):
        with pytest.raises(ValueError, match="not normalized"):
            measure_in_basis(make_pure((C0,), [1, 0]), C0, (1, 1))

    def test_matches_brute_projection(self):
        rng = np.random.default_rng(29)
        for _ in range(25):
            state = random_pure(rng, (A0, B0, C0))
            basis = np.array(brute.haar_qubit(rng))
            pos = int(rng.integers(3))
            lib = measure_in_basis(state, state.labels[pos], tuple(basis))
            ref = brute.project_prob(brute.lib_to_big(state.amplitudes), pos, basis, 3)
            assert lib.prob_pass == pytest.approx(ref, abs=1e-13)


class TestPartialTrace:
    def test_half_of_shared_pair_is_maximally_mixed(self):
        reduced = partial_trace(bell_pair(A0, B0), [B0])
        assert np.allclose(reduced.matrix, np.eye(2) / 2, atol=1e-15)

    def test_keep_all_gives_projector(self):
        state = random_pure(np.random.default_rng(31), (A0, C0))
        reduced = partial_trace(state, [A0, C0])
        v = state.amplitudes
        assert np.allclose(reduced.matrix, np.outer(v, v.conj()), atol=1e-15)

    def test_product_recovers_factor(self):
        rng = np.random.default_rng(37)
        left = random_pure(rng, (A0, B0))
        right = random_pure(rng, (E0, C0))
        reduced = partial_trace(tensor(left, right), [A0, B0])
        v = left.amplitudes
        assert np.allclose(reduced.matrix, np.outer(v, v.conj()), atol=1e-13)

    def test_matches_brute(self):
        rng = np.random.default_rng(41)
        for _ in range(15):
            state = random_pure(rng, (A0, B0, C0))
            rho_big = np.outer(brute.lib_to_big(state.amplitudes),
                               brute.lib_to_big(state.amplitudes).conj())
            reduced = partial_trace(state, [B0, C0])
            ref = brute.partial_trace_big(rho_big, 3, [1, 2])
            # reorder library's little-endian (B0, C0) to big-endian (B0, C0)
            perm = [brute.little_index((r0, r1)) for r0, r1 in
                    [(0, 0), (0, 1), (1, 0), (1, 1)]]
            lib = reduced.matrix[np.ix_(perm, perm)]
            assert np.allclose(lib, ref, atol=1e-13)

    def test_empty_keep_rejected(self):
        with pytest.raises(ValueError, match="at least one"):
            partial_trace(bell_pair(A0, B0), [])

    def test_unknown_labels_rejected(self):
        with pytest.raises(ValueError, match="not in register"):
            partial_trace(bell_pair(A0, B0), [E0])


class TestFidelity:
    def test_identical_pairs(self):
        assert fidelity(bell_pair(A0, B0), bell_pair(A0, B0)) == pytest.approx(1.0)

    def test_pair_against_uniform_mixture(self):
        uniform = MixedState((A0, B0), np.eye(4) / 4)
        assert fidelity(bell_pair(A0, B0), uniform) == pytest.approx(0.25, abs=1e-14)

    def test_mixed_mixed_matches_scipy(self):
        rng = np.random.default_rng(43)
        for _ in range(20):
            r1 = brute.random_density(rng, 4)
            r2 = brute.random_density(rng, 4)
            lib = fidelity(MixedState((A0, B0), r1), MixedState((A0, B0), r2))
            assert lib == pytest.approx(brute.uhlmann_fidelity(r1, r2), abs=1e-9)

    def test_label_order_alignment(self):
        state = random_pure(np.random.default_rng(47), (A0, B0))
        flipped = permute_to(state, (B0, A0))
        assert fidelity(state, flipped) == pytest.approx(1.0, abs=1e-13)

    def test_register_mismatch(self):
        with pytest.raises(ValueError, match="registers do not match"):
            fidelity(bell_pair(A0, B0), bell_pair(A0, E0))

    def test_pure_vs_mixed_is_expectation(self):
        rng = np.random.default_rng(53)
        state = random_pure(rng, (A0, B0))
        rho = brute.random_density(rng, 4)
        lib = fidelity(state, MixedState((A0, B0), rho))
        v = state.amplitudes
        assert lib == pytest.approx(float(np.real(v.conj() @ rho @ v)), abs=1e-13)


class TestTraceDistance:
    def test_self_distance_zero(self):
        rho = MixedState((A0,), np.eye(2) / 2)
        assert trace_distance(rho, rho) == pytest.approx(0.0, abs=1e-15)

    def test_orthogonal_pure_states(self):
        zero = make_pure((C0,), [1, 0])
        one = make_pure((C0,), [0, 1])
        assert trace_distance(zero, one) == pytest.approx(2.0, abs=1e-14)

    def test_mixture_bound(self):
        rng = np.random.default_rng(59)
        pair = bell_pair(A0, B0)
        proj = to_density(pair).matrix
        for eps in (0.01, 0.1, 0.25):
            for _ in range(100):
                rho1 = brute.random_density(rng, 4)
                mixture = MixedState((A0, B0), (1 - eps) * proj + eps * rho1)
                assert trace_distance(pair, mixture) <= 2 * np.sqrt(eps) + 1e-10

    def test_triangle_and_symmetry(self):
        rng = np.random.default_rng(61)
        for _ in range(50):
            states = [MixedState((A0,), brute.random_density(rng, 2)) for _ in range(3)]
            d01 = trace_distance(states[0], states[1])
            d12 = trace_distance(states[1], states[2])
            d02 = trace_distance(states[0], states[2])
            assert d01 == pytest.approx(trace_distance(states[1], states[0]), abs=1e-12)
            assert d02 <= d01 + d12 + 1e-12

    def test_register_mismatch(self):
        with pytest.raises(ValueError, match="registers do not match"):
            trace_distance(bell_pair(A0, B0), bell_pair(A0, E0))


class TestProjectOut:
    def test_removes_collapsed_qubit(self):
        a, b = brute.haar_qubit(RNG)
        state = tensor(bell_pair(A0, B0), make_pure((C0,), [a, b]))
        out = project_out(state, C0, (a, b))
        assert out.labels == (A0, B0)
        assert np.allclose(out.amplitudes, bell_pair(A0, B0).amplitudes, atol=1e-14)

    def test_zero_weight_rejected(self):
        state = tensor(bell_pair(A0, B0), make_pure((C0,), [1, 0]))
        with pytest.raises(ValueError, match="no weight"):
            project_out(state, C0, (0, 1))


class TestStateValidation:
    def test_mixed_rejects_non_hermitian(self):
        mat = np.array([[0.5, 0.4], [0.0, 0.5]], dtype=complex)
        with pytest.raises(ValueError, match="Hermitian"):
            MixedState((A0,), mat)

    def test_mixed_rejects_bad_trace(self):
        with pytest.raises(ValueError, match="trace"):
            MixedState((A0,), np.eye(2, dtype=complex))

    def test_mixed_rejects_negative_eigenvalue(self):
        mat = np.diag([1.5, -0.5]).astype(complex)
        with pytest.raises(ValueError, match="negative eigenvalue"):
            MixedState((A0,), mat)

    def test_pure_rejects_unnormalized(self):
        with pytest.raises(ValueError, match="not normalized"):
            PureState((A0,), np.array([1.0, 1.0], dtype=complex))


# --- property tests ---------------------------------------------------------

angles = st.floats(min_value=0.0, max_value=2 * np.pi, allow_nan=False)
seeds = st.integers(min_value=0, max_value=2**31 - 1)


@settings(max_examples=60, deadline=None)
@given(seeds, angles)
def test_gates_preserve_norm(seed, theta):
    rng = np.random.default_rng(seed)
    state = random_pure(rng, (A0, B0, C0))
    target = state.labels[int(rng.integers(3))]
    for op in (
        lambda s: apply_rotation(s, target, theta),
        lambda s: apply_not(s, target),
        lambda s: apply_cnot(s, A0, C0),
    ):
        state = op(state)
        assert np.linalg.norm(state.amplitudes) == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(seeds, angles)
def test_gates_preserve_trace_and_hermiticity(seed, theta):
    rng = np.random.default_rng(seed)
    rho = MixedState((A0, C0), brute.random_density(rng, 4))
    for op in (
        lambda s: apply_rotation(s, C0, theta),
        lambda s: apply_not(s, A0),
        lambda s: apply_cnot(s, A0, C0),
    ):
        rho = op(rho)
        assert np.trace(rho.matrix).real == pytest.approx(1.0, abs=1e-12)
        assert np.abs(rho.matrix - rho.matrix.conj().T).max() < 1e-12


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_fidelity_bounds_and_symmetry(seed):
    rng = np.random.default_rng(seed)
    s1 = random_pure(rng, (A0, B0))
    s2 = random_pure(rng, (A0, B0))
    f12, f21 = fidelity(s1, s2), fidelity(s2, s1)
    assert 0.0 <= f12 <= 1.0 + 1e-12
    assert f12 == pytest.approx(f21, abs=1e-12)
    assert fidelity(s1, s1) == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_fidelity_one_implies_equal_pure(seed):
    rng = np.random.default_rng(seed)
    s1 = random_pure(rng, (A0, B0))
    s2 = random_pure(rng, (A0, B0))
    if fidelity(s1, s2) > 1 - 1e-12:
        overlap = np.vdot(s1.amplitudes, s2.amplitudes)
        assert np.allclose(s1.amplitudes * overlap / abs(overlap), s2.amplitudes, atol=1e-6)


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_measurement_probabilities_sum(seed):
    rng = np.random.default_rng(seed)
    state = random_pure(rng, (A0, C0))
    a, b = brute.haar_qubit(rng)
    p = measure_in_basis(state, C0, (a, b)).prob_pass
    q = measure_in_basis(state, C0, (np.conj(b), -np.conj(a))).prob_pass
    assert p + q == pytest.approx(1.0, abs=1e-12)
