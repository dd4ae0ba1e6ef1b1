"""Deliberately naive reference implementations used as test oracles.

Everything here works on big-endian full matrices built with explicit loops
and np.kron, independent of the library's little-endian index arithmetic.
Tests describe states as {bit-tuple: amplitude} maps so both representations
are generated from the same abstract description.
"""
from __future__ import annotations

import numpy as np

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)


def rot(theta: float) -> np.ndarray:
    return np.array(
        [[np.cos(theta), np.sin(theta)], [-np.sin(theta), np.cos(theta)]], dtype=complex
    )


def kron_chain(*mats: np.ndarray) -> np.ndarray:
    out = np.array([[1.0 + 0j]])
    for m in mats:
        out = np.kron(out, m)
    return out


def big_index(bits: tuple[int, ...]) -> int:
    """Basis index with the first qubit as the most significant bit."""
    out = 0
    for b in bits:
        out = (out << 1) | b
    return out


def little_index(bits: tuple[int, ...]) -> int:
    """Basis index with the first qubit as the least significant bit."""
    return big_index(tuple(reversed(bits)))


def vec_from_terms(n: int, terms: dict[tuple[int, ...], complex], endian: str) -> np.ndarray:
    index = big_index if endian == "big" else little_index
    out = np.zeros(2 ** n, dtype=complex)
    for bits, amp in terms.items():
        assert len(bits) == n
        out[index(bits)] += amp
    return out


def lib_to_big(amplitudes: np.ndarray) -> np.ndarray:
    """Reorder a little-endian amplitude vector into big-endian."""
    n = amplitudes.size.bit_length() - 1
    out = np.zeros_like(amplitudes)
    for m in range(amplitudes.size):
        bits = tuple((m >> j) & 1 for j in range(n))  # bit j = qubit j
        out[big_index(bits)] = amplitudes[m]
    return out


def op_on(gate: np.ndarray, pos: int, n: int) -> np.ndarray:
    """Embed a single-qubit gate at position pos (big-endian, 0 = leftmost)."""
    return kron_chain(*[gate if k == pos else I2 for k in range(n)])


def cnot_on(control: int, target: int, n: int) -> np.ndarray:
    dim = 2 ** n
    out = np.zeros((dim, dim), dtype=complex)
    for m in range(dim):
        bits = [(m >> (n - 1 - k)) & 1 for k in range(n)]
        if bits[control]:
            bits[target] ^= 1
        out[big_index(tuple(bits)), m] = 1.0
    return out


def project_prob(vec: np.ndarray, pos: int, basis: np.ndarray, n: int) -> float:
    """Probability of projecting qubit pos onto the given single-qubit state."""
    proj = op_on(np.outer(basis, basis.conj()), pos, n)
    w = proj @ vec
    return float(np.vdot(w, w).real)


def partial_trace_big(rho: np.ndarray, n: int, keep: list[int]) -> np.ndarray:
    """Reduced density matrix over `keep` (big-endian positions, kept order)."""
    traced = [k for k in range(n) if k not in keep]
    dim_keep = 2 ** len(keep)
    out = np.zeros((dim_keep, dim_keep), dtype=complex)
    for row in range(2 ** n):
        rbits = [(row >> (n - 1 - k)) & 1 for k in range(n)]
        for col in range(2 ** n):
            cbits = [(col >> (n - 1 - k)) & 1 for k in range(n)]
            if any(rbits[t] != cbits[t] for t in traced):
                continue
            r = big_index(tuple(rbits[k] for k in keep))
            c = big_index(tuple(cbits[k] for k in keep))
            out[r, c] += rho[row, col]
    return out


def uhlmann_fidelity(rho: np.ndarray, sigma: np.ndarray) -> float:
    """Squared-overlap Uhlmann fidelity via scipy's matrix square root."""
    from scipy.linalg import sqrtm

    s = sqrtm(rho)
    inner = sqrtm(s @ sigma @ s)
    return float(np.real(np.trace(inner)) ** 2)


def haar_qubit(rng: np.random.Generator) -> tuple[complex, complex]:
    v = rng.normal(size=2) + 1j * rng.normal(size=2)
    v /= np.linalg.norm(v)
    return complex(v[0]), complex(v[1])


def random_unitary(rng: np.random.Generator, dim: int) -> np.ndarray:
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(g)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_density(rng: np.random.Generator, dim: int) -> np.ndarray:
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real
