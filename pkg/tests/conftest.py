import itertools

import numpy as np
import pytest

from qpcpkit.hamiltonian import LocalHamiltonian, Term
from qpcpkit.pauli import PauliString, StabilizerState

PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.diag([1.0, -1.0]).astype(complex),
}
H_GATE = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
S_GATE = np.diag([1, 1j])
CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)


def brute_min_violations(f):
    return min(f.violated(bits) for bits in itertools.product([0, 1], repeat=f.n_vars))


def dense_pauli(label, phase=1):
    mat = np.array([[1.0 + 0j]])
    for ch in label:
        mat = np.kron(mat, PAULI[ch])
    return phase * mat


def embed_dense(mat, support, n):
    """Independent embedding by explicit basis enumeration (slow, n <= 8)."""
    dim = 2**n
    k = len(support)
    out = np.zeros((dim, dim), dtype=complex)
    for row in range(dim):
        rbits = [(row >> (n - 1 - q)) & 1 for q in range(n)]
        for lc in range(2**k):
            cbits = list(rbits)
            for j, s in enumerate(support):
                cbits[s] = (lc >> (k - 1 - j)) & 1
            col = int("".join(map(str, cbits)), 2)
            lr = int("".join(str(rbits[s]) for s in support), 2)
            out[row, col] += mat[lr, lc]
    return out


def random_hermitian(dim, rng, norm=1.0):
    a = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    h = (a + a.conj().T) / 2
    return norm * h / np.max(np.abs(np.linalg.eigvalsh(h)))


def random_local_hamiltonian(n, m, k, rng):
    terms = []
    for _ in range(m):
        support = tuple(sorted(rng.choice(n, size=k, replace=False).tolist()))
        terms.append(Term(support, random_hermitian(2**k, rng, rng.uniform(0.2, 1.0))))
    return LocalHamiltonian(n, tuple(terms))


def random_state(n, rng):
    v = rng.standard_normal(2**n) + 1j * rng.standard_normal(2**n)
    return v / np.linalg.norm(v)


def _conjugate(g: PauliString, gate, support):
    """U g U^dagger for a Pauli string g, found by dense decomposition on the gate support."""
    label = list(g.label)
    local = dense_pauli("".join(label[s] for s in support))
    conj = gate @ local @ gate.conj().T
    k = len(support)
    for cand in itertools.product("IXYZ", repeat=k):
        coeff = np.trace(dense_pauli("".join(cand)).conj().T @ conj) / 2**k
        if abs(abs(coeff) - 1) < 1e-9:
            for s, ch in zip(support, cand):
                label[s] = ch
            return PauliString.from_label("".join(label), g.phase * complex(np.round(coeff)))
    raise AssertionError("not a Clifford conjugation")


def random_clifford_state(n, depth, rng):
    """(StabilizerState, dense vector) from a random H/S/CNOT circuit on |0^n>."""
    gens = [PauliString.on_sites(n, {i: "Z"}) for i in range(n)]
    vec = np.zeros(2**n, dtype=complex)
    vec[0] = 1
    for _ in range(depth):
        kind = rng.integers(3) if n > 1 else rng.integers(2)
        if kind == 2:
            a, b = rng.choice(n, size=2, replace=False).tolist()
            gate, support = CNOT, (a, b)
        else:
            gate, support = (H_GATE, S_GATE)[kind], (int(rng.integers(n)),)
        vec = embed_dense(gate, support, n) @ vec
        gens = [_conjugate(g, gate, support) for g in gens]
    return StabilizerState(n, tuple(gens)), vec


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
