"""Pauli strings over GF(2) and stabilizer states.

A :class:`PauliString` stores bit vectors ``x`` and ``z`` together with a
phase relative to the named tensor product of I, X, Y, Z. Products are
evaluated in the ``X^x Z^z`` form where the only sign comes from moving
Z past X.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .linalg import DENSE_CAP, CapExceeded, DenseOperator

_MATS = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}
_PHASES = {1: 0, 1j: 1, -1: 2, -1j: 3}


# --- GF(2) linear algebra -------------------------------------------------

def gf2_row_reduce(mat: np.ndarray):
    """Reduced row echelon form over GF(2); returns (rref, pivot columns, transform).

    ``transform @ mat == rref`` (mod 2).
    """
    a = np.array(mat, dtype=np.uint8) & 1
    rows, cols = a.shape
    t = np.eye(rows, dtype=np.uint8)
    pivots = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        hits = np.nonzero(a[r:, c])[0]
        if hits.size == 0:
            continue
        p = r + hits[0]
        if p != r:
            a[[r, p]] = a[[p, r]]
            t[[r, p]] = t[[p, r]]
        others = np.nonzero(a[:, c])[0]
        others = others[others != r]
        a[others] ^= a[r]
        t[others] ^= t[r]
        pivots.append(c)
        r += 1
    return a, pivots, t


def gf2_rank(mat: np.ndarray) -> int:
    if np.size(mat) == 0:
        return 0
    return len(gf2_row_reduce(mat)[1])


def gf2_nullspace(mat: np.ndarray) -> np.ndarray:
    """Basis (as rows) of the right null space of ``mat`` over GF(2)."""
    a, pivots, _ = gf2_row_reduce(mat)
    cols = a.shape[1]
    free = [c for c in range(cols) if c not in set(pivots)]
    basis = np.zeros((len(free), cols), dtype=np.uint8)
    for i, f in enumerate(free):
        basis[i, f] = 1
        for r, p in enumerate(pivots):
            basis[i, p] = a[r, f]
    return basis


# --- Pauli strings ----------------------------------------------------------

@dataclass(frozen=True, eq=False)
class PauliString:
    x_bits: np.ndarray
    z_bits: np.ndarray
    phase_exp: int = 0

    def __post_init__(self):
        x = np.asarray(self.x_bits, dtype=np.uint8).reshape(-1) & 1
        z = np.asarray(self.z_bits, dtype=np.uint8).reshape(-1) & 1
        if x.shape != z.shape:
            raise ValueError("x and z bit vectors must have equal length")
        x.setflags(write=False)
        z.setflags(write=False)
        object.__setattr__(self, "x_bits", x)
        object.__setattr__(self, "z_bits", z)
        object.__setattr__(self, "phase_exp", int(self.phase_exp) % 4)

    @classmethod
    def from_label(cls, label: str, phase: complex = 1) -> "PauliString":
        label = label.upper()
        if set(label) - set("IXYZ"):
            raise ValueError(f"bad Pauli label {label!r}")
        x = [c in "XY" for c in label]
        z = [c in "ZY" for c in label]
        return cls(np.array(x), np.array(z), _phase_exp(phase))

    @classmethod
    def on_sites(cls, n: int, ops: dict, phase: complex = 1) -> "PauliString":
        """Pauli string with ``ops[site]`` in {'X','Y','Z'} and identity elsewhere."""
        label = ["I"] * n
        for site, kind in ops.items():
            label[site] = kind
        return cls.from_label("".join(label), phase)

    @classmethod
    def identity(cls, n: int) -> "PauliString":
        return cls(np.zeros(n, np.uint8), np.zeros(n, np.uint8))

    @property
    def n(self) -> int:
        return self.x_bits.size

    @property
    def phase(self) -> complex:
        return (1, 1j, -1, -1j)[self.phase_exp]

    @property
    def label(self) -> str:
        return "".join("IXZY"[int(a) + 2 * int(b)] for a, b in zip(self.x_bits, self.z_bits))

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(int(i) for i in np.nonzero(self.x_bits | self.z_bits)[0])

    @property
    def weight(self) -> int:
        return len(self.support)

    def is_hermitian(self) -> bool:
        return self.phase_exp in (0, 2)

    def symplectic(self) -> np.ndarray:
        return np.concatenate([self.x_bits, self.z_bits])

    def __mul__(self, other: "PauliString") -> "PauliString":
        if self.n != other.n:
            raise ValueError("Pauli strings act on different numbers of qubits")
        ny1 = int(np.sum(self.x_bits & self.z_bits))
        ny2 = int(np.sum(other.x_bits & other.z_bits))
        swap = int(np.sum(self.z_bits & other.x_bits))
        x = self.x_bits ^ other.x_bits
        z = self.z_bits ^ other.z_bits
        ny = int(np.sum(x & z))
        k = self.phase_exp + ny1 + other.phase_exp + ny2 + 2 * swap - ny
        return PauliString(x, z, k)

    def __neg__(self) -> "PauliString":
        return PauliString(self.x_bits, self.z_bits, self.phase_exp + 2)

    def __eq__(self, other) -> bool:
        return (isinstance(other, PauliString) and self.phase_exp == other.phase_exp
                and np.array_equal(self.x_bits, other.x_bits)
                and np.array_equal(self.z_bits, other.z_bits))

    def __hash__(self):
        return hash((self.x_bits.tobytes(), self.z_bits.tobytes(), self.phase_exp))

    def __repr__(self) -> str:
        sign = {0: "+", 1: "+i", 2: "-", 3: "-i"}[self.phase_exp]
        return f"PauliString({sign}{self.label})"


def _phase_exp(phase: complex) -> int:
    for key, exp in _PHASES.items():
        if abs(complex(phase) - key) < 1e-12:
            return exp
    raise ValueError(f"phase must be one of +1, -1, +i, -i, got {phase}")


def commutes(p: PauliString, q: PauliString) -> bool:
    if p.n != q.n:
        raise ValueError(f"length mismatch: {p.n} vs {q.n}")
    return int(np.sum(p.x_bits & q.z_bits) + np.sum(p.z_bits & q.x_bits)) % 2 == 0


def _stack(paulis: Sequence[PauliString]) -> tuple[np.ndarray, np.ndarray]:
    xs = np.array([p.x_bits for p in paulis], dtype=np.int64)
    zs = np.array([p.z_bits for p in paulis], dtype=np.int64)
    return xs, zs


def commutation_matrix(paulis: Sequence[PauliString]) -> np.ndarray:
    """Boolean matrix, True where the pair anticommutes."""
    if not paulis:
        return np.zeros((0, 0), dtype=bool)
    xs, zs = _stack(paulis)
    return ((xs @ zs.T + zs @ xs.T) % 2).astype(bool)


# --- Hamiltonians and stabilizer states -------------------------------------

@dataclass(frozen=True, eq=False)
class PauliHamiltonian:
    n: int
    terms: tuple

    def __post_init__(self):
        terms = tuple((float(c), p) for c, p in self.terms)
        for c, p in terms:
            if not np.isfinite(c):
                raise ValueError("coefficients must be finite")
            if p.n != self.n:
                raise ValueError("term acts on the wrong number of qubits")
            if not p.is_hermitian():
                raise ValueError("Pauli Hamiltonian terms must be Hermitian")
        object.__setattr__(self, "terms", terms)

    @property
    def m(self) -> int:
        return len(self.terms)

    @property
    def max_abs_coefficient(self) -> float:
        return max((abs(c) for c, _ in self.terms), default=0.0)

    @property
    def paulis(self) -> list[PauliString]:
        return [p for _, p in self.terms]


def all_terms_commute(h: PauliHamiltonian) -> bool:
    return not commutation_matrix(h.paulis).any()


@dataclass(frozen=True, eq=False)
class StabilizerState:
    n: int
    generators: tuple

    def __post_init__(self):
        gens = tuple(self.generators)
        if len(gens) != self.n:
            raise ValueError(f"need {self.n} generators, got {len(gens)}")
        for g in gens:
            if g.n != self.n:
                raise ValueError("generator acts on the wrong number of qubits")
            if not g.is_hermitian():
                raise ValueError("generator phases must be +1 or -1")
        if commutation_matrix(list(gens)).any():
            raise ValueError("generators do not pairwise commute")
        if self.n and gf2_rank(self.matrix_of(gens)) != self.n:
            raise ValueError("generators are not independent over GF(2)")
        object.__setattr__(self, "generators", gens)

    @staticmethod
    def matrix_of(paulis) -> np.ndarray:
        return np.array([p.symplectic() for p in paulis], dtype=np.uint8)

    @classmethod
    def zero(cls, n: int) -> "StabilizerState":
        return cls(n, tuple(PauliString.on_sites(n, {i: "Z"}) for i in range(n)))

    @cached_property
    def _elimination(self):
        return gf2_row_reduce(self.matrix_of(self.generators))


def stabilizer_expectation(s: StabilizerState, p: PauliString) -> float:
    """Expectation of a Hermitian Pauli string on a stabilizer state: -1, 0 or +1."""
    if s.n != p.n:
        raise ValueError(f"length mismatch: {s.n} vs {p.n}")
    if not all(commutes(g, p) for g in s.generators):
        return 0.0
    rref, pivots, t = s._elimination
    vec = p.symplectic().copy()
    combo = np.zeros(s.n, dtype=np.uint8)
    for r, c in enumerate(pivots):
        if vec[c]:
            vec ^= rref[r]
            combo ^= t[r]
    if vec.any():
        # commutes with a maximal stabilizer group yet outside it: cannot happen
        return 0.0
    prod = PauliString.identity(s.n)
    for i in np.nonzero(combo)[0]:
        prod = prod * s.generators[i]
    rel = (p.phase_exp - prod.phase_exp) % 4
    if rel == 0:
        return 1.0
    if rel == 2:
        return -1.0
    raise ValueError("Pauli string is not Hermitian")


def pauli_energy(h: PauliHamiltonian, s: StabilizerState) -> float:
    return float(sum(c * stabilizer_expectation(s, p) for c, p in h.terms))


def to_dense(obj) -> DenseOperator:
    """Dense matrix of a Pauli string or Pauli Hamiltonian."""
    n = obj.n
    if 2**n > DENSE_CAP:
        raise CapExceeded(f"{n} qubits exceed the dense cap")
    if isinstance(obj, PauliString):
        mat = np.array([[1.0 + 0j]])
        for ch in obj.label:
            mat = np.kron(mat, _MATS[ch])
        return DenseOperator((2,) * n, obj.phase * mat, obj.is_hermitian())
    if isinstance(obj, PauliHamiltonian):
        total = np.zeros((2**n, 2**n), dtype=complex)
        for c, p in obj.terms:
            total += c * to_dense(p).entries
        return DenseOperator((2,) * n, total)
    raise TypeError(f"cannot densify {type(obj).__name__}")


def local_matrix(p: PauliString) -> tuple[tuple[int, ...], np.ndarray]:
    """Restriction of ``p`` to its support: (support, 2^w x 2^w matrix with phase)."""
    support = p.support
    mat = np.array([[1.0 + 0j]])
    label = p.label
    for s in support:
        mat = np.kron(mat, _MATS[label[s]])
    return support, p.phase * mat


def complete_stabilizer(n: int, partial: Iterable[PauliString],
                        prefer: str = "Z") -> list[PauliString]:
    """Extend commuting independent generators to a full set of ``n``.

    Single-qubit ``prefer`` operators are tried in ascending qubit order first;
    any remaining slots are filled from the GF(2) centralizer basis, so the
    completion is deterministic.
    """
    gens = list(partial)
    mat = StabilizerState.matrix_of(gens) if gens else np.zeros((0, 2 * n), np.uint8)
    rank = gf2_rank(mat) if gens else 0
    if rank != len(gens):
        raise ValueError("partial generators are dependent")

    def try_add(cand: PauliString) -> bool:
        nonlocal mat, rank
        if not all(commutes(cand, g) for g in gens):
            return False
        new = np.vstack([mat, cand.symplectic()[None, :]])
        if gf2_rank(new) == rank + 1:
            gens.append(cand)
            mat, rank = new, rank + 1
            return True
        return False

    for q in range(n):
        if rank == n:
            break
        try_add(PauliString.on_sites(n, {q: prefer}))
    while rank < n:
        # centralizer: v with <v, g>_symplectic = 0 for all g
        swapped = np.concatenate([mat[:, n:], mat[:, :n]], axis=1)
        for v in gf2_nullspace(swapped):
            if try_add(PauliString(v[:n], v[n:])):
                break
        else:  # pragma: no cover - the centralizer always has room
            raise RuntimeError("failed to complete stabilizer group")
    return gens
