"""Generators for SAT Hamiltonians, CAT states, circuit Hamiltonians and Pauli codes."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import networkx as nx
import numpy as np

from .hamiltonian import LocalHamiltonian, Term
from .linalg import DimensionError, PureState, apply_local
from .pauli import (PauliHamiltonian, PauliString, StabilizerState,
                    complete_stabilizer)

UNITARY_TOL = 1e-9


# --- SAT -------------------------------------------------------------------

@dataclass(frozen=True)
class CnfFormula:
    n_vars: int
    clauses: tuple

    def __post_init__(self):
        clauses = tuple(tuple(int(l) for l in c) for c in self.clauses)
        for c in clauses:
            if not c:
                raise ValueError("empty clause")
            if any(l == 0 or abs(l) > self.n_vars for l in c):
                raise ValueError(f"literal out of range in clause {c}")
            if len({abs(l) for l in c}) != len(c):
                raise ValueError(f"clause {c} repeats a variable")
        object.__setattr__(self, "clauses", clauses)

    @property
    def m(self) -> int:
        return len(self.clauses)

    def violated(self, assignment: Sequence[int]) -> int:
        """Number of clauses falsified by a 0/1 assignment (index i is variable i+1)."""
        return sum(all((assignment[abs(l) - 1] == 1) != (l > 0) for l in c)
                   for c in self.clauses)


def random_ksat(n_vars: int, m: int, rng: np.random.Generator, k: int = 3) -> CnfFormula:
    clauses = []
    for _ in range(m):
        vs = rng.choice(n_vars, size=k, replace=False) + 1
        signs = rng.choice([-1, 1], size=k)
        clauses.append(tuple(int(v * s) for v, s in zip(vs, signs)))
    return CnfFormula(n_vars, tuple(clauses))


def clause_projector(clause: Sequence[int]) -> np.ndarray:
    """Rank-one projector onto the single assignment falsifying ``clause``.

    Bit order follows the literal order; a positive literal is falsified by 0.
    """
    k = len(clause)
    bits = [0 if lit > 0 else 1 for lit in clause]
    idx = int("".join(map(str, bits)), 2)
    mat = np.zeros((2**k, 2**k))
    mat[idx, idx] = 1.0
    return mat


def sat_to_hamiltonian(f: CnfFormula) -> LocalHamiltonian:
    terms = [Term(tuple(abs(l) - 1 for l in c), clause_projector(c), "clause")
             for c in f.clauses]
    return LocalHamiltonian(f.n_vars, tuple(terms), metadata={"source": "cnf"})


# --- CAT states ----------------------------------------------------------------

def cat_state(n: int, sign: int = +1) -> PureState:
    if n < 1:
        raise ValueError("n must be at least 1")
    vec = np.zeros(2**n, dtype=complex)
    vec[0] = 1 / np.sqrt(2)
    vec[-1] = (1 if sign >= 0 else -1) / np.sqrt(2)
    return PureState((2,) * n, vec)


# --- circuits and history states -----------------------------------------------

@dataclass(frozen=True, eq=False)
class QuantumCircuit:
    n_qubits: int
    gates: tuple

    def __post_init__(self):
        gates = []
        for support, u in self.gates:
            support = tuple(int(s) for s in support)
            u = np.asarray(u, dtype=complex)
            if len(support) not in (1, 2) or len(set(support)) != len(support):
                raise ValueError(f"gates act on one or two distinct qubits, got {support}")
            if any(not 0 <= s < self.n_qubits for s in support):
                raise ValueError(f"gate support {support} out of range")
            if u.shape != (2 ** len(support),) * 2:
                raise ValueError("gate matrix has the wrong shape")
            if np.max(np.abs(u @ u.conj().T - np.eye(u.shape[0]))) > UNITARY_TOL:
                raise ValueError("gate is not unitary")
            gates.append((support, u))
        object.__setattr__(self, "gates", tuple(gates))

    @property
    def T(self) -> int:
        return len(self.gates)

    def run(self, vec: np.ndarray, steps: int | None = None) -> np.ndarray:
        for support, u in self.gates[:steps]:
            vec = apply_local(u, support, vec, (2,) * self.n_qubits)
        return vec


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def _clock_pattern(t: int, T: int) -> tuple[list[int], list[int], list[int]]:
    """Clock bits (1-based) and their values distinguishing unary |t-1> from |t>."""
    if T == 1:
        return [1], [0], [1]
    if t == 1:
        return [1, 2], [0, 0], [1, 0]
    if t == T:
        return [T - 1, T], [1, 0], [1, 1]
    return [t - 1, t, t + 1], [1, 0, 0], [1, 1, 0]


def _ket(bits: Sequence[int]) -> np.ndarray:
    vec = np.zeros(2 ** len(bits))
    vec[int("".join(map(str, bits)), 2)] = 1.0
    return vec


def clock_state(t: int, T: int) -> np.ndarray:
    """Unary clock |1^t 0^(T-t)> on T qubits."""
    return _ket([1] * t + [0] * (T - t))


def circuit_to_hamiltonian(c: QuantumCircuit, input_bits: Sequence[int] = (),
                           witness_sites: int | None = None,
                           output_qubit: int = 0) -> LocalHamiltonian:
    """Circuit-to-Hamiltonian map with a unary clock of ``T`` qubits.

    Data qubits come first (input sites, then witness sites), clock qubits
    after. Term labels: ``propagation``, ``input``, ``output``, ``clock``.
    """
    T = c.T
    if T < 1:
        raise ValueError("circuit needs at least one gate")
    nq = c.n_qubits
    if witness_sites is None:
        witness_sites = nq - len(input_bits)
    if len(input_bits) + witness_sites != nq:
        raise ValueError("input bits plus witness sites must equal the qubit count")
    clock = lambda j: nq + j - 1  # noqa: E731
    terms = []
    for t, (support, u) in enumerate(c.gates, start=1):
        bits, before, after = _clock_pattern(t, T)
        kb, ka = _ket(before), _ket(after)
        eye = np.eye(u.shape[0])
        mat = 0.5 * (np.kron(eye, np.outer(ka, ka)) + np.kron(eye, np.outer(kb, kb)))
        fwd = np.kron(u, np.outer(ka, kb))
        mat = mat - 0.5 * (fwd + fwd.conj().T)
        terms.append(Term(tuple(support) + tuple(clock(j) for j in bits), mat, "propagation"))
    p0 = np.diag([1.0, 0.0])
    for j, x in enumerate(input_bits):
        wrong = np.diag([0.0, 1.0]) if int(x) == 0 else np.diag([1.0, 0.0])
        terms.append(Term((j, clock(1)), np.kron(wrong, p0), "input"))
    terms.append(Term((output_qubit, clock(T)), np.kron(p0, np.diag([0.0, 1.0])), "output"))
    for j in range(1, T):
        terms.append(Term((clock(j), clock(j + 1)), np.diag([0.0, 1.0, 0.0, 0.0]), "clock"))
    return LocalHamiltonian(nq + T, tuple(terms),
                            metadata={"source": "circuit", "T": T, "data_qubits": nq})


def history_state(c: QuantumCircuit, witness: PureState | None = None,
                  input_bits: Sequence[int] = ()) -> PureState:
    """Uniform superposition of the circuit's snapshots entangled with the unary clock."""
    T, nq = c.T, c.n_qubits
    init = np.array([1.0 + 0j])
    if input_bits:
        init = _ket(list(input_bits)).astype(complex)
    if witness is not None:
        init = np.kron(init, witness.amplitudes)
    if init.size != 2**nq:
        raise DimensionError("input bits and witness do not cover the data qubits")
    total = np.zeros(2 ** (nq + T), dtype=complex)
    snap = init
    for t in range(T + 1):
        if t:
            support, u = c.gates[t - 1]
            snap = apply_local(u, support, snap, (2,) * nq)
        total += np.kron(snap, clock_state(t, T))
    return PureState((2,) * (nq + T), total / np.sqrt(T + 1))


# --- toric code ---------------------------------------------------------------

@dataclass(frozen=True)
class TorusLattice:
    """Edges of the periodic L x L grid.

    Horizontal edge ``h(r, c)`` joins vertex (r, c) to (r, c+1) and has id
    ``r*L + c``; vertical edge ``v(r, c)`` joins (r, c) to (r+1, c) and has id
    ``L*L + r*L + c``. Plaquette (r, c) has (r, c) as its top-left corner.
    """

    L: int

    def h(self, r: int, c: int) -> int:
        return (r % self.L) * self.L + c % self.L

    def v(self, r: int, c: int) -> int:
        return self.L**2 + (r % self.L) * self.L + c % self.L

    @property
    def n_edges(self) -> int:
        return 2 * self.L**2

    def edge_coords(self, e: int) -> tuple[int, int, str]:
        kind = "h" if e < self.L**2 else "v"
        r, c = divmod(e % self.L**2, self.L)
        return r, c, kind

    def edge_vertices(self, e: int) -> tuple[tuple[int, int], tuple[int, int]]:
        r, c, kind = self.edge_coords(e)
        if kind == "h":
            return (r, c), (r, (c + 1) % self.L)
        return (r, c), ((r + 1) % self.L, c)

    def plaquette(self, r: int, c: int) -> tuple[int, ...]:
        return (self.h(r, c), self.h(r + 1, c), self.v(r, c), self.v(r, c + 1))

    def star(self, r: int, c: int) -> tuple[int, ...]:
        return (self.h(r, c), self.h(r, c - 1), self.v(r, c), self.v(r - 1, c))

    @property
    def plaquettes(self) -> list[tuple[int, ...]]:
        return [self.plaquette(r, c) for r in range(self.L) for c in range(self.L)]

    @property
    def stars(self) -> list[tuple[int, ...]]:
        return [self.star(r, c) for r in range(self.L) for c in range(self.L)]


def toric_code(L: int) -> tuple[PauliHamiltonian, TorusLattice]:
    """-sum_p A_p - sum_s B_s with A_p = prod X on plaquettes, B_s = prod Z on stars.

    Terms are ordered with all plaquettes first, then all stars.
    """
    if L < 2:
        raise ValueError("toric code needs L >= 2")
    lat = TorusLattice(L)
    n = lat.n_edges
    terms = [(-1.0, PauliString.on_sites(n, {e: "X" for e in p})) for p in lat.plaquettes]
    terms += [(-1.0, PauliString.on_sites(n, {e: "Z" for e in s})) for s in lat.stars]
    return PauliHamiltonian(n, tuple(terms)), lat


def toric_loop_state(L: int) -> StabilizerState:
    """Stabilizer form of the uniform superposition over all cycles of the torus graph.

    Independent stars and plaquettes (one of each dropped) plus X strings along
    the two non-contractible primal cycles.
    """
    h, lat = toric_code(L)
    n = lat.n_edges
    plaq = [p for _, p in h.terms[: L * L]][:-1]
    stars = [p for _, p in h.terms[L * L:]][:-1]
    horiz = PauliString.on_sites(n, {lat.h(0, c): "X" for c in range(L)})
    vert = PauliString.on_sites(n, {lat.v(r, 0): "X" for r in range(L)})
    return StabilizerState(n, tuple(plaq + stars + [horiz, vert]))


def torus_cycle_space(L: int) -> list[int]:
    """All edge subsets (as bitmasks over edge ids) with even degree at every vertex.

    Exhaustive over 2^(2L^2) subsets, so only for tiny L.
    """
    lat = TorusLattice(L)
    n = lat.n_edges
    if n > 20:
        raise ValueError("exhaustive cycle enumeration only for L <= 3")
    incid = np.zeros((L * L, n), dtype=np.int64)
    for e in range(n):
        for (r, c) in lat.edge_vertices(e):
            incid[r * L + c, e] += 1
    masks = np.arange(2**n, dtype=np.int64)
    bits = (masks[:, None] >> (n - 1 - np.arange(n))[None, :]) & 1
    even = ((bits @ incid.T) % 2 == 0).all(axis=1)
    return [int(m) for m in masks[even]]


def toric_loop_state_dense(L: int = 2) -> PureState:
    """|Omega> built as an explicit sum over cycles (big-endian: edge 0 is the top bit)."""
    n = 2 * L * L
    vec = np.zeros(2**n, dtype=complex)
    for mask in torus_cycle_space(L):
        vec[mask] = 1.0
    return PureState.from_vector(vec)


# --- Cartesian product code ---------------------------------------------------

@dataclass(frozen=True)
class ProductCodeData:
    vertices: tuple
    edges: tuple
    plaquettes: tuple
    stars: tuple
    plaquette_factors: tuple


def cartesian_product_code(g: nx.Graph) -> tuple[PauliHamiltonian, ProductCodeData]:
    """Qubits on edges of G x G (Cartesian product); X on 4-loops, Z on vertex stars."""
    if g.number_of_nodes() == 0 or not nx.is_connected(g):
        raise ValueError("graph must be connected")
    degrees = {d for _, d in g.degree()}
    if len(degrees) != 1:
        raise ValueError("graph must be regular")
    D = degrees.pop()
    if D <= 2:
        raise ValueError("graph degree must exceed 2")
    if any(u == v for u, v in g.edges()) or nx.girth(g) <= 4:
        raise ValueError("graph girth must be larger than 4")
    nodes = sorted(g.nodes())
    base_edges = sorted(tuple(sorted(e)) for e in g.edges())
    vertices = [(a, b) for a in nodes for b in nodes]
    edges = []
    for (a1, a2) in base_edges:
        for b in nodes:
            edges.append(((a1, b), (a2, b)))
    for a in nodes:
        for (b1, b2) in base_edges:
            edges.append(((a, b1), (a, b2)))
    edges.sort()
    eid = {frozenset(e): i for i, e in enumerate(edges)}
    n = len(edges)

    plaquettes, factors = [], []
    for (a1, a2) in base_edges:
        for (b1, b2) in base_edges:
            loop = [((a1, b1), (a2, b1)), ((a2, b1), (a2, b2)),
                    ((a2, b2), (a1, b2)), ((a1, b2), (a1, b1))]
            plaquettes.append(tuple(eid[frozenset(e)] for e in loop))
            factors.append((0, 1, 0, 1))
    stars = []
    for vtx in vertices:
        a, b = vtx
        inc = [frozenset((vtx, (x, b))) for x in g.neighbors(a)]
        inc += [frozenset((vtx, (a, y))) for y in g.neighbors(b)]
        stars.append(tuple(sorted(eid[e] for e in inc)))

    terms = [(-1.0, PauliString.on_sites(n, {e: "X" for e in p})) for p in plaquettes]
    terms += [(-1.0, PauliString.on_sites(n, {e: "Z" for e in s})) for s in stars]
    data = ProductCodeData(tuple(vertices), tuple(edges), tuple(plaquettes),
                           tuple(stars), tuple(factors))
    return PauliHamiltonian(n, tuple(terms)), data


def petersen_graph() -> nx.Graph:
    return nx.petersen_graph()


# --- trivial states -------------------------------------------------------------

def square_partition_trivial_state(L: int, ell: int) -> tuple[StabilizerState, list[int]]:
    """Product of per-square groundstates after dropping terms that straddle squares.

    Each edge belongs to the square holding its base vertex (r, c). A term is
    kept when all of its edges belong to one square. Inside a square the state
    is fixed by the kept terms, then completed with single-qubit Z where
    possible and centralizer vectors otherwise.
    """
    if ell < 2:
        raise ValueError("ell must be at least 2")
    if L % ell:
        raise ValueError(f"ell={ell} does not divide L={L}")
    h, lat = toric_code(L)
    n = lat.n_edges

    def owner(e: int) -> tuple[int, int]:
        r, c, _ = lat.edge_coords(e)
        return r // ell, c // ell

    removed, kept_by_square = [], {}
    for idx, (_, p) in enumerate(h.terms):
        owners = {owner(e) for e in p.support}
        if len(owners) == 1:
            kept_by_square.setdefault(owners.pop(), []).append(p)
        else:
            removed.append(idx)

    gens: list[PauliString] = []
    squares = sorted({owner(e) for e in range(n)})
    for sq in squares:
        qubits = [e for e in range(n) if owner(e) == sq]
        local = {e: i for i, e in enumerate(qubits)}
        partial = []
        for p in kept_by_square.get(sq, []):
            label = p.label
            partial.append(PauliString.on_sites(len(qubits), {local[e]: label[e] for e in p.support}))
        partial = _independent(partial)
        for g in complete_stabilizer(len(qubits), partial, prefer="Z"):
            lab = g.label
            gens.append(PauliString.on_sites(
                n, {qubits[i]: lab[i] for i in range(len(qubits)) if lab[i] != "I"}, g.phase))
    return StabilizerState(n, tuple(gens)), removed


def _independent(paulis: list[PauliString]) -> list[PauliString]:
    from .pauli import gf2_rank
    out: list[PauliString] = []
    for p in paulis:
        mat = StabilizerState.matrix_of(out + [p])
        if gf2_rank(mat) == len(out) + 1:
            out.append(p)
    return out


def shallow_circuit_state(n: int, depth: int, layers: Sequence[Sequence]) -> tuple[PureState, int]:
    """Apply layers of disjoint 1- and 2-qubit unitaries to |0^n>; returns (state, depth used)."""
    if len(layers) > depth:
        raise ValueError(f"{len(layers)} layers exceed depth {depth}")
    vec = np.zeros(2**n, dtype=complex)
    vec[0] = 1.0
    for layer in layers:
        used: set[int] = set()
        for support, u in layer:
            support = tuple(support)
            if len(support) > 2:
                raise ValueError("gates must be 1- or 2-local")
            if used & set(support):
                raise ValueError(f"overlapping supports within a layer at {support}")
            used |= set(support)
            vec = apply_local(np.asarray(u, dtype=complex), support, vec, (2,) * n)
    return PureState((2,) * n, vec), len(layers)


def random_shallow_layers(n: int, depth: int, rng: np.random.Generator) -> list[list]:
    """Brick-wall layers of Haar-random two-qubit gates."""
    layers = []
    for d in range(depth):
        start = d % 2
        layer = [((q, q + 1), random_unitary(4, rng)) for q in range(start, n - 1, 2)]
        layers.append(layer)
    return layers


HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)


def all_sign_family(n_vars: int = 3) -> CnfFormula:
    """Every sign pattern on the same variables: each assignment falsifies exactly one clause."""
    vars_ = range(1, n_vars + 1)
    clauses = [tuple(v * s for v, s in zip(vars_, signs))
               for signs in itertools.product([1, -1], repeat=n_vars)]
    return CnfFormula(n_vars, tuple(clauses))
