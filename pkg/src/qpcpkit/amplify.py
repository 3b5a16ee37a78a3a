"""Constraint graphs, expanders, and gap amplification by powering and t-walks."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

import networkx as nx
import numpy as np

from .hamiltonian import LocalHamiltonian, Term, ground_energy, qunsat
from .linalg import DenseOperator, embed

BRUTE_FORCE_CAP = 2**20
WALK_CAP = 10**5
JOINT_SUPPORT_CAP = 12
KERNEL_CUTOFF = 1e-8


class CapExceededError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class ConstraintGraph:
    """Binary constraints on a graph.

    Classical instances carry a ``d x d`` boolean table per edge (True = satisfied).
    Quantum instances carry a ``d^2 x d^2`` projector per edge whose range is
    the violated subspace.
    """

    n: int
    d: int
    edges: tuple
    constraints: tuple
    quantum: bool = False
    degree: dict = field(init=False)

    def __post_init__(self):
        edges = tuple((int(u), int(v)) for u, v in self.edges)
        if len(edges) != len(self.constraints):
            raise ValueError("one constraint per edge required")
        cons = []
        for (u, v), c in zip(edges, self.constraints):
            if u == v or not (0 <= u < self.n and 0 <= v < self.n):
                raise ValueError(f"bad edge {(u, v)}")
            c = np.asarray(c)
            if self.quantum:
                c = c.astype(complex)
                if c.shape != (self.d**2, self.d**2):
                    raise ValueError("edge projector has the wrong shape")
                if (np.max(np.abs(c - c.conj().T)) > 1e-9
                        or np.max(np.abs(c @ c - c)) > 1e-9):
                    raise ValueError("edge constraint is not a Hermitian projector")
            else:
                c = c.astype(bool)
                if c.shape != (self.d, self.d):
                    raise ValueError("edge relation has the wrong shape")
            cons.append(c)
        deg = {v: 0 for v in range(self.n)}
        for u, v in edges:
            deg[u] += 1
            deg[v] += 1
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "constraints", tuple(cons))
        object.__setattr__(self, "degree", deg)

    @property
    def m(self) -> int:
        return len(self.edges)

    def graph(self) -> nx.MultiGraph:
        g = nx.MultiGraph()
        g.add_nodes_from(range(self.n))
        g.add_edges_from(self.edges)
        return g

    def is_regular(self) -> bool:
        return len(set(self.degree.values())) == 1

    def to_hamiltonian(self) -> LocalHamiltonian:
        """Quantum instance as a 2-local Hamiltonian; classical ones become diagonal projectors."""
        terms = []
        for (u, v), c in zip(self.edges, self.constraints):
            mat = c if self.quantum else np.diag((~c).reshape(-1).astype(float))
            terms.append(Term((u, v), mat, "edge"))
        return LocalHamiltonian(self.n, tuple(terms), (self.d,) * self.n)

    def as_quantum(self) -> "ConstraintGraph":
        if self.quantum:
            return self
        projs = [np.diag((~c).reshape(-1).astype(float)) for c in self.constraints]
        return ConstraintGraph(self.n, self.d, self.edges, tuple(projs), quantum=True)


def inequality_graph(g: nx.Graph, d: int) -> ConstraintGraph:
    """Coloring constraints: endpoints must differ."""
    edges = sorted(tuple(sorted(e)) for e in g.edges())
    rel = ~np.eye(d, dtype=bool)
    return ConstraintGraph(g.number_of_nodes(), d, tuple(edges), tuple(rel for _ in edges))


def _assignments(n: int, d: int) -> np.ndarray:
    if d**n > BRUTE_FORCE_CAP:
        raise CapExceededError(f"{d}^{n} assignments exceed the brute-force cap")
    return np.array(list(itertools.product(range(d), repeat=n)), dtype=np.int64).reshape(-1, n)


def _violation_table(c: ConstraintGraph, sigmas: np.ndarray) -> np.ndarray:
    """Boolean (assignments x edges), True where the edge is violated."""
    if c.quantum:
        raise TypeError("classical constraint graph required")
    cols = [~rel[sigmas[:, u], sigmas[:, v]] for (u, v), rel in zip(c.edges, c.constraints)]
    return np.stack(cols, axis=1) if cols else np.zeros((len(sigmas), 0), bool)


def unsat_value(c: ConstraintGraph, sigma: Sequence[int]) -> float:
    sigma = np.asarray(sigma, dtype=np.int64)
    if sigma.shape != (c.n,) or sigma.min(initial=0) < 0 or sigma.max(initial=0) >= c.d:
        raise ValueError("assignment out of alphabet range")
    if c.m == 0:
        return 0.0
    return float(_violation_table(c, sigma[None, :]).mean())


def min_unsat(c: ConstraintGraph) -> float:
    if c.m == 0:
        return 0.0
    return float(_violation_table(c, _assignments(c.n, c.d)).mean(axis=1).min())


@dataclass(frozen=True)
class ConjunctionInstance:
    """Amplified instance: each constraint is the conjunction of base edges ``groups[i]``.

    ``paths`` records the vertex sequence of each t-walk (empty for naive powering).
    """

    base: ConstraintGraph
    groups: tuple
    paths: tuple = ()

    @property
    def m(self) -> int:
        return len(self.groups)

    def unsat_value(self, sigma: Sequence[int]) -> float:
        viol = _violation_table(self.base, np.asarray(sigma, dtype=np.int64)[None, :])[0]
        return float(np.mean([viol[list(g)].any() for g in self.groups]))

    def min_unsat(self) -> float:
        sigmas = _assignments(self.base.n, self.base.d)
        viol = _violation_table(self.base, sigmas)
        best = np.inf
        groups = np.array(self.groups, dtype=np.int64)
        chunk = max(1, 2**22 // max(1, groups.size))
        for start in range(0, len(sigmas), chunk):
            v = viol[start:start + chunk]
            frac = v[:, groups].any(axis=2).mean(axis=1)
            best = min(best, float(frac.min()))
        return best


def naive_power(c: ConstraintGraph, t: int, cap: int = WALK_CAP) -> ConjunctionInstance:
    """All ordered t-tuples of base constraints, each read as a conjunction."""
    if t < 1:
        raise ValueError("t must be positive")
    if c.m**t > cap:
        raise CapExceededError(f"m^t = {c.m**t} exceeds cap {cap}")
    groups = tuple(itertools.product(range(c.m), repeat=t))
    return ConjunctionInstance(c, groups)


def _adjacency(c: ConstraintGraph) -> dict[int, list[tuple[int, int]]]:
    adj: dict[int, list[tuple[int, int]]] = {v: [] for v in range(c.n)}
    for idx, (u, v) in enumerate(c.edges):
        adj[u].append((v, idx))
        adj[v].append((u, idx))
    return adj


def enumerate_walks(c: ConstraintGraph, t: int, backtrack: bool = True,
                    cap: int = WALK_CAP) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
    """All t-step walks as (vertex path, edge ids), ordered by start vertex then neighbor order."""
    adj = _adjacency(c)
    walks = []
    for start in range(c.n):
        stack = [((start,), ())]
        while stack:
            path, eids = stack.pop()
            if len(eids) == t:
                walks.append((path, eids))
                if len(walks) > cap:
                    raise CapExceededError(f"more than {cap} walks")
                continue
            for nxt, eid in reversed(adj[path[-1]]):
                if not backtrack and eids and eid == eids[-1]:
                    continue
                stack.append((path + (nxt,), eids + (eid,)))
    return walks


def twalk_amplify(c: ConstraintGraph, t: int, backtrack: bool = True, cap: int = WALK_CAP):
    """One constraint per t-walk.

    Classical input gives a :class:`ConjunctionInstance`. Quantum input gives a
    :class:`LocalHamiltonian` whose terms project onto the orthogonal
    complement of the intersection of the null spaces along each walk.
    """
    if t < 1:
        raise ValueError("t must be positive")
    if not c.is_regular():
        raise ValueError("t-walk amplification expects a regular constraint graph")
    walks = enumerate_walks(c, t, backtrack, cap)
    if not c.quantum:
        return ConjunctionInstance(c, tuple(e for _, e in walks), tuple(p for p, _ in walks))
    terms = []
    for path, eids in walks:
        support = tuple(sorted(set(path)))
        if len(support) > JOINT_SUPPORT_CAP:
            raise CapExceededError(f"walk touches {len(support)} sites")
        terms.append(Term(support, walk_projector(c, support, eids), "walk"))
    return LocalHamiltonian(c.n, tuple(terms), (c.d,) * c.n,
                            metadata={"source": "twalk", "t": t, "backtrack": backtrack})


def walk_projector(c: ConstraintGraph, support: Sequence[int], eids: Sequence[int]) -> np.ndarray:
    """Projector onto the complement of the common kernel of the walk's edge projectors."""
    local = {s: i for i, s in enumerate(support)}
    dims = (c.d,) * len(support)
    total = np.zeros((c.d ** len(support),) * 2, dtype=complex)
    for eid in set(eids):
        u, v = c.edges[eid]
        op = DenseOperator((c.d, c.d), c.constraints[eid])
        total += embed(op, (local[u], local[v]), dims).entries
    # kernel of a sum of PSD projectors is the intersection of their kernels
    vals, vecs = np.linalg.eigh(total)
    kernel = vecs[:, vals <= KERNEL_CUTOFF]
    proj = np.eye(total.shape[0]) - kernel @ kernel.conj().T
    return 0.5 * (proj + proj.conj().T)


def quantum_unsat_of_amplified(h_walks: LocalHamiltonian, psi=None) -> float:
    """Average walk-constraint energy of ``psi``; the amplified ground value when omitted."""
    if psi is None:
        e0, _ = ground_energy(h_walks)
        return e0 / h_walks.m
    return qunsat(h_walks, psi)


def random_regular_graph(n: int, D: int, seed: int | None = None) -> nx.Graph:
    if (n * D) % 2 or D >= n:
        raise ValueError("need n*D even and D < n")
    return nx.random_regular_graph(D, n, seed=seed)


def spectral_gap(g: nx.Graph) -> float:
    """(D - lambda_2)/D for the adjacency matrix, D the maximum degree."""
    adj = nx.to_numpy_array(g, nodelist=sorted(g.nodes()))
    vals = np.sort(np.linalg.eigvalsh(adj))[::-1]
    D = max(dict(g.degree()).values())
    return float((D - vals[1]) / D)
