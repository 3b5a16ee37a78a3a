"""Product-state approximations: edge expansion, entanglement entropy and the BH bound."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Sequence

import networkx as nx
import numpy as np

from .hamiltonian import LocalHamiltonian, ProductState, qunsat
from .linalg import PureState, partial_trace, vn_entropy

BLOCK_DIM_CAP = 2**10
CONVERGENCE_TOL = 1e-10
MAX_SWEEPS = 500


@dataclass(frozen=True)
class Partition:
    blocks: tuple
    allow_unequal: bool = False

    def __post_init__(self):
        blocks = tuple(tuple(int(s) for s in b) for b in self.blocks)
        sites = [s for b in blocks for s in b]
        if not blocks or any(not b for b in blocks):
            raise ValueError("partition blocks must be nonempty")
        if sorted(sites) != list(range(len(sites))):
            raise ValueError("blocks must be disjoint and cover 0..n-1")
        sizes = {len(b) for b in blocks}
        if len(sizes) > 1 and not self.allow_unequal:
            raise ValueError("blocks have unequal sizes; pass allow_unequal=True")
        object.__setattr__(self, "blocks", blocks)

    @classmethod
    def contiguous(cls, n: int, r: int) -> "Partition":
        blocks = [tuple(range(i, min(i + r, n))) for i in range(0, n, r)]
        return cls(tuple(blocks), allow_unequal=n % r != 0)

    @property
    def r(self) -> int:
        return len(self.blocks[0])

    @property
    def equal(self) -> bool:
        return len({len(b) for b in self.blocks}) == 1


@dataclass(frozen=True)
class BHReport:
    d: int
    D: int
    degree_is_max: bool
    avg_expansion: float
    avg_entropy_rate: float
    r: float
    eta_over_W: float
    W: float
    entropy_base: str = "bits"
    unequal_blocks: bool = False

    @property
    def eta(self) -> float:
        return self.W * self.eta_over_W

    def as_dict(self) -> dict:
        out = asdict(self)
        out["eta"] = self.eta
        return out


def edge_expansion(g: nx.Graph, X) -> float:
    """Crossing edges over edges with at least one endpoint in X."""
    X = set(X)
    nodes = set(g.nodes())
    if not X or X >= nodes:
        raise ValueError("X must be a nonempty proper subset of the vertices")
    incident = crossing = 0
    for u, v in g.edges():
        a, b = u in X, v in X
        if a or b:
            incident += 1
            if a != b:
                crossing += 1
    return crossing / incident if incident else 0.0


def interaction_graph(h: LocalHamiltonian) -> nx.Graph:
    g = nx.Graph()
    g.add_nodes_from(range(h.n))
    for t in h.terms:
        if len(t.support) == 2:
            g.add_edge(*t.support)
    return g


def eta_over_W(d: int, D: float, avg_expansion: float, avg_entropy_rate: float) -> float:
    """(d^6 E[Phi]/D * E[S]/r)^(1/8); ``avg_entropy_rate`` already carries the 1/r."""
    bracket = (d**6) * avg_expansion / D * avg_entropy_rate
    return float(max(bracket, 0.0) ** 0.125)


def bh_eta(h: LocalHamiltonian, psi: PureState, p: Partition, W: float = 1.0) -> BHReport:
    if any(t.k > 2 for t in h.terms):
        raise ValueError("BH bound applies to 2-local Hamiltonians")
    if len(set(h.site_dims)) != 1:
        raise ValueError("BH bound expects a uniform local dimension")
    d = h.site_dims[0]
    g = interaction_graph(h)
    degs = [deg for _, deg in g.degree()]
    D = max(degs) if degs else 0
    if D == 0:
        raise ValueError("interaction graph has no edges")
    regular = len(set(degs)) == 1
    if len(p.blocks) == 1:
        expansions = [0.0]
    else:
        expansions = [edge_expansion(g, b) for b in p.blocks]
    rates = [vn_entropy(partial_trace(psi, b)) / len(b) for b in p.blocks]
    avg_exp = float(np.mean(expansions))
    avg_rate = float(np.mean(rates))
    return BHReport(d=d, D=D, degree_is_max=not regular, avg_expansion=avg_exp,
                    avg_entropy_rate=avg_rate, r=float(np.mean([len(b) for b in p.blocks])),
                    eta_over_W=eta_over_W(d, D, avg_exp, avg_rate), W=W,
                    unequal_blocks=not p.equal)


# --- product-state optimizer ---------------------------------------------------------

def _haar(dim: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return v / np.linalg.norm(v)


class _ProductEnergy:
    """Energy bookkeeping for a fixed Hamiltonian and block partition."""

    def __init__(self, h: LocalHamiltonian, p: Partition):
        self.h = h
        self.blocks = p.blocks
        self.block_of = {s: i for i, b in enumerate(p.blocks) for s in b}
        self.pos = {s: j for b in p.blocks for j, s in enumerate(b)}
        self.block_dims = [tuple(h.site_dims[s] for s in b) for b in p.blocks]
        for dims in self.block_dims:
            if int(np.prod(dims)) > BLOCK_DIM_CAP:
                raise ValueError(f"block dimension {int(np.prod(dims))} exceeds {BLOCK_DIM_CAP}")
        self.touching = [[] for _ in p.blocks]
        for t in h.terms:
            for b in {self.block_of[s] for s in t.support}:
                self.touching[b].append(t)

    def local_rho(self, factors, block: int, sites: Sequence[int]) -> np.ndarray:
        f = PureState(self.block_dims[block], factors[block])
        return partial_trace(f, [self.pos[s] for s in sites]).entries

    def term_energy(self, t, factors) -> float:
        return float(np.real(np.trace(t.matrix @ self._env(t, factors, None)[1])))

    def _env(self, t, factors, skip):
        """Joint reduced state of the term's sites outside block ``skip``, in term order."""
        groups: dict[int, list[int]] = {}
        for s in t.support:
            groups.setdefault(self.block_of[s], []).append(s)
        order, rho = [], np.array([[1.0 + 0j]])
        for b, sites in groups.items():
            if b == skip:
                continue
            rho = np.kron(rho, self.local_rho(factors, b, sites))
            order.extend(sites)
        if skip is None:
            perm = [order.index(s) for s in t.support]
            dims = [self.h.site_dims[s] for s in order]
            k = len(order)
            rho = rho.reshape(dims + dims).transpose(perm + [k + i for i in perm])
            dim = int(np.prod(dims))
            return order, rho.reshape(dim, dim)
        return order, rho

    def total(self, factors) -> float:
        return float(sum(self.term_energy(t, factors) for t in self.h.terms))

    def effective(self, factors, block: int) -> np.ndarray:
        """Block Hamiltonian with every other block contracted against its factor."""
        bdims = self.block_dims[block]
        bdim = int(np.prod(bdims))
        heff = np.zeros((bdim, bdim), dtype=complex)
        for t in self.touching[block]:
            inside = [s for s in t.support if self.block_of[s] == block]
            env_sites, env_rho = self._env(t, factors, block)
            # term matrix with axes ordered (inside, env)
            k = t.k
            dims = [self.h.site_dims[s] for s in t.support]
            order = inside + env_sites
            perm = [t.support.index(s) for s in order]
            mat = t.matrix.reshape(dims + dims).transpose(perm + [k + i for i in perm])
            in_dim = int(np.prod([self.h.site_dims[s] for s in inside]))
            env_dim = env_rho.shape[0]
            mat = mat.reshape(in_dim, env_dim, in_dim, env_dim)
            local = np.einsum("aibj,ji->ab", mat, env_rho)
            heff += _embed_in_block(local, [self.pos[s] for s in inside], bdims)
        return 0.5 * (heff + heff.conj().T)


def _embed_in_block(local: np.ndarray, positions: Sequence[int], dims) -> np.ndarray:
    n = len(dims)
    k = len(positions)
    rest = [i for i in range(n) if i not in positions]
    rest_dim = int(np.prod([dims[i] for i in rest]))
    big = np.kron(local, np.eye(rest_dim))
    order = list(positions) + rest
    pd = [dims[i] for i in order]
    inv = list(np.argsort(order))
    big = big.reshape(pd + pd).transpose(inv + [n + i for i in inv])
    dim = int(np.prod(dims))
    return big.reshape(dim, dim)


def product_state_optimize(h: LocalHamiltonian, p: Partition, restarts: int = 10,
                           seed: int | None = 0) -> tuple[ProductState, float]:
    """Block coordinate descent over product states; best energy over seeded restarts."""
    book = _ProductEnergy(h, p)
    master = np.random.default_rng(seed)
    best_state, best_energy = None, np.inf
    for sub in master.integers(0, 2**63 - 1, size=max(1, restarts)):
        rng = np.random.default_rng(int(sub))
        factors = [_haar(int(np.prod(dims)), rng) for dims in book.block_dims]
        energy = book.total(factors)
        for _ in range(MAX_SWEEPS):
            for b in range(len(p.blocks)):
                vals, vecs = np.linalg.eigh(book.effective(factors, b))
                factors[b] = vecs[:, 0] / np.linalg.norm(vecs[:, 0])
            new = book.total(factors)
            done = abs(energy - new) <= CONVERGENCE_TOL
            energy = new
            if done:
                break
        if energy < best_energy:
            best_energy = energy
            best_state = [f.copy() for f in factors]
    state = ProductState(tuple(PureState(dims, f) for dims, f in zip(book.block_dims, best_state)),
                         p.blocks)
    return state, float(best_energy)


def product_energy(h: LocalHamiltonian, state: ProductState) -> float:
    """Energy of a product state computed blockwise, without the full state vector."""
    p = Partition(state.blocks, allow_unequal=True)
    book = _ProductEnergy(h, p)
    return book.total([f.amplitudes for f in state.factors])


def bh_inequality_check(h: LocalHamiltonian, psi: PureState, p: Partition, W: float = 1.0,
                        restarts: int = 10, seed: int | None = 0) -> dict:
    """Compare |QUNSAT(psi) - QUNSAT(phi*)| with the bound and report the smallest W that works."""
    report = bh_eta(h, psi, p, W)
    _, e_phi = product_state_optimize(h, p, restarts, seed)
    lhs = abs(qunsat(h, psi) - e_phi / h.m)
    if lhs <= 1e-12:
        w_min = 0.0
    elif report.eta_over_W == 0:
        w_min = math.inf
    else:
        w_min = lhs / report.eta_over_W
    return {"lhs": lhs, "eta_over_W": report.eta_over_W, "W": W, "W_min": w_min,
            "verdict": "holds" if lhs <= W * report.eta_over_W + 1e-12 else "violated_at_W",
            "report": report.as_dict()}
