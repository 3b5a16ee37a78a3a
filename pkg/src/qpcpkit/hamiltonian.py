"""Local Hamiltonians: energies, ground energies, traces and the M = I - H/m operator."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.sparse.linalg import LinearOperator

from . import linalg
from .linalg import (CapExceeded, DenseOperator, DimensionError, PureState,
                     apply_local, reduced_from_pure)
from .pauli import PauliHamiltonian, local_matrix

NORM_TOL = 1e-9
MAX_SITE_DIM = 4


@dataclass(frozen=True, eq=False)
class Term:
    support: tuple[int, ...]
    matrix: np.ndarray
    label: str = ""

    @property
    def k(self) -> int:
        return len(self.support)


@dataclass(frozen=True, eq=False)
class LocalHamiltonian:
    """Sum of Hermitian terms, each stored on its own support with ``||h_i|| <= 1``."""

    n: int
    terms: tuple
    site_dims: tuple = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        dims = (2,) * self.n if self.site_dims is None else tuple(int(d) for d in self.site_dims)
        if len(dims) != self.n:
            raise DimensionError(f"{len(dims)} site dims for {self.n} sites")
        if any(not 2 <= d <= MAX_SITE_DIM for d in dims):
            raise DimensionError(f"site dimensions must lie in 2..{MAX_SITE_DIM}")
        terms = []
        for t in self.terms:
            if not isinstance(t, Term):
                support, matrix, *rest = t
                t = Term(tuple(support), matrix, *rest)
            support = tuple(int(s) for s in t.support)
            if len(set(support)) != len(support):
                raise DimensionError(f"duplicate site in support {support}")
            if any(not 0 <= s < self.n for s in support):
                raise DimensionError(f"support {support} out of range")
            mat = np.array(t.matrix, dtype=complex)
            ldim = int(np.prod([dims[s] for s in support], dtype=np.int64))
            if mat.shape != (ldim, ldim):
                raise DimensionError(f"term on {support} has shape {mat.shape}, expected {ldim}")
            if np.max(np.abs(mat - mat.conj().T), initial=0.0) > NORM_TOL:
                raise ValueError(f"term on {support} is not Hermitian")
            if ldim and np.max(np.abs(np.linalg.eigvalsh(mat))) > 1 + NORM_TOL:
                raise ValueError(f"term on {support} has operator norm above 1")
            mat.setflags(write=False)
            terms.append(Term(support, mat, t.label))
        object.__setattr__(self, "site_dims", dims)
        object.__setattr__(self, "terms", tuple(terms))

    @property
    def m(self) -> int:
        return len(self.terms)

    @property
    def dim(self) -> int:
        return int(np.prod(self.site_dims, dtype=np.int64))

    @property
    def locality(self) -> int:
        return max((t.k for t in self.terms), default=0)

    def select(self, *labels: str) -> "LocalHamiltonian":
        """Sub-Hamiltonian with only the terms carrying one of ``labels``."""
        keep = tuple(t for t in self.terms if t.label in labels)
        return LocalHamiltonian(self.n, keep, self.site_dims, dict(self.metadata))

    def is_diagonal(self) -> bool:
        return all(np.count_nonzero(t.matrix - np.diag(np.diag(t.matrix))) == 0
                   for t in self.terms)


@dataclass(frozen=True)
class PromiseGapSpec:
    a: float
    b: float

    def __post_init__(self):
        if not self.b - self.a > 0:
            raise ValueError("promise gap requires b > a")

    @property
    def gap(self) -> float:
        return self.b - self.a


@dataclass(frozen=True, eq=False)
class ProductState:
    """Tensor product of block states; ``blocks[i]`` lists the sites of ``factors[i]``."""

    factors: tuple
    blocks: tuple

    def __post_init__(self):
        blocks = tuple(tuple(int(s) for s in b) for b in self.blocks)
        factors = tuple(self.factors)
        if len(blocks) != len(factors):
            raise ValueError("one factor per block required")
        sites = [s for b in blocks for s in b]
        if sorted(sites) != list(range(len(sites))):
            raise ValueError("blocks must be disjoint and cover 0..n-1")
        for f, b in zip(factors, blocks):
            if f.n != len(b):
                raise ValueError("factor size does not match its block")
        object.__setattr__(self, "blocks", blocks)
        object.__setattr__(self, "factors", factors)

    @classmethod
    def singletons(cls, states: Sequence) -> "ProductState":
        factors = [s if isinstance(s, PureState) else PureState.from_vector(s, (len(s),))
                   for s in states]
        return cls(tuple(factors), tuple((i,) for i in range(len(factors))))

    @property
    def n(self) -> int:
        return sum(len(b) for b in self.blocks)

    @property
    def site_dims(self) -> tuple[int, ...]:
        dims = [0] * self.n
        for f, b in zip(self.factors, self.blocks):
            for d, s in zip(f.site_dims, b):
                dims[s] = d
        return tuple(dims)

    def is_singleton(self) -> bool:
        return all(len(b) == 1 for b in self.blocks)

    def to_pure(self) -> PureState:
        vec = np.array([1.0 + 0j])
        order = []
        for f, b in zip(self.factors, self.blocks):
            vec = np.kron(vec, f.amplitudes)
            order.extend(b)
        dims = self.site_dims
        tens = vec.reshape([dims[s] for s in order])
        tens = np.transpose(tens, np.argsort(order))
        return PureState(dims, tens.reshape(-1))


def from_pauli(h: PauliHamiltonian) -> LocalHamiltonian:
    """Store each Pauli term on its support; coefficients must have modulus at most 1."""
    terms = []
    for c, p in h.terms:
        support, mat = local_matrix(p)
        terms.append(Term(support, c * mat, "pauli"))
    return LocalHamiltonian(h.n, tuple(terms))


def _check_state(h: LocalHamiltonian, psi: PureState):
    if tuple(psi.site_dims) != h.site_dims:
        raise DimensionError(f"state dims {psi.site_dims} vs Hamiltonian dims {h.site_dims}")


def energy(h: LocalHamiltonian, psi: PureState) -> float:
    """Sum of term expectations, each taken on the reduced state of its support."""
    _check_state(h, psi)
    total = 0.0
    for t in h.terms:
        rho = reduced_from_pure(psi, t.support)
        total += float(np.real(np.trace(t.matrix @ rho)))
    return total


def qunsat(h: LocalHamiltonian, psi: PureState) -> float:
    if h.m == 0:
        raise ValueError("QUNSAT of an empty Hamiltonian is undefined")
    return energy(h, psi) / h.m


def apply_H(h: LocalHamiltonian, vec: np.ndarray) -> np.ndarray:
    vec = np.asarray(vec, dtype=complex).reshape(-1)
    if vec.size != h.dim:
        raise DimensionError(f"vector of length {vec.size} for dimension {h.dim}")
    out = np.zeros_like(vec)
    for t in h.terms:
        out += apply_local(t.matrix, t.support, vec, h.site_dims)
    return out


def apply_M(h: LocalHamiltonian, psi) -> np.ndarray:
    """(I - H/m) applied term by term; returns an unnormalized flat vector."""
    if h.m == 0:
        raise ValueError("M = I - H/m is undefined for m = 0")
    vec = psi.amplitudes if isinstance(psi, PureState) else np.asarray(psi, dtype=complex)
    if isinstance(psi, PureState):
        _check_state(h, psi)
    return vec - apply_H(h, vec) / h.m


def diagonal(h: LocalHamiltonian) -> np.ndarray:
    """Diagonal of H in the computational basis, assembled term by term."""
    diag = np.zeros(h.site_dims, dtype=float)
    for t in h.terms:
        local = np.real(np.diag(t.matrix)).reshape([h.site_dims[s] for s in t.support])
        rest = [s for s in range(h.n) if s not in t.support]
        expanded = np.expand_dims(local, axis=tuple(range(len(t.support), h.n)))
        order = list(t.support) + rest
        diag = diag + np.transpose(expanded, np.argsort(order))
    return diag.reshape(-1)


def to_dense(h: LocalHamiltonian) -> DenseOperator:
    if h.dim > linalg.DENSE_CAP:
        raise CapExceeded(f"dimension {h.dim} exceeds dense cap")
    total = np.zeros((h.dim, h.dim), dtype=complex)
    for t in h.terms:
        local = DenseOperator(tuple(h.site_dims[s] for s in t.support), t.matrix)
        total += linalg.embed(local, t.support, h.site_dims).entries
    return DenseOperator(h.site_dims, total)


def as_linear_operator(h: LocalHamiltonian) -> LinearOperator:
    return LinearOperator((h.dim, h.dim), matvec=lambda v: apply_H(h, v), dtype=complex)


def ground_energy(h: LocalHamiltonian) -> tuple[float, PureState]:
    """Smallest eigenvalue of H and an eigenvector."""
    if h.dim > linalg.DENSE_CAP:
        raise CapExceeded(f"dimension {h.dim} exceeds dense cap {linalg.DENSE_CAP}")
    if h.is_diagonal():
        diag = diagonal(h)
        idx = int(np.argmin(diag))
        vec = np.zeros(h.dim, dtype=complex)
        vec[idx] = 1.0
        return float(diag[idx]), PureState(h.site_dims, vec)
    if h.dim <= linalg.FULL_DIAG_MAX:
        return linalg.extremal_eigs(to_dense(h), "min")
    return linalg.extremal_eigs(as_linear_operator(h), "min", site_dims=h.site_dims)


def spectrum(h: LocalHamiltonian) -> np.ndarray:
    """All eigenvalues, ascending (dense diagonalization)."""
    if h.is_diagonal():
        return np.sort(diagonal(h))
    return np.linalg.eigvalsh(to_dense(h).entries)


def decide_lh(h: LocalHamiltonian, gap: PromiseGapSpec, tol: float = 1e-9) -> str:
    e0, _ = ground_energy(h)
    if e0 <= gap.a + tol:
        return "below_a"
    if e0 >= gap.b - tol:
        return "above_b"
    return "violated_promise"


def trace_local(h: LocalHamiltonian) -> float:
    """Tr H from local traces: each term contributes (dim of the complement) * Tr h_i."""
    total = 0.0
    for t in h.terms:
        rest = int(np.prod([d for s, d in enumerate(h.site_dims) if s not in t.support],
                           dtype=np.int64))
        total += rest * float(np.real(np.trace(t.matrix)))
    return total


def product_matrix_element(h: LocalHamiltonian, a: ProductState, b: ProductState) -> complex:
    """<a| (I - H/m) |b> for single-site product states, using only local overlaps."""
    if not (a.is_singleton() and b.is_singleton()):
        raise ValueError("product_matrix_element needs single-site product states")
    return site_matrix_element(h, _site_vectors(a), _site_vectors(b))


def site_matrix_element(h: LocalHamiltonian, av: Sequence, bv: Sequence) -> complex:
    """<a| (I - H/m) |b> for |a>, |b> given as per-site vectors (need not be normalized)."""
    if h.m == 0:
        raise ValueError("M = I - H/m is undefined for m = 0")
    if len(av) != h.n or len(bv) != h.n:
        raise DimensionError("one vector per site required")
    av = [np.asarray(x, dtype=complex) for x in av]
    bv = [np.asarray(x, dtype=complex) for x in bv]
    for s, (x, y) in enumerate(zip(av, bv)):
        if x.shape != (h.site_dims[s],) or y.shape != (h.site_dims[s],):
            raise DimensionError(f"site {s} vector has the wrong length")
    overlaps = np.array([np.vdot(x, y) for x, y in zip(av, bv)])
    total = complex(np.prod(overlaps))
    acc = 0j
    for t in h.terms:
        outside = [j for j in range(h.n) if j not in t.support]
        rest = complex(np.prod(overlaps[outside])) if outside else 1.0
        left = np.array([1.0 + 0j])
        right = np.array([1.0 + 0j])
        for s in t.support:
            left = np.kron(left, av[s])
            right = np.kron(right, bv[s])
        acc += rest * np.vdot(left, t.matrix @ right)
    return total - acc / h.m


def _site_vectors(p: ProductState) -> list[np.ndarray]:
    vecs = [None] * p.n
    for f, blk in zip(p.factors, p.blocks):
        vecs[blk[0]] = f.amplitudes
    return vecs


def diagonal_power_entry(h: LocalHamiltonian, ell: int, p) -> float:
    """<p| M^ell |p> via repeated matrix-free application of M.

    ``p`` may be a PureState, a ProductState or a raw (possibly unnormalized) vector.
    """
    if ell < 0:
        raise ValueError("ell must be non-negative")
    if isinstance(p, ProductState):
        p = p.to_pure()
    vec0 = p.amplitudes if isinstance(p, PureState) else np.asarray(p, dtype=complex).reshape(-1)
    if vec0.size > linalg.DENSE_CAP:
        raise CapExceeded("state exceeds dense cap")
    vec = vec0
    for _ in range(ell):
        vec = apply_M(h, vec)
    return float(np.real(np.vdot(vec0, vec)))


def choose_ell(m: int, n: int, gamma: float) -> int:
    """Smallest ell with (1 - gamma/m)^ell <= 2^(-n-1)."""
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    if m < 1:
        raise ValueError("m must be at least 1")
    q = 1.0 - gamma / m
    if q <= 0:
        return 1
    target = -(n + 1) * math.log(2)
    ell = max(1, math.ceil(target / math.log(q)))
    # guard the ceiling against rounding on either side
    while ell > 1 and (ell - 1) * math.log(q) <= target:
        ell -= 1
    while ell * math.log(q) > target:
        ell += 1
    return ell
