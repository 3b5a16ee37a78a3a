"""Dense complex linear algebra for desk-scale states and operators.

Site ordering is big-endian: site 0 is the most significant index of the
amplitude layout, so ``|i_0 i_1 ... i_{n-1}>`` sits at flat index
``sum_j i_j * prod_{k>j} d_k``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.sparse.linalg import LinearOperator, eigsh

DENSE_CAP = 2**14
FULL_DIAG_MAX = 2**10

HERMITIAN_TOL = 1e-9
NORM_TOL = 1e-9


class DimensionError(ValueError):
    """Shapes or site dimensions do not line up."""


class CapExceeded(ValueError):
    """A dense object would exceed the configured dimension cap."""


def _dims(site_dims: Sequence[int]) -> tuple[int, ...]:
    dims = tuple(int(d) for d in site_dims)
    if any(d < 1 for d in dims):
        raise DimensionError(f"site dimensions must be positive, got {dims}")
    return dims


@dataclass(frozen=True, eq=False)
class PureState:
    site_dims: tuple[int, ...]
    amplitudes: np.ndarray

    def __post_init__(self):
        dims = _dims(self.site_dims)
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if amps.size != int(np.prod(dims, dtype=np.int64)):
            raise DimensionError(
                f"{amps.size} amplitudes do not match site dims {dims}")
        if abs(np.linalg.norm(amps) - 1.0) > NORM_TOL:
            raise ValueError("state is not normalized")
        amps.setflags(write=False)
        object.__setattr__(self, "site_dims", dims)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_vector(cls, vec, site_dims=None) -> "PureState":
        """Normalize ``vec`` and wrap it; qubit sites are assumed if dims are omitted."""
        vec = np.asarray(vec, dtype=complex).reshape(-1)
        if site_dims is None:
            n = int(round(np.log2(vec.size)))
            if 2**n != vec.size:
                raise DimensionError("length is not a power of two; pass site_dims")
            site_dims = (2,) * n
        norm = np.linalg.norm(vec)
        if norm == 0:
            raise ValueError("zero vector cannot be normalized")
        return cls(tuple(site_dims), vec / norm)

    @classmethod
    def basis(cls, digits: Sequence[int], site_dims=None) -> "PureState":
        digits = tuple(int(b) for b in digits)
        dims = _dims(site_dims) if site_dims is not None else (2,) * len(digits)
        vec = np.zeros(int(np.prod(dims, dtype=np.int64)), dtype=complex)
        vec[int(np.ravel_multi_index(digits, dims)) if dims else 0] = 1.0
        return cls(dims, vec)

    @property
    def n(self) -> int:
        return len(self.site_dims)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def tensor_view(self) -> np.ndarray:
        return self.amplitudes.reshape(self.site_dims)

    def density(self) -> "DensityMatrix":
        return DensityMatrix(self.site_dims, np.outer(self.amplitudes, self.amplitudes.conj()))


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    site_dims: tuple[int, ...]
    entries: np.ndarray

    def __post_init__(self):
        dims = _dims(self.site_dims)
        mat = np.asarray(self.entries, dtype=complex)
        dim = int(np.prod(dims, dtype=np.int64))
        if mat.shape != (dim, dim):
            raise DimensionError(f"matrix shape {mat.shape} does not match dims {dims}")
        if np.max(np.abs(mat - mat.conj().T), initial=0.0) > HERMITIAN_TOL:
            raise ValueError("density matrix is not Hermitian")
        if abs(np.trace(mat).real - 1.0) > NORM_TOL:
            raise ValueError("density matrix does not have unit trace")
        if dim and np.linalg.eigvalsh(mat).min() < -NORM_TOL:
            raise ValueError("density matrix is not positive semidefinite")
        mat.setflags(write=False)
        object.__setattr__(self, "site_dims", dims)
        object.__setattr__(self, "entries", mat)

    @property
    def n(self) -> int:
        return len(self.site_dims)


@dataclass(frozen=True, eq=False)
class DenseOperator:
    site_dims: tuple[int, ...]
    entries: np.ndarray
    hermitian: bool = field(default=True)

    def __post_init__(self):
        dims = _dims(self.site_dims)
        mat = np.asarray(self.entries, dtype=complex)
        dim = int(np.prod(dims, dtype=np.int64))
        if mat.shape != (dim, dim):
            raise DimensionError(f"matrix shape {mat.shape} does not match dims {dims}")
        if self.hermitian and np.max(np.abs(mat - mat.conj().T), initial=0.0) > HERMITIAN_TOL:
            raise ValueError("operator flagged Hermitian but M != M^dagger")
        mat.setflags(write=False)
        object.__setattr__(self, "site_dims", dims)
        object.__setattr__(self, "entries", mat)

    @classmethod
    def qubits(cls, matrix, hermitian: bool = True) -> "DenseOperator":
        matrix = np.asarray(matrix, dtype=complex)
        n = int(round(np.log2(matrix.shape[0])))
        return cls((2,) * n, matrix, hermitian)

    @classmethod
    def identity(cls, site_dims) -> "DenseOperator":
        dims = _dims(site_dims)
        return cls(dims, np.eye(int(np.prod(dims, dtype=np.int64))))

    @property
    def n(self) -> int:
        return len(self.site_dims)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]


def tensor(a, b):
    """Kronecker product of two states or two operators of the same kind."""
    if isinstance(a, PureState) and isinstance(b, PureState):
        return PureState(a.site_dims + b.site_dims, np.kron(a.amplitudes, b.amplitudes))
    if isinstance(a, DensityMatrix) and isinstance(b, DensityMatrix):
        return DensityMatrix(a.site_dims + b.site_dims, np.kron(a.entries, b.entries))
    if isinstance(a, DenseOperator) and isinstance(b, DenseOperator):
        return DenseOperator(a.site_dims + b.site_dims, np.kron(a.entries, b.entries),
                             a.hermitian and b.hermitian)
    raise TypeError(f"cannot tensor {type(a).__name__} with {type(b).__name__}")


def _check_support(support: Sequence[int], n: int) -> tuple[int, ...]:
    support = tuple(int(s) for s in support)
    if len(set(support)) != len(support):
        raise DimensionError(f"duplicate index in support {support}")
    for s in support:
        if not 0 <= s < n:
            raise DimensionError(f"site {s} out of range for {n} sites")
    return support


def apply_local(matrix: np.ndarray, support: Sequence[int], psi: np.ndarray,
                site_dims: Sequence[int]) -> np.ndarray:
    """Apply a matrix acting on ``support`` to a flat vector without forming the full operator."""
    dims = tuple(site_dims)
    k = len(support)
    local_dims = tuple(dims[s] for s in support)
    tens = psi.reshape(dims)
    op = np.asarray(matrix).reshape(local_dims + local_dims)
    out = np.tensordot(op, tens, axes=(list(range(k, 2 * k)), list(support)))
    # tensordot puts the operator's output axes first
    out = np.moveaxis(out, list(range(k)), list(support))
    return out.reshape(-1)


def embed(local: DenseOperator, support: Sequence[int], full_dims: Sequence[int]) -> DenseOperator:
    full_dims = _dims(full_dims)
    n = len(full_dims)
    support = _check_support(support, n)
    if tuple(full_dims[s] for s in support) != local.site_dims:
        raise DimensionError(
            f"local dims {local.site_dims} do not match {[full_dims[s] for s in support]}")
    dim = int(np.prod(full_dims, dtype=np.int64))
    if dim > DENSE_CAP:
        raise CapExceeded(f"dimension {dim} exceeds dense cap {DENSE_CAP}")
    rest = [s for s in range(n) if s not in support]
    rest_dim = int(np.prod([full_dims[s] for s in rest], dtype=np.int64))
    big = np.kron(local.entries, np.eye(rest_dim))
    order = list(support) + rest
    perm_dims = [full_dims[s] for s in order]
    big = big.reshape(perm_dims + perm_dims)
    inv = np.argsort(order)
    big = big.transpose(list(inv) + [n + i for i in inv])
    return DenseOperator(full_dims, big.reshape(dim, dim), local.hermitian)


def reduced_from_pure(psi: PureState, keep: Sequence[int]) -> np.ndarray:
    """Reduced density matrix entries of a pure state on ``keep`` (in the given order)."""
    keep = _check_support(keep, psi.n)
    rest = [s for s in range(psi.n) if s not in keep]
    tens = np.transpose(psi.tensor_view(), list(keep) + rest)
    kdim = int(np.prod([psi.site_dims[s] for s in keep], dtype=np.int64))
    mat = tens.reshape(kdim, -1)
    return mat @ mat.conj().T


def partial_trace(rho, keep: Sequence[int]) -> DensityMatrix:
    """Trace out every site not in ``keep``; the result orders its sites as ``keep``."""
    if isinstance(rho, PureState):
        keep = _check_support(keep, rho.n)
        return DensityMatrix(tuple(rho.site_dims[s] for s in keep), reduced_from_pure(rho, keep))
    if isinstance(rho, DenseOperator):
        rho = DensityMatrix(rho.site_dims, rho.entries)
    n = rho.n
    keep = _check_support(keep, n)
    dims = rho.site_dims
    tens = rho.entries.reshape(dims + dims)
    row = list(range(n))
    col = [s if s not in keep else n + s for s in range(n)]
    out = [s for s in keep] + [n + s for s in keep]
    red = np.einsum(tens, row + col, out)
    kdim = int(np.prod([dims[s] for s in keep], dtype=np.int64))
    return DensityMatrix(tuple(dims[s] for s in keep), red.reshape(kdim, kdim))


def expectation(op: DenseOperator, state) -> float:
    if op.site_dims != state.site_dims:
        raise DimensionError(f"operator dims {op.site_dims} vs state dims {state.site_dims}")
    if not op.hermitian:
        raise ValueError("expectation requires a Hermitian operator")
    if isinstance(state, PureState):
        val = np.vdot(state.amplitudes, op.entries @ state.amplitudes)
    else:
        val = np.trace(op.entries @ state.entries)
    if abs(val.imag) > HERMITIAN_TOL * max(1.0, abs(val.real)):
        raise ValueError(f"expectation has imaginary residue {val.imag:g}")
    return float(val.real)


def extremal_eigs(op, which: str = "min", *, cap: int = DENSE_CAP,
                  full_diag_max: int = FULL_DIAG_MAX, site_dims=None) -> tuple[float, PureState]:
    """Smallest or largest eigenpair of a Hermitian operator.

    ``op`` is a :class:`DenseOperator` or a scipy ``LinearOperator`` (then
    ``site_dims`` labels the returned eigenvector). Full diagonalization is
    used up to ``full_diag_max``; above that a Lanczos solve.
    """
    if which not in ("min", "max"):
        raise ValueError("which must be 'min' or 'max'")
    if isinstance(op, DenseOperator):
        if not op.hermitian:
            raise ValueError("extremal_eigs requires a Hermitian operator")
        dim, site_dims = op.dim, op.site_dims
    elif isinstance(op, LinearOperator):
        dim = op.shape[0]
        if site_dims is None:
            site_dims = (dim,)
    else:
        raise TypeError("expected DenseOperator or LinearOperator")
    if dim > cap:
        raise CapExceeded(f"dimension {dim} exceeds cap {cap}")

    if dim <= full_diag_max or dim <= 2:
        mat = op.entries if isinstance(op, DenseOperator) else op.matmat(np.eye(dim, dtype=complex))
        if isinstance(op, LinearOperator) and np.max(np.abs(mat - mat.conj().T)) > HERMITIAN_TOL:
            raise ValueError("extremal_eigs requires a Hermitian operator")
        vals, vecs = np.linalg.eigh(mat)
        idx = 0 if which == "min" else -1
        return float(vals[idx]), PureState.from_vector(vecs[:, idx], site_dims)

    lin = op if isinstance(op, LinearOperator) else LinearOperator(
        (dim, dim), matvec=lambda v: op.entries @ v, dtype=complex)
    v0 = np.ones(dim, dtype=complex) / np.sqrt(dim)
    vals, vecs = eigsh(lin, k=1, which="SA" if which == "min" else "LA", v0=v0, tol=0)
    return float(vals[0]), PureState.from_vector(vecs[:, 0], site_dims)


def vn_entropy(rho) -> float:
    """Von Neumann entropy in bits."""
    mat = rho.entries if isinstance(rho, DensityMatrix) else np.asarray(rho)
    lam = np.clip(np.linalg.eigvalsh(mat), 0.0, 1.0)
    lam = lam[lam > 0]
    return float(max(0.0, -np.sum(lam * np.log2(lam))))
