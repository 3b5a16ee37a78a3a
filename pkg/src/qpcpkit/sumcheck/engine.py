"""Dense bookkeeping for the honest prover and the oracles used to check it."""

from __future__ import annotations

from functools import reduce
from typing import Sequence

import numpy as np

from ..hamiltonian import LocalHamiltonian, apply_M, site_matrix_element, to_dense
from ..linalg import CapExceeded
from . import fixedpoint as fx

PROVER_DIM_CAP = 2**11


def m_matrix(h: LocalHamiltonian) -> np.ndarray:
    if h.dim > PROVER_DIM_CAP:
        raise CapExceeded(f"dimension {h.dim} exceeds the prover cap {PROVER_DIM_CAP}")
    if h.m == 0:
        raise ValueError("M = I - H/m is undefined for m = 0")
    return np.eye(h.dim, dtype=complex) - to_dense(h).entries / h.m


def product_vector(site_vectors: Sequence[np.ndarray]) -> np.ndarray:
    return reduce(np.kron, [np.asarray(v, dtype=complex) for v in site_vectors],
                  np.array([1.0 + 0j]))


def stage_operator(M: np.ndarray, ell: int, stage: int, earlier: Sequence[np.ndarray]) -> np.ndarray:
    """A_s = M Pi_{s-1} M ... Pi_1 M^(ell-s+1) with Pi_j = |Psi_j><Psi_j| (Psi_j unnormalized)."""
    if not 1 <= stage <= ell:
        raise ValueError("stage must lie in [1, ell]")
    if len(earlier) < stage - 1:
        raise ValueError("missing challenge vectors of earlier stages")
    X = np.linalg.matrix_power(M, ell - stage + 1)
    for j in range(stage - 1):
        psi = earlier[j]
        X = M @ np.outer(psi, psi.conj() @ X)
    return X


class RoundContraction:
    """Holds (<psi_<i| x I) A (|psi_<i> x I) and reads off a^(i) by tracing the tail."""

    def __init__(self, A: np.ndarray, n: int):
        if A.shape != (2**n, 2**n):
            raise ValueError("operator does not match n qubits")
        self.n = n
        self.B = np.asarray(A, dtype=complex)
        self.round = 1

    def response(self) -> np.ndarray:
        R = self.B.shape[0] // 2
        return np.einsum("aibi->ab", self.B.reshape(2, R, 2, R))

    def project(self, psi: np.ndarray) -> None:
        if self.round > self.n:
            raise ValueError("all sites already projected")
        R = self.B.shape[0] // 2
        B4 = self.B.reshape(2, R, 2, R)
        self.B = np.einsum("a,aibj,b->ij", np.conj(psi), B4, psi)
        self.round += 1

    def scalar(self) -> complex:
        if self.B.shape != (1, 1):
            raise ValueError("scalar is available only after all n projections")
        return complex(self.B[0, 0])


def honest_response(h: LocalHamiltonian, ell: int, challenges: Sequence[np.ndarray], P: int,
                    stage: int = 1, earlier: Sequence[np.ndarray] = ()) -> tuple:
    """Quantized a^(i) for i = len(challenges) + 1."""
    if len(challenges) >= h.n:
        raise ValueError("at most n - 1 challenges precede a response")
    engine = RoundContraction(stage_operator(m_matrix(h), ell, stage, earlier), h.n)
    for psi in challenges:
        engine.project(np.asarray(psi, dtype=complex))
    return fx.mat_to_fixed(engine.response(), P)


def power_value(h: LocalHamiltonian, ell: int, site_vectors: Sequence[np.ndarray]) -> complex:
    """<Psi| M^ell |Psi> by matrix-free application of M."""
    psi = product_vector(site_vectors)
    vec = psi
    for _ in range(ell):
        vec = apply_M(h, vec)
    return complex(np.vdot(psi, vec))


def nested_product_value(h: LocalHamiltonian, stage_vectors: Sequence[Sequence[np.ndarray]]) -> complex:
    """M_{l,l-1} ... M_{2,1} M_{1,l} from per-site challenge vectors; local work only."""
    ell = len(stage_vectors)
    value = 1.0 + 0j
    for j in range(ell):
        left = stage_vectors[j]
        right = stage_vectors[j - 1]  # j = 0 wraps to the last stage
        value *= site_matrix_element(h, left, right)
    return value


def dense_nested_trace(M: np.ndarray, stage_psis: Sequence[np.ndarray]) -> complex:
    """Tr(Pi_l M Pi_{l-1} M ... Pi_1 M) by dense matrix products."""
    X = np.eye(M.shape[0], dtype=complex)
    for psi in stage_psis:
        X = np.outer(psi, psi.conj()) @ M @ X
    return complex(np.trace(X))
