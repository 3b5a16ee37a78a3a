import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.sparse.linalg import LinearOperator

from conftest import PAULI, embed_dense, random_hermitian, random_state
from qpcpkit.linalg import (CapExceeded, DenseOperator, DensityMatrix, DimensionError, PureState,
                            apply_local, embed, expectation, extremal_eigs, partial_trace,
                            tensor, vn_entropy)
from qpcpkit.constructions import cat_state

X, Z = PAULI["X"], PAULI["Z"]


def test_tensor_basis_states():
    out = tensor(PureState.basis([0]), PureState.basis([0]))
    assert np.allclose(out.amplitudes, [1, 0, 0, 0])


def test_tensor_identities():
    out = tensor(DenseOperator.identity((2,)), DenseOperator.identity((2,)))
    assert np.allclose(out.entries, np.eye(4))


def test_tensor_plus_minus():
    plus = PureState.from_vector([1, 1])
    minus = PureState.from_vector([1, -1])
    assert np.allclose(tensor(plus, minus).amplitudes, 0.5 * np.array([1, -1, 1, -1]))


def test_tensor_kind_mismatch():
    with pytest.raises(TypeError):
        tensor(PureState.basis([0]), DenseOperator.identity((2,)))


def test_embed_bit_flip_on_site0():
    op = embed(DenseOperator.qubits(X), [0], [2, 2])
    assert np.allclose(op.entries @ PureState.basis([0, 0]).amplitudes,
                       PureState.basis([1, 0]).amplitudes)


def test_embed_identity():
    assert np.allclose(embed(DenseOperator.identity((2,)), [1], [2, 2]).entries, np.eye(4))


def test_embed_projector_trace():
    proj = DenseOperator.qubits(np.diag([0.0, 1.0]))
    assert np.trace(embed(proj, [2], [2, 2, 2]).entries).real == pytest.approx(4.0)


def test_embed_rejects_bad_support():
    with pytest.raises(DimensionError):
        embed(DenseOperator.qubits(X), [3], [2, 2])
    with pytest.raises(DimensionError):
        embed(DenseOperator.qubits(np.eye(4)), [0, 0], [2, 2])


def test_embed_cap():
    with pytest.raises(CapExceeded):
        embed(DenseOperator.qubits(X), [0], [2] * 15)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_embed_matches_enumeration(n, rng):
    for k in (1, 2):
        support = rng.choice(n, size=k, replace=False).tolist()
        h = random_hermitian(2**k, rng)
        assert np.allclose(embed(DenseOperator.qubits(h), support, [2] * n).entries,
                           embed_dense(h, support, n))


def test_partial_trace_epr():
    epr = cat_state(2)
    red = partial_trace(epr, [0]).entries
    assert np.allclose(red, np.eye(2) / 2)
    assert np.allclose(partial_trace(epr.density(), [0]).entries, np.eye(2) / 2)


def test_partial_trace_product(rng):
    a = random_state(2, rng)
    b = random_state(1, rng)
    rho_a = np.outer(a, a.conj())
    rho_b = np.outer(b, b.conj())
    joint = DensityMatrix((2, 2, 2), np.kron(rho_a, rho_b))
    assert np.allclose(partial_trace(joint, [0, 1]).entries, rho_a)


def test_partial_trace_keep_order():
    psi = PureState.basis([0, 1])
    red = partial_trace(psi, [1, 0]).entries
    assert red[2, 2] == pytest.approx(1.0)


def test_cat_reduced_matrices_agree_n4():
    plus, minus = cat_state(4, +1), cat_state(4, -1)
    for keep in itertools.combinations(range(4), 2):
        diff = partial_trace(plus, keep).entries - partial_trace(minus, keep).entries
        assert np.max(np.abs(diff)) <= 1e-12


def test_expectation_examples():
    assert expectation(DenseOperator.qubits(Z), PureState.basis([0])) == pytest.approx(1.0)
    zz = DenseOperator.qubits(np.kron(Z, Z))
    assert expectation(zz, cat_state(2)) == pytest.approx(1.0)


def test_expectation_projector_is_norm_squared(rng):
    v = random_state(2, rng)
    proj = DenseOperator.qubits(np.diag([0, 1.0, 1.0, 0]))
    psi = PureState((2, 2), v)
    assert expectation(proj, psi) == pytest.approx(np.linalg.norm(proj.entries @ v) ** 2)


def test_expectation_density(rng):
    v = random_state(2, rng)
    h = DenseOperator.qubits(random_hermitian(4, rng))
    psi = PureState((2, 2), v)
    assert expectation(h, psi) == pytest.approx(expectation(h, psi.density()))


def test_extremal_eigs_examples():
    e, v = extremal_eigs(DenseOperator.qubits(Z), "min")
    assert e == pytest.approx(-1.0)
    assert abs(v.amplitudes[1]) == pytest.approx(1.0)
    diag = np.zeros(8)
    diag[1] = 1
    e, v = extremal_eigs(DenseOperator.qubits(np.diag(diag)), "min")
    assert e == pytest.approx(0.0)
    assert abs(v.amplitudes[1]) < 1e-12
    e, _ = extremal_eigs(DenseOperator.qubits(Z), "max")
    assert e == pytest.approx(1.0)


def test_extremal_eigs_lanczos_matches_dense(rng):
    n = 11
    diag = rng.standard_normal(2**n)
    op = LinearOperator((2**n, 2**n), matvec=lambda v: diag * v, dtype=complex)
    e, _ = extremal_eigs(op, "min", site_dims=(2,) * n)
    assert e == pytest.approx(diag.min(), abs=1e-8)


def test_extremal_eigs_validation():
    with pytest.raises(ValueError):
        extremal_eigs(DenseOperator.qubits(Z), "middle")
    with pytest.raises(CapExceeded):
        extremal_eigs(DenseOperator.qubits(np.eye(8)), "min", cap=4)


def test_vn_entropy_examples():
    assert vn_entropy(PureState.basis([0]).density()) == pytest.approx(0.0)
    assert vn_entropy(DensityMatrix((2,), np.eye(2) / 2)) == pytest.approx(1.0)
    cat = cat_state(5)
    for keep in ([0], [1, 3], [0, 1, 2, 4]):
        assert vn_entropy(partial_trace(cat, keep)) == pytest.approx(1.0)


def test_state_validation():
    with pytest.raises(ValueError):
        PureState((2,), [1, 1])
    with pytest.raises(DimensionError):
        PureState((2, 2), [1, 0])
    with pytest.raises(ValueError):
        DensityMatrix((2,), np.diag([0.5, 0.6]))
    with pytest.raises(ValueError):
        DenseOperator.qubits(np.array([[0, 1], [0, 0]]))


@settings(max_examples=40, deadline=None)
@given(n=st.integers(1, 4), seed=st.integers(0, 2**32 - 1), data=st.data())
def test_partial_trace_preserves_trace(n, seed, data):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((2**n, 2**n)) + 1j * rng.standard_normal((2**n, 2**n))
    rho = a @ a.conj().T
    rho /= np.trace(rho).real
    keep = data.draw(st.lists(st.integers(0, n - 1), min_size=1, max_size=n, unique=True))
    red = partial_trace(DensityMatrix((2,) * n, rho), keep)
    assert abs(np.trace(red.entries) - 1.0) <= 1e-10


@settings(max_examples=40, deadline=None)
@given(n=st.integers(2, 6), k=st.integers(1, 3), seed=st.integers(0, 2**32 - 1))
def test_locality_identity(n, k, seed):
    rng = np.random.default_rng(seed)
    k = min(k, n)
    support = rng.choice(n, size=k, replace=False).tolist()
    h = random_hermitian(2**k, rng)
    psi = PureState((2,) * n, random_state(n, rng))
    full = expectation(embed(DenseOperator.qubits(h), support, [2] * n), psi)
    local = expectation(DenseOperator.qubits(h), partial_trace(psi, support))
    assert abs(full - local) <= 1e-9


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_partial_trace_basis_independence(seed):
    rng = np.random.default_rng(seed)
    n = 3
    v = random_state(n, rng)
    # trace out site 2 in a random orthonormal basis {u_j}
    q, _ = np.linalg.qr(rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2)))
    tens = v.reshape(4, 2)
    alt = sum(np.outer(tens @ q[:, j].conj(), (tens @ q[:, j].conj()).conj()) for j in range(2))
    red = partial_trace(PureState((2,) * n, v), [0, 1]).entries
    assert np.max(np.abs(alt - red)) <= 1e-10


@settings(max_examples=25, deadline=None)
@given(na=st.integers(1, 3), nb=st.integers(1, 3), seed=st.integers(0, 2**32 - 1))
def test_schmidt_reduced_matrix(na, nb, seed):
    rng = np.random.default_rng(seed)
    r = min(2**na, 2**nb)
    lam = rng.random(r)
    lam /= lam.sum()
    u, _ = np.linalg.qr(rng.standard_normal((2**na, 2**na)) + 1j * rng.standard_normal((2**na, 2**na)))
    w, _ = np.linalg.qr(rng.standard_normal((2**nb, 2**nb)) + 1j * rng.standard_normal((2**nb, 2**nb)))
    psi = sum(np.sqrt(lam[i]) * np.kron(u[:, i], w[:, i]) for i in range(r))
    red = partial_trace(PureState((2,) * (na + nb), psi), list(range(na))).entries
    expected = sum(lam[i] * np.outer(u[:, i], u[:, i].conj()) for i in range(r))
    assert np.max(np.abs(red - expected)) <= 1e-9


def test_apply_local_matches_embed(rng):
    n = 5
    v = random_state(n, rng)
    h = random_hermitian(4, rng)
    out = apply_local(h, (3, 1), v, (2,) * n)
    assert np.allclose(out, embed_dense(h, (3, 1), n) @ v)
