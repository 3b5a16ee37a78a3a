import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import (PAULI, brute_min_violations, embed_dense, random_local_hamiltonian,
                      random_state)
from qpcpkit.constructions import (CnfFormula, all_sign_family, random_ksat, sat_to_hamiltonian,
                                   toric_code)
from qpcpkit.hamiltonian import (LocalHamiltonian, ProductState, PromiseGapSpec, Term, apply_M,
                                 choose_ell, decide_lh, diagonal, diagonal_power_entry, energy,
                                 from_pauli, ground_energy, product_matrix_element, qunsat,
                                 site_matrix_element, spectrum, to_dense, trace_local)
from qpcpkit.linalg import CapExceeded, DimensionError, PureState


def dense_H(h):
    total = np.zeros((2**h.n, 2**h.n), dtype=complex)
    for t in h.terms:
        total += embed_dense(t.matrix, t.support, h.n)
    return total


def zero_term(n):
    return LocalHamiltonian(n, (Term((0,), np.zeros((2, 2))),))


def test_sat_energy_counts_violations():
    f = CnfFormula(4, ((1, 2, -3), (-1, 4), (2, 3, 4), (-2, -4)))
    h = sat_to_hamiltonian(f)
    for bits in itertools.product([0, 1], repeat=4):
        assert energy(h, PureState.basis(bits)) == pytest.approx(f.violated(bits), abs=1e-12)
        assert qunsat(h, PureState.basis(bits)) == pytest.approx(f.violated(bits) / 4)


def test_single_projector_on_zero_state():
    h = LocalHamiltonian(3, (Term((0,), np.diag([0.0, 1.0])),))
    assert energy(h, PureState.basis([0, 0, 0])) == 0.0


def test_energy_matches_dense_n8(rng):
    h = random_local_hamiltonian(8, 6, 3, rng)
    psi = PureState((2,) * 8, random_state(8, rng))
    dense = np.vdot(psi.amplitudes, to_dense(h).entries @ psi.amplitudes).real
    assert energy(h, psi) == pytest.approx(dense, abs=1e-9)


def test_qunsat_ground_relation():
    f = all_sign_family(3)
    h = sat_to_hamiltonian(f)
    e0, psi = ground_energy(h)
    assert qunsat(h, psi) == pytest.approx(e0 / h.m)


def test_ground_energy_examples():
    assert ground_energy(sat_to_hamiltonian(all_sign_family(3)))[0] == pytest.approx(1.0)
    h = from_pauli(toric_code(2)[0])
    e0, _ = ground_energy(h)
    assert e0 == pytest.approx(-8.0)
    vals = spectrum(h)
    assert np.sum(np.abs(vals + 8) < 1e-9) == 4


def test_ground_energy_satisfiable(rng):
    for _ in range(10):
        f = random_ksat(6, 8, rng)
        e0, psi = ground_energy(sat_to_hamiltonian(f))
        assert e0 == pytest.approx(brute_min_violations(f), abs=1e-9)


def test_ground_energy_lanczos_branch(rng):
    # 11 qubits, non-diagonal: exercises the iterative branch
    h = random_local_hamiltonian(11, 8, 2, rng)
    e0, psi = ground_energy(h)
    assert energy(h, psi) == pytest.approx(e0, abs=1e-7)
    # one-term lower bound and a variational check against random states
    assert all(e0 <= energy(h, PureState((2,) * 11, random_state(11, rng))) for _ in range(3))


def test_decide_lh_examples(rng):
    sat = CnfFormula(3, ((1, 2, 3),))
    gap = PromiseGapSpec(0, 1)
    assert decide_lh(sat_to_hamiltonian(sat), gap) == "below_a"
    assert decide_lh(sat_to_hamiltonian(all_sign_family(3)), gap) == "above_b"
    half = LocalHamiltonian(1, (Term((0,), 0.5 * np.eye(2)),))
    assert decide_lh(half, gap) == "violated_promise"
    with pytest.raises(ValueError):
        PromiseGapSpec(1, 1)


def test_trace_local_examples():
    hx = LocalHamiltonian(3, (Term((1,), PAULI["X"]),))
    assert trace_local(hx) == 0.0
    hp = LocalHamiltonian(3, (Term((2,), np.diag([0.0, 1.0])),))
    assert trace_local(hp) == pytest.approx(4.0)
    assert np.trace(to_dense(hp).entries).real == pytest.approx(4.0)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 10))
def test_trace_local_matches_dense(seed, n):
    rng = np.random.default_rng(seed)
    h = random_local_hamiltonian(n, 4, min(n, 2), rng)
    dense = np.trace(to_dense(h).entries).real
    assert abs(trace_local(h) - dense) <= 1e-6 * max(1.0, abs(dense))


def test_apply_M_examples(rng):
    v = random_state(3, rng)
    assert np.allclose(apply_M(zero_term(3), v), v)
    f = CnfFormula(3, ((1, 2, 3), (-1, 2)))
    h = sat_to_hamiltonian(f)
    e0, psi = ground_energy(h)
    assert e0 == 0
    assert np.max(np.abs(apply_M(h, psi) - psi.amplitudes)) <= 1e-9
    with pytest.raises(ValueError):
        apply_M(LocalHamiltonian(2, ()), v[:4])


def test_apply_M_power_matches_dense(rng):
    n, ell = 6, 5
    h = random_local_hamiltonian(n, 7, 2, rng)
    M = np.eye(2**n) - dense_H(h) / h.m
    v = random_state(n, rng)
    out = v
    for _ in range(ell):
        out = apply_M(h, out)
    assert np.max(np.abs(out - np.linalg.matrix_power(M, ell) @ v)) <= 1e-8


def _site_states(n, rng):
    return ProductState.singletons([random_state(1, rng) for _ in range(n)])


def test_product_matrix_element_matches_dense(rng):
    n = 6
    h = random_local_hamiltonian(n, 8, 3, rng)
    a, b = _site_states(n, rng), _site_states(n, rng)
    M = np.eye(2**n) - dense_H(h) / h.m
    dense = np.vdot(a.to_pure().amplitudes, M @ b.to_pure().amplitudes)
    assert abs(product_matrix_element(h, a, b) - dense) <= 1e-10
    assert abs(product_matrix_element(h, a, b) - np.conj(product_matrix_element(h, b, a))) <= 1e-12


def test_product_matrix_element_special_cases(rng):
    a, b = _site_states(3, rng), _site_states(3, rng)
    overlap = np.prod([np.vdot(x.amplitudes, y.amplitudes) for x, y in zip(a.factors, b.factors)])
    assert product_matrix_element(zero_term(3), a, b) == pytest.approx(overlap)
    f = CnfFormula(3, ((1, 2), (-3, 1)))
    h = sat_to_hamiltonian(f)
    p = ProductState.singletons([PureState.basis([1]), PureState.basis([0]), PureState.basis([1])])
    assert product_matrix_element(h, p, p) == pytest.approx(1 - energy(h, p.to_pure()) / h.m)


def test_site_matrix_element_unnormalized(rng):
    n = 3
    h = random_local_hamiltonian(n, 3, 2, rng)
    av = [2.0 * random_state(1, rng) for _ in range(n)]
    bv = [random_state(1, rng) for _ in range(n)]
    big_a = np.kron(np.kron(av[0], av[1]), av[2])
    big_b = np.kron(np.kron(bv[0], bv[1]), bv[2])
    M = np.eye(8) - dense_H(h) / h.m
    assert site_matrix_element(h, av, bv) == pytest.approx(np.vdot(big_a, M @ big_b))


def test_diagonal_power_entry_examples(rng):
    p = _site_states(3, rng)
    h = random_local_hamiltonian(3, 2, 2, rng)
    assert diagonal_power_entry(h, 0, p) == pytest.approx(1.0)
    assert diagonal_power_entry(zero_term(3), 7, p) == pytest.approx(1.0)
    f = CnfFormula(3, ((1, 2), (2, 3)))
    g = ProductState.singletons([PureState.basis([1])] * 3)
    for ell in range(1, 6):
        assert diagonal_power_entry(sat_to_hamiltonian(f), ell, g) == pytest.approx(1.0)


def test_choose_ell_examples():
    assert choose_ell(4, 3, 1) == 10
    assert 0.75**10 <= 1 / 16 < 0.75**9
    assert choose_ell(5, 3, 5) == 1
    h = sat_to_hamiltonian(all_sign_family(3))
    ell = choose_ell(h.m, h.n, 1)
    M = np.eye(8) - dense_H(h) / h.m
    assert np.trace(np.linalg.matrix_power(M, ell)).real <= 0.5


@settings(max_examples=60, deadline=None)
@given(m=st.integers(1, 50), n=st.integers(1, 12), gamma=st.floats(0.05, 1.0))
def test_choose_ell_is_minimal(m, n, gamma):
    ell = choose_ell(m, n, gamma)
    q = 1 - gamma / m
    assert q**ell <= 2.0 ** (-n - 1) * (1 + 1e-12)
    if ell > 1:
        assert q ** (ell - 1) > 2.0 ** (-n - 1)


@pytest.mark.parametrize("seed", range(8))
def test_trace_thresholds(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(3, 7))
    f = random_ksat(n, int(rng.integers(n, 5 * n)), rng)
    h = sat_to_hamiltonian(f)
    ell = choose_ell(h.m, n, 1)
    tr = np.sum((1 - np.diag(dense_H(h)).real / h.m) ** ell)
    if brute_min_violations(f) == 0:
        assert tr >= 1
    else:
        assert tr <= 0.5


def test_spectral_containment(rng):
    f = random_ksat(5, 12, rng)
    h = sat_to_hamiltonian(f)
    vals = np.linalg.eigvalsh(np.eye(32) - to_dense(h).entries / h.m)
    assert vals.min() >= -1e-9 and vals.max() <= 1 + 1e-9


def test_validation():
    with pytest.raises(ValueError):
        LocalHamiltonian(2, (Term((0,), 2 * np.eye(2)),))
    with pytest.raises(ValueError):
        LocalHamiltonian(2, (Term((0,), np.array([[0, 1], [0, 0]])),))
    with pytest.raises(DimensionError):
        LocalHamiltonian(2, (Term((0, 0), np.eye(4)),))
    with pytest.raises(DimensionError):
        LocalHamiltonian(2, (Term((3,), np.eye(2)),))
    with pytest.raises(DimensionError):
        LocalHamiltonian(1, (), (5,))
    with pytest.raises(ValueError):
        qunsat(LocalHamiltonian(1, ()), PureState.basis([0]))
    with pytest.raises(CapExceeded):
        to_dense(LocalHamiltonian(15, (Term((0,), np.eye(2)),)))


def test_empty_hamiltonian_ground_energy():
    assert ground_energy(LocalHamiltonian(3, ()))[0] == 0.0


def test_diagonal_matches_dense(rng):
    f = random_ksat(6, 10, rng)
    h = sat_to_hamiltonian(f)
    assert np.allclose(diagonal(h), np.diag(dense_H(h)).real)
