import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import PAULI, dense_pauli, random_clifford_state
from qpcpkit.constructions import (TorusLattice, cartesian_product_code, petersen_graph,
                                   toric_code, toric_loop_state, toric_loop_state_dense,
                                   torus_cycle_space)
from qpcpkit.pauli import (PauliHamiltonian, PauliString, StabilizerState, all_terms_commute,
                           commutes, complete_stabilizer, gf2_nullspace, gf2_rank, local_matrix,
                           pauli_energy, stabilizer_expectation, to_dense)

P = PauliString.from_label


def test_single_qubit_anticommute():
    assert not commutes(P("X"), P("Z"))
    assert commutes(P("XX"), P("ZZ"))


def test_toric_plaquettes_commute_with_stars():
    h, lat = toric_code(3)
    plaq = [p for _, p in h.terms[:9]]
    stars = [p for _, p in h.terms[9:]]
    assert all(commutes(a, b) for a in plaq for b in stars)


@pytest.mark.parametrize("L", [2, 3, 6])
def test_toric_all_commute(L):
    assert all_terms_commute(toric_code(L)[0])


def test_noncommuting_family():
    assert not all_terms_commute(PauliHamiltonian(1, ((1.0, P("X")), (1.0, P("Z")))))


def test_product_code_commutes():
    h, _ = cartesian_product_code(petersen_graph())
    assert all_terms_commute(h)


def test_stabilizer_expectation_examples():
    zero = StabilizerState.zero(3)
    assert stabilizer_expectation(zero, P("ZII")) == 1.0
    assert stabilizer_expectation(zero, P("XII")) == 0.0
    assert stabilizer_expectation(zero, P("ZII", -1)) == -1.0


def test_loop_state_stabilized_by_plaquettes():
    for L in (2, 3, 4):
        h, _ = toric_code(L)
        s = toric_loop_state(L)
        for _, p in h.terms:
            assert stabilizer_expectation(s, p) == 1.0


def test_pauli_energy_examples():
    h, _ = toric_code(3)
    assert pauli_energy(h, toric_loop_state(3)) == -18.0
    assert pauli_energy(PauliHamiltonian(1, ((-1.0, P("Z")),)), StabilizerState.zero(1)) == -1.0


def test_loop_energy_matches_dense_at_L2():
    h, _ = toric_code(2)
    omega = toric_loop_state_dense(2).amplitudes
    assert np.vdot(omega, to_dense(h).entries @ omega).real == pytest.approx(-8.0)
    assert pauli_energy(h, toric_loop_state(2)) == -8.0


def test_to_dense_single_qubit():
    assert np.allclose(to_dense(P("X")).entries, [[0, 1], [1, 0]])
    assert np.allclose(to_dense(P("Z")).entries, [[1, 0], [0, -1]])


def test_to_dense_plaquette_matches_kron():
    h, _ = toric_code(2)
    _, ap = h.terms[0]
    assert np.allclose(to_dense(ap).entries, dense_pauli(ap.label))


def test_product_phases():
    # XZ = -iY
    assert P("X") * P("Z") == P("Y", -1j)
    assert P("Z") * P("X") == P("Y", 1j)
    assert (P("X") * P("X")) == PauliString.identity(1)


def test_loop_state_dense_is_fixed_by_every_term():
    h, _ = toric_code(2)
    omega = toric_loop_state_dense(2).amplitudes
    for _, p in h.terms:
        assert np.max(np.abs(to_dense(p).entries @ omega - omega)) <= 1e-9


def test_cycle_space_count():
    assert len(torus_cycle_space(2)) == 2 ** (2 * 2 + 1)


def test_stabilizer_rank_count():
    # 2L^2 qubits, 2L^2 - 2 independent stabilizers: 2^2 = 4 ground states
    for L in (2, 3, 4):
        h, _ = toric_code(L)
        mat = StabilizerState.matrix_of(h.paulis)
        assert gf2_rank(mat) == 2 * L * L - 2


def test_noncontractible_string_commutes():
    for L in (2, 3, 6):
        h, lat = toric_code(L)
        n = lat.n_edges
        string = PauliString.on_sites(n, {lat.h(0, c): "X" for c in range(L)})
        assert all(commutes(string, p) for _, p in h.terms)


def test_contractible_loop_is_plaquette_product():
    L = 3
    h, lat = toric_code(L)
    _, ap = h.terms[0]
    loop = PauliString.on_sites(lat.n_edges, {e: "X" for e in lat.plaquette(0, 0)})
    assert loop == ap


def test_stabilizer_validation():
    with pytest.raises(ValueError):
        StabilizerState(2, (P("XI"), P("ZI")))
    with pytest.raises(ValueError):
        StabilizerState(2, (P("ZI"), P("ZI")))
    with pytest.raises(ValueError):
        StabilizerState(1, (P("Z", 1j),))


def test_complete_stabilizer_prefers_z():
    gens = complete_stabilizer(3, [P("XXI")])
    s = StabilizerState(3, tuple(gens))
    assert stabilizer_expectation(s, P("XXI")) == 1.0
    assert P("IIZ") in gens


def test_gf2_nullspace():
    mat = np.array([[1, 1, 0], [0, 1, 1]], dtype=np.uint8)
    ns = gf2_nullspace(mat)
    assert ns.shape == (1, 3)
    assert not ((mat @ ns.T) % 2).any()


def test_local_matrix():
    support, mat = local_matrix(P("IZIX", -1))
    assert support == (1, 3)
    assert np.allclose(mat, -np.kron(PAULI["Z"], PAULI["X"]))


label = st.text(alphabet="IXYZ", min_size=1, max_size=8)


@settings(max_examples=80, deadline=None)
@given(data=st.data())
def test_symplectic_commutation_matches_dense(data):
    n = data.draw(st.integers(1, 6))
    a = data.draw(st.text(alphabet="IXYZ", min_size=n, max_size=n))
    b = data.draw(st.text(alphabet="IXYZ", min_size=n, max_size=n))
    A, B = dense_pauli(a), dense_pauli(b)
    norm = np.max(np.abs(A @ B - B @ A))
    assert (norm <= 1e-9) == commutes(P(a), P(b))
    if not commutes(P(a), P(b)):
        assert norm >= 0.1


@settings(max_examples=80, deadline=None)
@given(data=st.data())
def test_product_matches_dense(data):
    n = data.draw(st.integers(1, 5))
    a = data.draw(st.text(alphabet="IXYZ", min_size=n, max_size=n))
    b = data.draw(st.text(alphabet="IXYZ", min_size=n, max_size=n))
    pa = P(a, data.draw(st.sampled_from([1, -1, 1j, -1j])))
    pb = P(b)
    assert np.allclose(to_dense(pa * pb).entries, to_dense(pa).entries @ to_dense(pb).entries)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 5))
def test_stabilizer_expectation_matches_dense(seed, n):
    rng = np.random.default_rng(seed)
    s, vec = random_clifford_state(n, 3 * n, rng)
    for g in s.generators:
        assert np.vdot(vec, to_dense(g).entries @ vec).real == pytest.approx(1.0)
    for _ in range(10):
        lab = "".join(rng.choice(list("IXYZ"), size=n))
        p = P(lab, rng.choice([1, -1]))
        dense = np.vdot(vec, to_dense(p).entries @ vec)
        assert abs(stabilizer_expectation(s, p) - dense.real) <= 1e-9
