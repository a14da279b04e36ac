import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qlanczos.fermion_hamiltonian import (
    InteractionData,
    InteractionParseError,
    build_dense_hamiltonian,
    correlation_energy,
    format_interaction,
    parse_interaction_file,
)
from qlanczos.shell_basis import (
    Orbital,
    SlaterDeterminant,
    enumerate_mscheme_basis,
    enumerate_single_particle_states,
)

from conftest import P_HALF, n14_interaction, sd_shell_random_interaction

N14_STATES = enumerate_single_particle_states({"p": [P_HALF], "n": [P_HALF]})
N14_BASIS = enumerate_mscheme_basis(N14_STATES, 1, 1, 0)


def test_parse_spe_and_antisymmetry_sign():
    data = parse_interaction_file("SPE 0 -3.5\nTBME 1 0 2 3 2.0\n")
    assert data.spe[0] == -3.5
    assert data.tbme[(0, 1, 2, 3)] == -2.0
    assert data.tbme[(2, 3, 0, 1)] == -2.0  # Hermitian partner
    assert data.element(1, 0, 2, 3) == 2.0 and data.element(1, 0, 3, 2) == -2.0
    assert data.n_states == 4


@pytest.mark.parametrize(
    "text, match",
    [
        ("TBME 0 0 1 2 1.0\n", "Pauli"),
        ("SPE 0 1.0\nSPE 0 2.0\n", "line 2"),
        ("TBME 0 1 2 3 1.0\nTBME 1 0 2 3 1.0\n", "line 2"),
        ("TBME 0 1 2 3 1.0\nTBME 2 3 0 1 -1.0\n", "Hermiticity"),
        ("SPE 0\n", "line 1"),
        ("SPE a 1.0\n", "line 1"),
        ("FOO 1 2\n", "line 1"),
    ],
)
def test_parse_errors(text, match):
    with pytest.raises(InteractionParseError, match=match):
        parse_interaction_file(text)


def test_index_beyond_declared_states():
    with pytest.raises(InteractionParseError):
        parse_interaction_file("SPE 5 1.0\n", n_states=4)
    with pytest.raises(InteractionParseError):
        parse_interaction_file("NSTATES 3\nTBME 0 1 2 3 1.0\n")


def test_format_round_trip():
    data = n14_interaction()
    again = parse_interaction_file(format_interaction(data))
    assert again.tbme == data.tbme and again.spe == data.spe and again.n_states == 4


def test_format_round_trip_numpy_values():
    data = InteractionData(2, {0: np.float64(-1.25)}, {(0, 1, 0, 1): np.float64(0.375)}, np.float64(2.5))
    again = parse_interaction_file(format_interaction(data))
    assert again.spe[0] == -1.25 and again.tbme[(0, 1, 0, 1)] == 0.375 and again.core == 2.5


def test_one_body_only_is_diagonal():
    data = InteractionData(4, {0: 1.0, 1: 2.0, 2: 3.0, 3: 5.0}, {})
    h = build_dense_hamiltonian(N14_BASIS, data)
    assert np.allclose(h, np.diag([1.0 + 5.0, 2.0 + 3.0]), atol=0)


def test_n14_off_diagonal_equals_tbme():
    # <1001|H|0110>: a†0 a†3 a2 a1 |0110> = +|1001>, so the element is +<03|V|12>
    data = n14_interaction()
    h = build_dense_hamiltonian(N14_BASIS, data)
    assert h[0, 1] == pytest.approx(data.element(0, 3, 1, 2))
    assert h[0, 0] == pytest.approx(-1.2 - 0.8 + data.element(0, 3, 0, 3))
    assert h[1, 1] == pytest.approx(-1.2 - 0.8 + data.element(1, 2, 1, 2))


def test_core_offset():
    data = n14_interaction()
    data.core = 10.0
    h = build_dense_hamiltonian(N14_BASIS, data)
    data.core = 0.0
    assert np.allclose(h - build_dense_hamiltonian(N14_BASIS, data), 10.0 * np.eye(2))


def test_mixed_count_basis_has_no_cross_elements():
    states, data = sd_shell_random_interaction(3)
    small = [s for s in states if s.orbital == Orbital(1, 0, 1)]
    idx = [s.index for s in small]
    basis = [SlaterDeterminant.from_occupied(o, len(states)) for o in ([idx[0], idx[2]], [idx[1], idx[3]], [idx[0], idx[1]], [idx[2], idx[3]])]
    h = build_dense_hamiltonian(basis, data)
    # first two are 1p1n, last two are 2p and 2n
    assert np.allclose(h[:2, 2:], 0) and np.allclose(h[2, 3], 0)


@given(st.integers(0, 10_000), st.floats(-3, 3))
def test_spe_shift_moves_spectrum_by_particle_count(seed, c):
    states, data = sd_shell_random_interaction(seed % 7)
    basis = enumerate_mscheme_basis(states, 1, 1, 0)
    w0 = np.linalg.eigvalsh(build_dense_hamiltonian(basis, data))
    w1 = np.linalg.eigvalsh(build_dense_hamiltonian(basis, data.shifted(c)))
    assert np.allclose(w1, w0 + 2 * c, atol=1e-10)


def test_hermitian_for_random_interaction():
    states, data = sd_shell_random_interaction(11)
    h = build_dense_hamiltonian(enumerate_mscheme_basis(states, 2, 1, 1), data)
    assert np.abs(h - h.conj().T).max() <= 1e-12


def test_correlation_energy():
    assert correlation_energy(-31.119, -28.0) == pytest.approx(-3.119)
    assert correlation_energy(-5.0, -3.0) == -2.0
    assert correlation_energy(1.5, 1.5) == 0.0
