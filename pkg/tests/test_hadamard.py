import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qlanczos.circuits import Circuit, compile_pauli_exponential
from qlanczos.hadamard import (
    complex_overlap,
    derive_rng,
    expectation_from_counts,
    hadamard_test_circuit,
    hadamard_test_state,
    hamiltonian_matrix_element,
    overlap_estimate,
    pauli_matrix_element_estimate,
    pauli_record,
    record_from_distribution,
    reference_circuit,
)
from qlanczos.pauli import PauliString, QubitOperator
from qlanczos.statevector import expectation, prepare_product_state, prepare_superposition

from conftest import random_state
from test_pauli import kron_word


def zero_state(n):
    v = np.zeros(1 << n, dtype=complex)
    v[0] = 1
    return v


def test_same_state_and_orthogonal():
    psi = prepare_product_state("101")
    assert overlap_estimate(psi, psi, "re") == 1.0
    assert overlap_estimate(psi, prepare_product_state("011"), "re") == pytest.approx(0.0)


@given(st.integers(0, 2**31), st.sampled_from([3, 4]))
def test_probability_of_zero_matches_real_overlap(seed, n):
    rng = np.random.default_rng(seed)
    a, b = random_state(1 << n, rng), random_state(1 << n, rng)
    joint = hadamard_test_state(a, b, "re")
    p0 = np.sum(np.abs(joint[: 1 << n]) ** 2)
    ov = np.vdot(a, b)
    assert abs(p0 - 0.5 * (1 + ov.real)) <= 1e-12
    assert abs(overlap_estimate(a, b, "re") - ov.real) <= 1e-12
    assert abs(overlap_estimate(a, b, "im") - ov.imag) <= 1e-12
    re, im = overlap_estimate(a, b, "re"), overlap_estimate(a, b, "im")
    assert re**2 + im**2 <= 1 + 1e-10


def random_prep(n, rng):
    c = Circuit(n)
    for q in range(n):
        c.add("RY", q, angle=float(rng.uniform(0, np.pi)))
        c.add("RZ", q, angle=float(rng.uniform(0, 2 * np.pi)))
    for q in range(n - 1):
        c.add("X", q + 1, q)
    c.extend(compile_pauli_exponential(PauliString("XY" + "Z" * (n - 2), 0.4)))
    return c


@pytest.mark.parametrize("part", ["re", "im"])
def test_explicit_circuit_matches_branch_shortcut(part):
    rng = np.random.default_rng(9)
    n = 3
    pi, pj = random_prep(n, rng), random_prep(n, rng)
    full = hadamard_test_circuit(pi, pj, part).apply(zero_state(n + 1))
    shortcut = hadamard_test_state(pi.apply(zero_state(n)), pj.apply(zero_state(n)), part)
    assert np.abs(np.abs(full) ** 2 - np.abs(shortcut) ** 2).max() <= 1e-12
    ov = np.vdot(pi.apply(zero_state(n)), pj.apply(zero_state(n)))
    half = 1 << n
    diff = np.sum(np.abs(full[:half]) ** 2) - np.sum(np.abs(full[half:]) ** 2)
    assert diff == pytest.approx(ov.real if part == "re" else ov.imag, abs=1e-12)


def test_explicit_pauli_circuit_reads_matrix_element():
    rng = np.random.default_rng(2)
    n = 3
    pi, pj = random_prep(n, rng), random_prep(n, rng)
    a, b = pi.apply(zero_state(n)), pj.apply(zero_state(n))
    word = "XYZ"
    target = np.vdot(a, kron_word(word) @ b)
    for part, expect in (("re", target.real), ("im", target.imag)):
        joint = hadamard_test_circuit(pi, pj, part, pauli=word).apply(zero_state(n + 1))
        rec = record_from_distribution(np.abs(joint) ** 2, n)
        est = expectation_from_counts(rec, word, 0) - expectation_from_counts(rec, word, 1)
        assert est == pytest.approx(expect, abs=1e-12)


def test_bell_probabilities():
    psi = reference_circuit([(1, "00"), (1, "11")]).apply(zero_state(2))
    assert np.allclose(np.abs(psi) ** 2, [0.5, 0, 0, 0.5])


def test_reference_circuits_prepare_recipes():
    for terms in (
        [(1, "1001")],
        [(-1j, "0110")],
        [(1, "110000101000"), (1, "101000110000")],
        [(1, "0110"), (np.exp(0.7j), "1001")],
        [(1j, "100"), (-1, "011")],
    ):
        prep = reference_circuit(terms)
        assert np.allclose(prep.apply(zero_state(prep.n_qubits)), prepare_superposition(terms))
    with pytest.raises(ValueError):
        reference_circuit([(1, "00"), (2, "11")])


def test_pauli_elements(rng):
    zero = prepare_product_state("000")
    assert pauli_matrix_element_estimate(zero, zero, "ZII", "re") == 1.0
    a, b = random_state(8, rng), random_state(8, rng)
    for word in ("XII", "IYZ", "XYZ", "ZZI"):
        target = np.vdot(a, kron_word(word) @ b)
        assert pauli_matrix_element_estimate(a, b, word, "re") == pytest.approx(target.real, abs=1e-12)
        assert pauli_matrix_element_estimate(a, b, word, "im") == pytest.approx(target.imag, abs=1e-12)
    with pytest.raises(ValueError):
        pauli_matrix_element_estimate(a, b, "XX", "re")


def test_expectation_from_counts_examples():
    uniform = record_from_distribution(np.full(4, 0.25), 2, has_ancilla=False)
    assert expectation_from_counts(uniform, "ZZ") == 0
    point = record_from_distribution(np.eye(4)[0b10], 2, has_ancilla=False)  # |01>
    assert expectation_from_counts(point, "ZZ") == -1
    with pytest.raises(ValueError):
        expectation_from_counts(record_from_distribution(np.zeros(4), 2), "ZZ")


def test_sampled_z_expectation_concentrates():
    psi = prepare_superposition([(0.6, "0"), (0.8, "1")])
    shots = 10**6
    rec = pauli_record(psi, psi, "Z", "re", "shots", shots, seed=5)
    est = expectation_from_counts(rec, "Z", 0) - expectation_from_counts(rec, "Z", 1)
    assert abs(est - (0.36 - 0.64)) <= 4 / np.sqrt(shots)


def test_hamiltonian_element_oracles(rng):
    op = QubitOperator(3, {"III": 0.5, "XZI": -0.7, "IYY": 0.3, "ZIZ": 1.1})
    a, b = random_state(8, rng), random_state(8, rng)
    assert hamiltonian_matrix_element(a, a, op) == pytest.approx(expectation(a, op), abs=1e-12)
    assert abs(hamiltonian_matrix_element(a, a, op).imag) <= 1e-12
    ident = QubitOperator.identity(3, 2.5)
    assert hamiltonian_matrix_element(a, b, ident) == pytest.approx(2.5 * np.vdot(a, b), abs=1e-12)
    hab = hamiltonian_matrix_element(a, b, op)
    assert hab == pytest.approx(np.conj(hamiltonian_matrix_element(b, a, op)), abs=1e-12)
    assert hab == pytest.approx(np.vdot(a, op.to_dense() @ b), abs=1e-12)


def test_shot_mode_unbiased():
    rng = np.random.default_rng(0)
    a, b = random_state(8, rng), random_state(8, rng)
    exact = overlap_estimate(a, b, "re")
    shots = 400
    runs = [overlap_estimate(a, b, "re", "shots", shots, seed=s) for s in range(300)]
    se = np.std(runs, ddof=1) / np.sqrt(len(runs))
    assert abs(np.mean(runs) - exact) <= 5 * se
    exact_p = pauli_matrix_element_estimate(a, b, "XZY", "im")
    runs = [pauli_matrix_element_estimate(a, b, "XZY", "im", "shots", shots, seed=s) for s in range(300)]
    se = np.std(runs, ddof=1) / np.sqrt(len(runs))
    assert abs(np.mean(runs) - exact_p) <= 5 * se


def test_shot_mode_errors_and_determinism():
    psi = prepare_product_state("01")
    with pytest.raises(ValueError):
        overlap_estimate(psi, psi, "re", "shots", 0)
    with pytest.raises(ValueError):
        overlap_estimate(psi, psi, "phase")
    op = QubitOperator(2, {"XX": 0.4, "ZI": 1.0})
    x = hamiltonian_matrix_element(psi, psi, op, "shots", 1000, seed=3, key=(1, 2))
    y = hamiltonian_matrix_element(psi, psi, op, "shots", 1000, seed=3, key=(1, 2))
    z = hamiltonian_matrix_element(psi, psi, op, "shots", 1000, seed=3, key=(1, 3))
    assert x == y and x != z
    assert complex_overlap(psi, psi, "shots", 100, seed=1) == complex_overlap(psi, psi, "shots", 100, seed=1)
    assert derive_rng(1, 2).random() == derive_rng(1, 2).random()


def test_record_csv():
    a = prepare_product_state("10")
    rec = pauli_record(a, a, "ZI", "re", "shots", 50, seed=4)
    lines = rec.to_csv().splitlines()
    assert lines[0] == "bitstring,count,frequency"
    # ancilla 0 with system |10> every time
    assert lines[1:] == ["010,50,1.0"]
    assert rec.ancilla_probability(0) == 1.0
