"""Compile Pauli exponentials into gates and compare two ways of counting them.

Run: python demos/02_circuits_and_gate_counts.py
"""

import numpy as np

from qlanczos.circuits import (
    circuit_unitary,
    compile_pauli_exponential,
    compile_trotter_step,
    estimate_gate_count_letter_rule,
    format_circuit,
    gate_count,
    ladder_gate_count,
)
from qlanczos.fermion_hamiltonian import parse_interaction_file
from qlanczos.linalg import matrix_function
from qlanczos.pauli import PauliString, QubitOperator, map_hamiltonian, to_dense

from _common import DATA

p = PauliString("YYXX", 0.3)
circ = compile_pauli_exponential(p, angle_scale=0.1)
print(format_circuit(circ))
exact = matrix_function(to_dense(QubitOperator.from_pauli(p)), lambda w: np.exp(-1j * 0.1 * w))
print("max |circuit - exp(-i c t P)| =", np.abs(circuit_unitary(circ) - exact).max())
print("gate tally:", dict(gate_count(circ).counts))

print("\nXXYZ: letter rule", estimate_gate_count_letter_rule(["XXYZ"]), "vs compiled ladder", ladder_gate_count(["XXYZ"]))

h = map_hamiltonian(parse_interaction_file((DATA / "interaction.txt").read_text()))
step = compile_trotter_step(h, dt=0.1)
print(f"\n14N Trotter step: {len(h)} terms, {gate_count(step).total} compiled gates, "
      f"{estimate_gate_count_letter_rule(h)} by the letter rule")

# First-order Trotter error should fall roughly as 1/N.
u_exact = matrix_function(to_dense(h), lambda w: np.exp(-1j * 1.0 * w))
for n in (1, 2, 4, 8):
    u = circuit_unitary(compile_trotter_step(h, dt=1.0, trotter_n=n))
    print(f"  N = {n}: ||U_N - U|| = {np.linalg.norm(u - u_exact, 2):.3e}")
