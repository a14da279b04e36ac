"""From a model space to a qubit Hamiltonian, using the two-state 14N toy space.

Run: python demos/01_basis_and_mapping.py
"""

import numpy as np

from qlanczos.fermion_hamiltonian import build_dense_hamiltonian, parse_interaction_file
from qlanczos.pauli import jw_annihilation, jw_creation, map_hamiltonian, to_dense
from qlanczos.shell_basis import enumerate_mscheme_basis, enumerate_single_particle_states, parse_model_space

from _common import DATA

orbitals = parse_model_space((DATA / "model_space.txt").read_text())
states = enumerate_single_particle_states(orbitals)
print("single-particle states:")
for s in states:
    print(f"  {s.index}: {s.species} {s.orbital} m={s.m:+}")

basis = enumerate_mscheme_basis(states, 1, 1, 0)
print("\nM = 0 basis for one proton and one neutron:", [str(d) for d in basis])

data = parse_interaction_file((DATA / "interaction.txt").read_text(), n_states=len(states))
h_sd = build_dense_hamiltonian(basis, data)
print("\nHamiltonian in the Slater-determinant basis (MeV):\n", np.round(h_sd, 4))

# One mode operator, to see the Z string.
print("\na+_1 on 4 qubits:", [str(p) for p in jw_creation(1, 4)])

n = len(states)
for p in range(n):
    for q in range(n):
        anti = jw_annihilation(p, n) * jw_creation(q, n) + jw_creation(q, n) * jw_annihilation(p, n)
        assert np.allclose(to_dense(anti), np.eye(2**n) * (p == q))
print("anticommutators {a_p, a+_q} = delta_pq hold on all 16 pairs")

h = map_hamiltonian(data, n)
print(f"\nqubit Hamiltonian: {len(h)} Pauli terms")
for p in h:
    print(f"  {p.word}  {p.coeff.real:+.4f}")

# The two routes must agree inside the sector they share.
dense = to_dense(h)
idx = [d.bits for d in basis]
print("\nmax |qubit block - Slater block| =", np.abs(dense[np.ix_(idx, idx)] - h_sd).max())
print("ground energy:", np.linalg.eigvalsh(h_sd)[0])
