"""QLanczos with real- and imaginary-time Krylov vectors against classical Lanczos.

The Hamiltonian is the 640-dimensional M = 0 block for two protons and two
neutrons in the sd shell, with a random interaction.

Run: python demos/04_real_vs_imaginary_time.py
"""

import numpy as np

from qlanczos.fermion_hamiltonian import build_dense_hamiltonian
from qlanczos.krylov import moments_from_spectrum, reference_from_ite_anneal, run_to_convergence
from qlanczos.lanczos import classical_lanczos
from qlanczos.linalg import hermitian_eig
from qlanczos.shell_basis import enumerate_mscheme_basis

from _common import random_sd_interaction

states, data = random_sd_interaction(seed=4)
h = build_dense_hamiltonian(enumerate_mscheme_basis(states, 2, 2, 0), data).real
eig = hermitian_eig(h)
w = eig.eigenvalues
print(f"dimension {h.shape[0]}, E_exact = {w[0]:.4f}, spectral width {w[-1] - w[0]:.1f}")

ref = reference_from_ite_anneal(eig, w[0] + 0.3 * (w.mean() - w[0]), seed=0)
print(f"reference energy {ref.energy:.4f} after {ref.steps} imaginary-time steps")

coeffs = (eig.eigenvectors.conj().T @ ref.state)[None, :]
for mode in ("real", "imaginary"):
    table = moments_from_spectrum(w, coeffs, dt=0.1, S=40, mode=mode)
    trace = run_to_convergence(table, w[0], ref.energy, criterion=0.05, delta=1e-10)
    print(f"{mode:>9} time: converged={trace.converged} at S={trace.iterations}, "
          f"E0={trace.entries[-1].energies[0]:.4f}")

lz = classical_lanczos(h, ref.state, 40)
print(f"classical Lanczos: within 5% of E_c after {lz.iterations_to_converge(w[0], 0.05 * abs(w[0] - ref.energy))} "
      f"iterations, within 1e-8 after {lz.iterations_to_converge(w[0], 1e-8)}")
print("\nRitz ground estimates per iteration:", np.round(lz.ground_energies()[:12], 3))
