"""More references and noisy moments: how many Krylov steps does convergence take?

Run: python demos/05_multireference_and_noise.py
"""

import numpy as np

from qlanczos.fermion_hamiltonian import build_dense_hamiltonian
from qlanczos.krylov import (
    inject_noise,
    iterations_to_converge,
    lowest_energies,
    moments_from_spectrum,
    reference_from_ite_anneal,
    run_to_convergence,
)
from qlanczos.linalg import hermitian_eig
from qlanczos.shell_basis import enumerate_mscheme_basis

from _common import random_sd_interaction

states, data = random_sd_interaction(seed=1)
h = build_dense_hamiltonian(enumerate_mscheme_basis(states, 2, 1, 1), data).real
eig = hermitian_eig(h)
w, v = eig.eigenvalues, eig.eigenvectors
target = w[0] + 0.3 * (w.mean() - w[0])
refs = [reference_from_ite_anneal(eig, target, seed=s) for s in range(3)]
coeffs = np.array([v.conj().T @ r.state for r in refs])
e_ref = refs[0].energy
S_MAX = 30
print(f"dimension {h.shape[0]}, E_exact = {w[0]:.4f}, E_ref = {e_ref:.4f}")

for eta in (0.0, 1e-3, 1e-2):
    row = []
    for R in (1, 2, 3):
        clean = moments_from_spectrum(w, coeffs[:R], 0.1, S_MAX)
        its = []
        for seed in range(20 if eta else 1):
            table = inject_noise(clean, eta, seed)
            trace = run_to_convergence(table, w[0], e_ref, delta=max(eta / 10, 1e-10))
            its.append(iterations_to_converge(trace, S_MAX))
        row.append(f"R={R}: {np.median(its):5.1f}")
    print(f"eta = {eta:<6}  median iterations  " + "   ".join(row))

table = moments_from_spectrum(w, coeffs, 0.1, 8)
energies, kept = lowest_energies(table, 8, 1e-10, n_eigs=4)
print("\nlowest four from R=3, S=8:", np.round(energies, 4), f"(retained {kept} of {3 * 9})")
print("exact lowest four:        ", np.round(w[:4], 4))
