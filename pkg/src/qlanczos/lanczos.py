"""Classical Lanczos iteration used as a convergence baseline."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.linalg import eigh_tridiagonal

BREAKDOWN_TOL = 1e-12


@dataclass
class LanczosResult:
    """Ritz values after each iteration.

    ``ritz[m]`` holds the eigenvalues of the ``(m + 1) x (m + 1)``
    tridiagonal matrix and ``vectors`` the Lanczos vectors as rows.
    ``terminated_early`` is set when the Krylov space became invariant
    (``beta`` below the breakdown tolerance).
    """

    alphas: np.ndarray
    betas: np.ndarray
    ritz: list[np.ndarray] = field(default_factory=list)
    terminated_early: bool = False
    vectors: np.ndarray | None = None

    @property
    def iterations(self) -> int:
        return len(self.alphas)

    def ground_energies(self) -> np.ndarray:
        return np.array([r[0] for r in self.ritz])

    def iterations_to_converge(self, e_exact: float, tol: float) -> int | None:
        """First iteration count (1-based) with ``|E_0 - e_exact| <= tol``."""
        for m, r in enumerate(self.ritz):
            if abs(r[0] - e_exact) <= tol:
                return m + 1
        return None


def classical_lanczos(
    matvec: Callable[[np.ndarray], np.ndarray] | np.ndarray,
    pivot: np.ndarray,
    iterations: int,
    reorthogonalize: bool = True,
) -> LanczosResult:
    """Run up to ``iterations`` Lanczos steps from ``pivot``.

    Full reorthogonalisation against all previous vectors is on by default;
    without it, long runs produce ghost copies of converged eigenvalues.
    """
    if isinstance(matvec, np.ndarray):
        mat = matvec
        matvec = lambda v: mat @ v  # noqa: E731
    q = np.asarray(pivot, dtype=complex)
    nrm = np.linalg.norm(q)
    if nrm == 0:
        raise ValueError("pivot vector is zero")
    q = q / nrm
    basis = [q]
    alphas: list[float] = []
    betas: list[float] = []
    ritz: list[np.ndarray] = []
    early = False
    for m in range(iterations):
        w = matvec(basis[-1])
        alpha = float(np.real(np.vdot(basis[-1], w)))
        w = w - alpha * basis[-1]
        if m > 0:
            w = w - betas[-1] * basis[-2]
        if reorthogonalize:
            qmat = np.array(basis)
            for _ in range(2):
                w = w - qmat.T @ (qmat.conj() @ w)
        alphas.append(alpha)
        if len(alphas) == 1:
            ritz.append(np.array([alpha]))
        else:
            ritz.append(eigh_tridiagonal(np.array(alphas), np.array(betas), eigvals_only=True))
        beta = float(np.linalg.norm(w))
        if beta < BREAKDOWN_TOL * max(1.0, abs(alpha)):
            early = m + 1 < iterations
            break
        if m + 1 < iterations:
            betas.append(beta)
            basis.append(w / beta)
    return LanczosResult(
        np.array(alphas), np.array(betas[: max(0, len(alphas) - 1)]), ritz, early, np.array(basis[: len(alphas)])
    )
