"""Dense Hermitian eigendecomposition and spectral matrix functions."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

HERMITIAN_TOL = 1e-10


@dataclass(frozen=True)
class EigDecomposition:
    """Ascending eigenvalues and the matching orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def __iter__(self):
        return iter((self.eigenvalues, self.eigenvectors))


def check_hermitian(a: np.ndarray, tol: float = HERMITIAN_TOL) -> np.ndarray:
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if a.size:
        scale = max(1.0, float(np.max(np.abs(a))))
        err = float(np.max(np.abs(a - a.conj().T)))
        if err > tol * scale:
            raise ValueError(f"matrix is not Hermitian (max |A - A^H| = {err:.3e})")
    return a


def hermitian_eig(a: np.ndarray, tol: float = HERMITIAN_TOL) -> EigDecomposition:
    """Full spectrum of a Hermitian matrix, eigenvalues ascending.

    LAPACK ``*heevd`` via :func:`numpy.linalg.eigh`. The input is symmetrised
    as ``(A + A^H) / 2`` first so round-off asymmetry below ``tol`` never
    reaches the solver. Each eigenvector column is phase-fixed so that its
    largest-magnitude component is real and positive, which makes the output
    a deterministic function of the input bits.
    """
    a = check_hermitian(a, tol)
    if a.shape[0] == 0:
        return EigDecomposition(np.zeros(0), np.zeros((0, 0), dtype=a.dtype))
    sym = 0.5 * (a + a.conj().T)
    w, v = np.linalg.eigh(sym)
    pivot = np.argmax(np.abs(v), axis=0)
    ph = v[pivot, np.arange(v.shape[1])]
    ph = ph / np.abs(ph)
    v = v / ph
    return EigDecomposition(w, v)


def matrix_function(
    a: np.ndarray | EigDecomposition, f: Callable[[np.ndarray], np.ndarray]
) -> np.ndarray:
    """Return ``V f(Λ) V^H`` for Hermitian ``a``.

    ``f`` is applied elementwise to the eigenvalue array and must be finite
    there; filter the spectrum before calling if it is not.
    """
    eig = a if isinstance(a, EigDecomposition) else hermitian_eig(a)
    fw = np.asarray(f(eig.eigenvalues))
    if not np.all(np.isfinite(fw)):
        raise ValueError("f is not finite on the spectrum")
    v = eig.eigenvectors
    return (v * fw) @ v.conj().T
