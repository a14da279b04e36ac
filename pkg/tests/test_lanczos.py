import numpy as np
import pytest

from qlanczos.lanczos import classical_lanczos
from qlanczos.linalg import hermitian_eig

from conftest import random_hermitian


def test_eigenvector_pivot_terminates():
    rng = np.random.default_rng(0)
    h = random_hermitian(12, rng)
    w, v = hermitian_eig(h)
    res = classical_lanczos(h, v[:, 3], 10)
    assert res.alphas[0] == pytest.approx(w[3])
    assert res.iterations == 1 and res.terminated_early
    assert res.betas.size == 0


def test_diagonal_reaches_minimum_within_five():
    h = np.diag([4.0, -1.5, 2.0, 0.5, 3.0])
    res = classical_lanczos(lambda x: h @ x, np.ones(5), 5)
    assert res.ground_energies()[-1] == pytest.approx(-1.5, abs=1e-10)
    assert res.iterations_to_converge(-1.5, 1e-10) <= 5


def test_vectors_orthonormal_and_tridiagonal():
    rng = np.random.default_rng(1)
    h = random_hermitian(60, rng)
    res = classical_lanczos(h, rng.standard_normal(60), 30)
    q = res.vectors
    assert np.abs(q.conj() @ q.T - np.eye(30)).max() <= 1e-10
    t = q.conj() @ h @ q.T
    expected = np.diag(res.alphas) + np.diag(res.betas, 1) + np.diag(res.betas, -1)
    assert np.abs(t - expected).max() <= 1e-9


def test_ritz_values_interlace_and_decrease():
    rng = np.random.default_rng(2)
    h = random_hermitian(40, rng)
    res = classical_lanczos(h, rng.standard_normal(40), 20)
    lows = res.ground_energies()
    assert np.all(np.diff(lows) <= 1e-10)
    assert lows[-1] >= np.linalg.eigvalsh(h)[0] - 1e-10


def test_full_space_is_exact():
    rng = np.random.default_rng(3)
    h = random_hermitian(15, rng)
    res = classical_lanczos(h, rng.standard_normal(15), 15)
    assert np.allclose(res.ritz[-1], np.linalg.eigvalsh(h), atol=1e-9)


def test_zero_pivot_rejected():
    with pytest.raises(ValueError):
        classical_lanczos(np.eye(3), np.zeros(3), 2)
