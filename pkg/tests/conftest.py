import itertools

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from qlanczos.fermion_hamiltonian import InteractionData, build_dense_hamiltonian
from qlanczos.shell_basis import Orbital, enumerate_mscheme_basis, enumerate_single_particle_states

settings.register_profile(
    "default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

P_HALF = Orbital(0, 1, 1)
SD_SHELL = [Orbital(0, 2, 5), Orbital(1, 0, 1), Orbital(0, 2, 3)]


def random_hermitian(n, rng, scale=1.0):
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return scale * (a + a.conj().T) / 2


def random_state(dim, rng):
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def goe_matrix(n, seed, radius=20.0):
    """Real symmetric Gaussian matrix with semicircle radius ``radius``."""
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((n, n))
    return (a + a.T) / 2 * radius / (2 * np.sqrt(n / 2))


def n14_interaction(v=(-2.1, -1.7, 0.9, -0.6, -0.4, 0.3), spe=(-1.2, -1.2, -0.8, -0.8)):
    """¹⁴N 0p1/2 space: six TBMEs with i<j, k<l, conserving M and charge."""
    keys = [(0, 3, 0, 3), (1, 2, 1, 2), (0, 3, 1, 2), (0, 2, 0, 2), (1, 3, 1, 3), (0, 1, 2, 3)]
    tbme = {}
    for key, val in zip(keys, v):
        tbme[key] = val
        tbme[(key[2], key[3], key[0], key[1])] = val
    return InteractionData(4, dict(enumerate(spe)), tbme)


def random_interaction(orbitals, seed, spe_values=None):
    """Random two-body interaction conserving charge and M on a p/n model space."""
    states = enumerate_single_particle_states({"p": orbitals, "n": orbitals})
    rng = np.random.default_rng(seed)
    tbme = {}
    pairs = list(itertools.combinations(range(len(states)), 2))
    for (i, j), (k, l) in itertools.combinations_with_replacement(pairs, 2):
        if sorted((states[i].species, states[j].species)) != sorted((states[k].species, states[l].species)):
            continue
        if states[i].twom + states[j].twom != states[k].twom + states[l].twom:
            continue
        v = rng.standard_normal() * (np.sqrt(2) if (i, j) == (k, l) else 1.0)
        tbme[(i, j, k, l)] = v
        tbme[(k, l, i, j)] = v
    if spe_values is None:
        spe_values = rng.uniform(-4, 2, len(orbitals))
    spe_by_orbital = dict(zip(orbitals, spe_values))
    spe = {s.index: float(spe_by_orbital[s.orbital]) for s in states}
    return states, InteractionData(len(states), spe, tbme)


def sd_shell_random_interaction(seed):
    """sd-shell (24 states) random interaction with fixed, USD-like orbital energies."""
    return random_interaction(SD_SHELL, seed, (-3.9, -3.2, 2.1))


def ne20_like_hamiltonian(seed):
    """640-dimensional M=0 block for 2 protons + 2 neutrons in the sd shell."""
    states, data = sd_shell_random_interaction(seed)
    basis = enumerate_mscheme_basis(states, 2, 2, 0)
    return build_dense_hamiltonian(basis, data).real


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES: list[str] = []


def report_criterion(number, passed, detail):
    """Print one pass/fail line and keep it for the end-of-run summary."""
    line = f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
