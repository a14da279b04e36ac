"""Small helpers shared by the demo scripts."""

import itertools
from pathlib import Path

import numpy as np

from qlanczos.fermion_hamiltonian import InteractionData
from qlanczos.shell_basis import Orbital, enumerate_single_particle_states

DATA = Path(__file__).resolve().parent.parent / "data" / "n14"
SD_SHELL = [Orbital(0, 2, 5), Orbital(1, 0, 1), Orbital(0, 2, 3)]


def random_sd_interaction(seed, spe=(-3.9, -3.2, 2.1)):
    """Charge- and M-conserving random two-body interaction on the sd shell.

    Not a fitted interaction: it only has the right selection rules.
    """
    states = enumerate_single_particle_states({"p": SD_SHELL, "n": SD_SHELL})
    rng = np.random.default_rng(seed)
    tbme = {}
    pairs = list(itertools.combinations(range(len(states)), 2))
    for (i, j), (k, l) in itertools.combinations_with_replacement(pairs, 2):
        if sorted((states[i].species, states[j].species)) != sorted((states[k].species, states[l].species)):
            continue
        if states[i].twom + states[j].twom != states[k].twom + states[l].twom:
            continue
        v = rng.standard_normal()
        tbme[(i, j, k, l)] = tbme[(k, l, i, j)] = v
    spe_by_orbital = dict(zip(SD_SHELL, spe))
    return states, InteractionData(len(states), {s.index: spe_by_orbital[s.orbital] for s in states}, tbme)
