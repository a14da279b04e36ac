"""Shell-model single-particle states, M-scheme bases and ladder operators.

Conventions
-----------
Half-integer quantum numbers are stored doubled (``twoj``, ``twom``).
Single-particle states are indexed protons first, then neutrons; inside a
species by orbital order of appearance and then by ``m`` descending.

A Slater determinant is an occupation bitmask: bit ``k`` of ``bits`` is the
occupancy of state ``k``, which is also qubit ``k`` and the ``2**k`` bit of
a statevector amplitude index. The printed form puts state 0 leftmost, so
``a†_0 a†_3 |0000>`` prints as ``|1001>``.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence, TextIO

SPECIES = ("p", "n")
_SPECIES_ALIASES = {"p": "p", "proton": "p", "protons": "p", "n": "n", "neutron": "n", "neutrons": "n"}
_L_LETTERS = "spdfghik"


class ModelSpaceError(ValueError):
    """Invalid orbital definition or malformed model-space file."""


@dataclass(frozen=True, order=True)
class Orbital:
    n: int
    l: int
    twoj: int

    def __post_init__(self):
        if self.n < 0 or self.l < 0:
            raise ModelSpaceError(f"n and l must be non-negative, got n={self.n}, l={self.l}")
        if self.twoj <= 0 or abs(self.twoj - 2 * self.l) != 1:
            raise ModelSpaceError(
                f"invalid (l, j) pair: l={self.l}, j={self.twoj}/2 (need j = l +/- 1/2 > 0)"
            )

    @property
    def degeneracy(self) -> int:
        return self.twoj + 1

    @property
    def label(self) -> str:
        letter = _L_LETTERS[self.l] if self.l < len(_L_LETTERS) else f"[l={self.l}]"
        return f"{self.n}{letter}{self.twoj}/2"


@dataclass(frozen=True)
class SingleParticleState:
    index: int
    species: str
    orbital: Orbital
    twom: int

    @property
    def m(self) -> float:
        return self.twom / 2


@dataclass(frozen=True, order=True)
class SlaterDeterminant:
    """Occupation bitmask over ``n_states`` single-particle states."""

    bits: int
    n_states: int

    def __post_init__(self):
        if self.bits < 0 or self.bits >> self.n_states:
            raise ValueError(f"bits {self.bits:#b} do not fit in {self.n_states} states")

    @classmethod
    def from_string(cls, s: str) -> "SlaterDeterminant":
        s = s.strip().strip("|>").strip("⟩")
        if not s or set(s) - {"0", "1"}:
            raise ValueError(f"not an occupation bitstring: {s!r}")
        bits = sum(1 << k for k, c in enumerate(s) if c == "1")
        return cls(bits, len(s))

    @classmethod
    def from_occupied(cls, occupied: Iterable[int], n_states: int) -> "SlaterDeterminant":
        bits = 0
        for k in occupied:
            if not 0 <= k < n_states:
                raise IndexError(f"state index {k} out of range for {n_states} states")
            bits |= 1 << k
        return cls(bits, n_states)

    def occupied(self) -> tuple[int, ...]:
        return tuple(k for k in range(self.n_states) if self.bits >> k & 1)

    def is_occupied(self, k: int) -> bool:
        return bool(self.bits >> k & 1)

    @property
    def n_particles(self) -> int:
        return bin(self.bits).count("1")

    def to_string(self) -> str:
        return "".join("1" if self.bits >> k & 1 else "0" for k in range(self.n_states))

    def __str__(self) -> str:
        return f"|{self.to_string()}>"


def enumerate_single_particle_states(
    orbitals: Mapping[str, Sequence[Orbital]],
) -> list[SingleParticleState]:
    """All (species, orbital, m) states in canonical order.

    Parameters
    ----------
    orbitals : mapping
        Species label (``"p"``/``"n"`` or ``"proton"``/``"neutron"``) to its
        ordered list of orbitals. Missing species contribute nothing.
    """
    by_species: dict[str, list[Orbital]] = {s: [] for s in SPECIES}
    for key, orbs in orbitals.items():
        try:
            sp = _SPECIES_ALIASES[key.lower()]
        except KeyError:
            raise ModelSpaceError(f"unknown species {key!r}") from None
        by_species[sp].extend(orbs)

    states = []
    for sp in SPECIES:
        for orb in by_species[sp]:
            if not isinstance(orb, Orbital):
                orb = Orbital(*orb)
            for twom in range(orb.twoj, -orb.twoj - 1, -2):
                states.append(SingleParticleState(len(states), sp, orb, twom))
    return states


def enumerate_mscheme_basis(
    states: Sequence[SingleParticleState], n_protons: int, n_neutrons: int, twoM: int
) -> list[SlaterDeterminant]:
    """Slater determinants with fixed species counts and total ``2M = twoM``.

    Ordered lexicographically by the tuple of occupied indices (protons are
    always lower indices than neutrons). Returns an empty list, with a
    warning, when a particle count exceeds the available states.
    """
    n_states = len(states)
    proton_idx = [s.index for s in states if s.species == "p"]
    neutron_idx = [s.index for s in states if s.species == "n"]
    if n_protons > len(proton_idx) or n_neutrons > len(neutron_idx) or min(n_protons, n_neutrons) < 0:
        warnings.warn(
            f"cannot place {n_protons} protons / {n_neutrons} neutrons in "
            f"{len(proton_idx)} / {len(neutron_idx)} states; basis is empty",
            stacklevel=2,
        )
        return []
    twom = {s.index: s.twom for s in states}

    basis = []
    for pc in itertools.combinations(proton_idx, n_protons):
        mp = sum(twom[k] for k in pc)
        for nc in itertools.combinations(neutron_idx, n_neutrons):
            if mp + sum(twom[k] for k in nc) == twoM:
                basis.append(SlaterDeterminant.from_occupied(pc + nc, n_states))
    return basis


def apply_ladder(
    det: SlaterDeterminant, op: str, k: int
) -> tuple[int, SlaterDeterminant] | None:
    """Apply ``a†_k`` (``op="create"``) or ``a_k`` (``op="annihilate"``).

    Returns ``(phase, result)`` with ``phase = (-1)**(occupied states below k)``,
    or ``None`` when the determinant is annihilated.
    """
    if not 0 <= k < det.n_states:
        raise IndexError(f"state index {k} out of range for {det.n_states} states")
    occupied = det.bits >> k & 1
    if op in ("create", "creation", "+"):
        if occupied:
            return None
    elif op in ("annihilate", "annihilation", "-"):
        if not occupied:
            return None
    else:
        raise ValueError(f"unknown ladder operator {op!r}")
    below = bin(det.bits & ((1 << k) - 1)).count("1")
    return (-1) ** below, SlaterDeterminant(det.bits ^ (1 << k), det.n_states)


def apply_operator_string(
    det: SlaterDeterminant, ops: Sequence[tuple[str, int]]
) -> tuple[int, SlaterDeterminant] | None:
    """Apply a product of ladder operators written left to right.

    ``[("create", 0), ("create", 3)]`` means ``a†_0 a†_3``, so the rightmost
    operator acts first.
    """
    phase = 1
    for op, k in reversed(ops):
        res = apply_ladder(det, op, k)
        if res is None:
            return None
        sign, det = res
        phase *= sign
    return phase, det


def total_twom(det: SlaterDeterminant, states: Sequence[SingleParticleState]) -> int:
    return sum(states[k].twom for k in det.occupied())


def species_counts(det: SlaterDeterminant, states: Sequence[SingleParticleState]) -> tuple[int, int]:
    occ = det.occupied()
    n_p = sum(1 for k in occ if states[k].species == "p")
    return n_p, len(occ) - n_p


def parse_model_space(source: TextIO | str) -> dict[str, list[Orbital]]:
    """Read ``ORBITAL <species> <n> <l> <2j>`` lines; ``#`` starts a comment."""
    text = source if isinstance(source, str) else source.read()
    orbitals: dict[str, list[Orbital]] = {s: [] for s in SPECIES}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0].upper() != "ORBITAL" or len(parts) != 5:
            raise ModelSpaceError(f"line {lineno}: expected 'ORBITAL <species> <n> <l> <2j>', got {raw!r}")
        sp = _SPECIES_ALIASES.get(parts[1].lower())
        if sp is None:
            raise ModelSpaceError(f"line {lineno}: unknown species {parts[1]!r}")
        try:
            n, l, twoj = (int(x) for x in parts[2:])
        except ValueError:
            raise ModelSpaceError(f"line {lineno}: non-integer quantum number in {raw!r}") from None
        try:
            orbitals[sp].append(Orbital(n, l, twoj))
        except ModelSpaceError as exc:
            raise ModelSpaceError(f"line {lineno}: {exc}") from None
    return orbitals


def format_model_space(orbitals: Mapping[str, Sequence[Orbital]]) -> str:
    lines = []
    for sp in SPECIES:
        for orb in orbitals.get(sp, ()):
            lines.append(f"ORBITAL {sp} {orb.n} {orb.l} {orb.twoj}")
    return "\n".join(lines) + "\n"
