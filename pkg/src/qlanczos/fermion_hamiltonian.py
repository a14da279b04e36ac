"""Interaction files and the many-body Hamiltonian in a determinant basis.

The Hamiltonian is

    H = CORE + sum_i e_i a†_i a_i + 1/4 sum_{ijkl} <ij|V|kl> a†_i a†_j a_l a_k

with antisymmetrised two-body elements. Stored elements keep only i<j and
k<l, so the quarter factor is absorbed: each stored element multiplies
``a†_i a†_j a_l a_k`` once. Energies are in MeV.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Sequence, TextIO

import numpy as np

from .shell_basis import SlaterDeterminant, apply_operator_string

_TOL = 1e-12


class InteractionParseError(ValueError):
    """Malformed or inconsistent interaction file."""


@dataclass
class InteractionData:
    n_states: int
    spe: dict[int, float] = field(default_factory=dict)
    tbme: dict[tuple[int, int, int, int], float] = field(default_factory=dict)
    core: float = 0.0

    def element(self, i: int, j: int, k: int, l: int) -> float:
        """Antisymmetrised <ij|V|kl> for any index order."""
        if i == j or k == l:
            return 0.0
        sign = 1.0
        if i > j:
            i, j, sign = j, i, -sign
        if k > l:
            k, l, sign = l, k, -sign
        return sign * self.tbme.get((i, j, k, l), 0.0)

    def shifted(self, c: float) -> "InteractionData":
        """Copy with ``c`` added to every single-particle energy."""
        spe = {k: self.spe.get(k, 0.0) + c for k in range(self.n_states)}
        return InteractionData(self.n_states, spe, dict(self.tbme), self.core)


def canonical_tbme(i: int, j: int, k: int, l: int, v: float) -> tuple[tuple[int, int, int, int], float]:
    if i == j or k == l:
        raise InteractionParseError(f"repeated index in <{i}{j}|V|{k}{l}> violates Pauli exclusion")
    if i > j:
        i, j, v = j, i, -v
    if k > l:
        k, l, v = l, k, -v
    return (i, j, k, l), v


def parse_interaction_file(source: TextIO | str, n_states: int | None = None) -> InteractionData:
    """Parse ``SPE``, ``TBME``, ``CORE`` and ``NSTATES`` lines.

    Two-body elements are canonicalised to ``i<j, k<l`` (the sign of each swap
    is absorbed) and the Hermitian partner ``<kl|V|ij>`` is filled in when it
    is absent. ``n_states`` defaults to an ``NSTATES`` line, else to one more
    than the largest index seen.
    """
    text = source if isinstance(source, str) else source.read()
    spe: dict[int, float] = {}
    tbme: dict[tuple[int, int, int, int], float] = {}
    explicit: set[tuple[int, int, int, int]] = set()
    core = 0.0
    declared = None
    max_index = -1

    def fail(lineno, msg):
        raise InteractionParseError(f"line {lineno}: {msg}")

    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        tag = parts[0].upper()
        try:
            if tag == "SPE" and len(parts) == 3:
                i, e = int(parts[1]), float(parts[2])
                if i < 0:
                    fail(lineno, f"negative state index {i}")
                if i in spe and abs(spe[i] - e) > _TOL:
                    fail(lineno, f"conflicting duplicate SPE for state {i}")
                spe[i] = e
                max_index = max(max_index, i)
            elif tag == "TBME" and len(parts) == 6:
                idx = tuple(int(x) for x in parts[1:5])
                if min(idx) < 0:
                    fail(lineno, f"negative state index in {idx}")
                try:
                    key, v = canonical_tbme(*idx, float(parts[5]))
                except InteractionParseError as exc:
                    fail(lineno, str(exc))
                if key in explicit and abs(tbme[key] - v) > _TOL:
                    fail(lineno, f"conflicting duplicate TBME {key}")
                partner = (key[2], key[3], key[0], key[1])
                if partner in explicit and partner != key and abs(tbme[partner] - v) > _TOL:
                    fail(lineno, f"TBME {key} = {v} breaks Hermiticity with {partner} = {tbme[partner]}")
                tbme[key] = v
                explicit.add(key)
                if partner not in explicit:
                    tbme[partner] = v
                max_index = max(max_index, *idx)
            elif tag == "CORE" and len(parts) == 2:
                core = float(parts[1])
            elif tag == "NSTATES" and len(parts) == 2:
                declared = int(parts[1])
            else:
                fail(lineno, f"malformed line {raw!r}")
        except ValueError as exc:
            if isinstance(exc, InteractionParseError):
                raise
            fail(lineno, f"bad number in {raw!r}")

    if n_states is None:
        n_states = declared if declared is not None else max_index + 1
    elif declared is not None and declared != n_states:
        raise InteractionParseError(f"file declares NSTATES {declared}, expected {n_states}")
    if max_index >= n_states:
        raise InteractionParseError(f"state index {max_index} >= n_states = {n_states}")
    return InteractionData(n_states, spe, {k: v for k, v in tbme.items() if v != 0.0}, core)


def format_interaction(data: InteractionData) -> str:
    lines = [f"NSTATES {data.n_states}"]
    if data.core:
        lines.append(f"CORE {float(data.core)!r}")
    lines += [f"SPE {i} {float(e)!r}" for i, e in sorted(data.spe.items())]
    lines += [f"TBME {i} {j} {k} {l} {float(v)!r}" for (i, j, k, l), v in sorted(data.tbme.items())]
    return "\n".join(lines) + "\n"


def build_dense_hamiltonian(basis: Sequence[SlaterDeterminant], data: InteractionData) -> np.ndarray:
    """Matrix ``H[m, n] = <Psi_m|H|Psi_n>`` over the given determinants."""
    dim = len(basis)
    for det in basis:
        if det.n_states != data.n_states:
            raise ValueError(
                f"determinant over {det.n_states} states does not match interaction with {data.n_states}"
            )
    row = {det.bits: m for m, det in enumerate(basis)}
    if len(row) != dim:
        raise ValueError("basis contains duplicate determinants")

    by_annihilated: dict[tuple[int, int], list[tuple[int, int, float]]] = defaultdict(list)
    for (i, j, k, l), v in data.tbme.items():
        by_annihilated[(k, l)].append((i, j, v))

    h = np.zeros((dim, dim), dtype=complex)
    for n, det in enumerate(basis):
        occ = det.occupied()
        h[n, n] += data.core + sum(data.spe.get(k, 0.0) for k in occ)
        for a in range(len(occ)):
            for b in range(a + 1, len(occ)):
                k, l = occ[a], occ[b]
                for i, j, v in by_annihilated.get((k, l), ()):
                    res = apply_operator_string(
                        det, [("create", i), ("create", j), ("annihilate", l), ("annihilate", k)]
                    )
                    if res is None:
                        continue
                    phase, out = res
                    m = row.get(out.bits)
                    if m is not None:
                        h[m, n] += phase * v
    return h


def correlation_energy(e_exact: float, e_ref: float) -> float:
    """``E_exact - E_ref``; the convergence yardstick for ground-state runs."""
    return e_exact - e_ref
