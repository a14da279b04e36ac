"""Reference-state recipes and their text format.

A file holds one or more blocks::

    REF hf
    TERM 1.0 0.0 1001
    REF ph
    TERM 0.7071 0.0 1001
    TERM 0.7071 0.0 0110

Amplitudes are normalised on load. One-term and two-term equal-magnitude
recipes compile to preparation circuits; anything else is statevector only.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TextIO

import numpy as np

from .circuits import Circuit
from .hadamard import reference_circuit
from .statevector import prepare_superposition


class ReferenceParseError(ValueError):
    """Malformed reference-state file."""


@dataclass(frozen=True)
class ReferenceState:
    label: str
    terms: tuple[tuple[complex, str], ...]

    @property
    def n_qubits(self) -> int:
        return len(self.terms[0][1])

    def statevector(self) -> np.ndarray:
        return prepare_superposition(list(self.terms))

    def circuit(self) -> Circuit | None:
        """Preparation circuit, or None when the recipe has no simple circuit."""
        try:
            return reference_circuit(list(self.terms))
        except ValueError:
            return None

    def hamming_weights(self) -> set[int]:
        return {bits.count("1") for _, bits in self.terms}


def parse_reference_file(source: TextIO | str) -> list[ReferenceState]:
    text = source if isinstance(source, str) else source.read()
    blocks: list[tuple[str, list[tuple[complex, str]]]] = []
    n = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        key = parts[0].upper()
        if key == "REF":
            if len(parts) != 2:
                raise ReferenceParseError(f"line {lineno}: expected 'REF <label>'")
            blocks.append((parts[1], []))
        elif key == "TERM":
            if not blocks:
                raise ReferenceParseError(f"line {lineno}: TERM before any REF")
            if len(parts) != 4:
                raise ReferenceParseError(f"line {lineno}: expected 'TERM <re> <im> <bitstring>'")
            try:
                amp = complex(float(parts[1]), float(parts[2]))
            except ValueError:
                raise ReferenceParseError(f"line {lineno}: bad amplitude in {raw!r}") from None
            bits = parts[3].strip("|>")
            if not bits or set(bits) - {"0", "1"}:
                raise ReferenceParseError(f"line {lineno}: bad bitstring {parts[3]!r}")
            if n is None:
                n = len(bits)
            elif len(bits) != n:
                raise ReferenceParseError(f"line {lineno}: bitstring length {len(bits)} != {n}")
            blocks[-1][1].append((amp, bits))
        else:
            raise ReferenceParseError(f"line {lineno}: unknown record {parts[0]!r}")
    if not blocks:
        raise ReferenceParseError("no REF blocks found")
    out = []
    for label, terms in blocks:
        if not terms:
            raise ReferenceParseError(f"reference {label!r} has no TERM lines")
        norm = np.sqrt(sum(abs(a) ** 2 for a, _ in terms))
        if norm == 0:
            raise ReferenceParseError(f"reference {label!r} has zero norm")
        out.append(ReferenceState(label, tuple((a / norm, b) for a, b in terms)))
    return out


def format_reference_file(refs: list[ReferenceState]) -> str:
    lines = []
    for r in refs:
        lines.append(f"REF {r.label}")
        lines.extend(f"TERM {float(a.real)!r} {float(a.imag)!r} {b}" for a, b in r.terms)
    return "\n".join(lines) + "\n"
