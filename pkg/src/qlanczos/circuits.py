"""Gate-level compilation of Pauli exponentials and Trotter steps.

``exp(-iθP)`` for a Pauli word ``P`` is built the usual way: rotate every
non-identity qubit into the Z basis (``H`` for X, ``S†`` then ``H`` for Y),
gather the parity onto the last non-identity qubit with a CNOT ladder, apply
``RZ(2θ)`` there and undo everything in reverse. Identity words only add a
global phase, kept on :attr:`Circuit.phase` instead of being emitted.
"""

from __future__ import annotations

import cmath
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .pauli import PauliString, QubitOperator, weight
from .statevector import apply_gate, gate_matrix

UNITARY_QUBIT_CAP = 10

_INVERSE = {"H": "H", "X": "X", "Y": "Y", "Z": "Z", "I": "I", "S": "SDG", "SDG": "S"}


@dataclass(frozen=True)
class Gate:
    kind: str
    target: int
    controls: tuple[int, ...] = ()
    angle: float | None = None

    @property
    def label(self) -> str:
        """Gate name as counted: ``CX`` for a singly controlled X, ``C2X`` for Toffoli."""
        if not self.controls:
            return self.kind
        prefix = "C" if len(self.controls) == 1 else f"C{len(self.controls)}"
        return prefix + self.kind

    def inverse(self) -> "Gate":
        if self.kind in _INVERSE:
            return Gate(_INVERSE[self.kind], self.target, self.controls)
        return Gate(self.kind, self.target, self.controls, -self.angle)


@dataclass
class Circuit:
    n_qubits: int
    gates: list[Gate] = field(default_factory=list)
    phase: complex = 1.0

    def add(self, kind: str, target: int, controls: Sequence[int] | int = (), angle: float | None = None) -> "Circuit":
        if isinstance(controls, int):
            controls = (controls,)
        kind = kind.upper()
        if kind in ("CX", "CNOT"):
            kind = "X"
        for q in (target, *controls):
            if not 0 <= q < self.n_qubits:
                raise IndexError(f"qubit {q} out of range for {self.n_qubits} qubits")
        if kind in ("RX", "RY", "RZ", "P") and (angle is None or not np.isfinite(angle)):
            raise ValueError(f"{kind} needs a finite angle")
        self.gates.append(Gate(kind, target, tuple(controls), angle))
        return self

    def extend(self, other: "Circuit") -> "Circuit":
        if other.n_qubits != self.n_qubits:
            raise ValueError("qubit count mismatch")
        self.gates.extend(other.gates)
        self.phase *= other.phase
        return self

    def __len__(self) -> int:
        return len(self.gates)

    def inverse(self) -> "Circuit":
        return Circuit(self.n_qubits, [g.inverse() for g in reversed(self.gates)], self.phase.conjugate())

    def repeated(self, times: int) -> "Circuit":
        out = Circuit(self.n_qubits)
        for _ in range(times):
            out.extend(self)
        return out

    def controlled(self, control: int, n_qubits: int | None = None) -> "Circuit":
        """Every gate gains ``control``; the global phase becomes ``P(arg phase)`` on it."""
        n = n_qubits or self.n_qubits
        out = Circuit(n)
        for g in self.gates:
            out.gates.append(Gate(g.kind, g.target, (control, *g.controls), g.angle))
        if abs(self.phase - 1) > 1e-15:
            out.add("P", control, angle=cmath.phase(self.phase))
        return out

    def apply(self, state: np.ndarray) -> np.ndarray:
        """Run the circuit on a statevector (or on each column of a matrix)."""
        for g in self.gates:
            state = apply_gate(state, g.kind, g.target, g.controls or None, g.angle)
        return self.phase * state if self.phase != 1 else state


@dataclass(frozen=True)
class GateCount:
    counts: dict[str, int]

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def __getitem__(self, kind: str) -> int:
        return self.counts.get(kind, 0)


def _basis_change(word: str) -> list[tuple[str, int]]:
    pre = []
    for q, c in enumerate(word):
        if c == "X":
            pre.append(("H", q))
        elif c == "Y":
            pre += [("SDG", q), ("H", q)]
    return pre


def compile_pauli_exponential(p: PauliString, angle_scale: float = 1.0) -> Circuit:
    """Circuit for ``exp(-i c P angle_scale)`` with the real coefficient ``c`` of ``p``."""
    if abs(complex(p.coeff).imag) > 1e-12:
        raise ValueError(f"complex coefficient {p.coeff} on {p.word}; need a Hermitian term")
    theta = complex(p.coeff).real * angle_scale
    n = p.n_qubits
    circ = Circuit(n)
    support = [q for q, c in enumerate(p.word) if c != "I"]
    if not support:
        circ.phase = cmath.exp(-1j * theta)
        return circ
    pre = _basis_change(p.word)
    for kind, q in pre:
        circ.add(kind, q)
    ladder = list(zip(support[:-1], support[1:]))
    for a, b in ladder:
        circ.add("X", b, a)
    circ.add("RZ", support[-1], angle=2 * theta)
    for a, b in reversed(ladder):
        circ.add("X", b, a)
    for kind, q in reversed(pre):
        circ.add(_INVERSE[kind], q)
    return circ


def compile_trotter_step(op: QubitOperator, dt: float, k: int = 1, trotter_n: int = 1) -> Circuit:
    """Gate sequence for ``U_k = (prod_m exp(-i c_m P_m dt k / N))^N``.

    Matches :func:`qlanczos.statevector.trotter_evolve` term for term.
    """
    if trotter_n < 1:
        raise ValueError("Trotter number must be >= 1")
    one = Circuit(op.n_qubits)
    scale = dt * k / trotter_n
    for word, c in op.real_terms():
        one.extend(compile_pauli_exponential(PauliString(word, c), scale))
    return one.repeated(trotter_n)


def exponential_blocks(op: QubitOperator, dt: float, k: int = 1, trotter_n: int = 1) -> list[Circuit]:
    """The per-term circuits of one Trotter slice, in canonical order."""
    scale = dt * k / trotter_n
    return [compile_pauli_exponential(PauliString(w, c), scale) for w, c in op.real_terms()]


def gate_count(c: Circuit) -> GateCount:
    return GateCount(dict(Counter(g.label for g in c.gates)))


def estimate_gate_count_letter_rule(words: QubitOperator | Iterable[str]) -> int:
    """Rule-of-thumb count: 2 H per X, 2 S + 2 H per Y, 2 CNOT per non-identity
    letter and one rotation per non-identity string."""
    if isinstance(words, QubitOperator):
        words = list(words.terms)
    elif isinstance(words, str):
        words = [words]
    total = 0
    for w in words:
        nx, ny = w.count("X"), w.count("Y")
        wt = weight(w)
        if wt:
            total += 2 * nx + 4 * ny + 2 * wt + 1
    return total


def ladder_gate_count(words: QubitOperator | Iterable[str]) -> int:
    """Gate total of the compiled ladder circuits, without building them."""
    if isinstance(words, QubitOperator):
        words = list(words.terms)
    elif isinstance(words, str):
        words = [words]
    total = 0
    for w in words:
        wt = weight(w)
        if wt:
            total += 2 * w.count("X") + 4 * w.count("Y") + 2 * (wt - 1) + 1
    return total


def circuit_unitary(c: Circuit, cap: int = UNITARY_QUBIT_CAP) -> np.ndarray:
    if c.n_qubits > cap:
        raise ValueError(f"{c.n_qubits} qubits exceeds the unitary cap of {cap}")
    return c.apply(np.eye(1 << c.n_qubits, dtype=complex))


def format_circuit(c: Circuit) -> str:
    """``QUBITS n``, optional ``PHASE re im``, then ``GATE kind target [controls] [angle]``.

    Controls are written comma-separated; ``-`` marks none when an angle follows.
    """
    lines = [f"QUBITS {c.n_qubits}"]
    if c.phase != 1:
        lines.append(f"PHASE {complex(c.phase).real!r} {complex(c.phase).imag!r}")
    for g in c.gates:
        parts = ["GATE", g.kind, str(g.target)]
        if g.controls:
            parts.append(",".join(map(str, g.controls)))
        elif g.angle is not None:
            parts.append("-")
        if g.angle is not None:
            parts.append(repr(float(g.angle)))
        lines.append(" ".join(parts))
    return "\n".join(lines) + "\n"


def parse_circuit(text: str) -> Circuit:
    circ = None
    phase = 1.0
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        tag = parts[0].upper()
        if tag == "QUBITS":
            circ = Circuit(int(parts[1]))
        elif tag == "PHASE":
            phase = complex(float(parts[1]), float(parts[2]))
        elif tag == "GATE":
            if circ is None:
                raise ValueError(f"line {lineno}: GATE before QUBITS")
            kind, target = parts[1], int(parts[2])
            controls: tuple[int, ...] = ()
            angle = None
            if len(parts) > 3 and parts[3] != "-":
                controls = tuple(int(x) for x in parts[3].split(","))
            if len(parts) > 4:
                angle = float(parts[4])
            circ.add(kind, target, controls, angle)
        else:
            raise ValueError(f"line {lineno}: unknown record {raw!r}")
    if circ is None:
        raise ValueError("circuit text has no QUBITS header")
    circ.phase = phase
    return circ


def bell_circuit() -> Circuit:
    return Circuit(2).add("H", 0).add("X", 1, 0)


def basis_change_matrix(letter: str) -> np.ndarray:
    """Single-qubit ``B`` with ``B† Z B`` equal to the given Pauli letter."""
    if letter == "X":
        return gate_matrix("H")
    if letter == "Y":
        return gate_matrix("H") @ gate_matrix("SDG")
    if letter in ("Z", "I"):
        return np.eye(2, dtype=complex)
    raise ValueError(letter)
