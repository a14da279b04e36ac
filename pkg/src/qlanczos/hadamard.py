"""Hadamard-test estimates of overlaps and Pauli matrix elements.

The ancilla is the extra qubit ``n`` (most significant bit of the joint
index). It is prepared in ``H|0>`` for the real part or ``S†H|0>`` for the
imaginary part. The system is prepared in ``|ψ_i>``, and a controlled
unitary maps it to ``|ψ_j>`` on the ancilla-1 branch. A final ``H`` on the
ancilla leaves

    Re part:  ½|0>(ψ_i + ψ_j)   + ½|1>(ψ_i - ψ_j)
    Im part:  ½|0>(ψ_i - iψ_j)  + ½|1>(ψ_i + iψ_j)

so ``P(0) - P(1)`` equals ``Re<ψ_i|ψ_j>`` or ``Im<ψ_i|ψ_j>`` respectively.
For a Pauli element the system is rotated so that the Pauli becomes a Z
parity, and the whole register is measured.

Rendered bitstrings put the ancilla first, then system qubits 0..n-1.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .circuits import Circuit
from .pauli import PauliString, QubitOperator, word_masks, _parity_sign
from .statevector import apply_gate, index_to_bitstring, n_qubits_of

PARTS = ("re", "im")
_OVERLAP_KEY = 2**31 - 1  # job key for identity/overlap circuits


@dataclass(frozen=True)
class MeasurementRecord:
    """Joint outcome distribution of one Hadamard-test configuration.

    ``probabilities[idx]`` uses system qubit ``k`` as bit ``2**k`` and the
    ancilla (when present) as bit ``2**n_system``.
    """

    mode: str
    shots: int
    seed: int | None
    probabilities: np.ndarray
    n_system: int
    has_ancilla: bool = True
    counts: np.ndarray | None = None

    def bitstring(self, idx: int) -> str:
        sys_bits = index_to_bitstring(idx & ((1 << self.n_system) - 1), self.n_system)
        if self.has_ancilla:
            return str(idx >> self.n_system & 1) + sys_bits
        return sys_bits

    def as_dict(self) -> dict[str, float]:
        return {self.bitstring(i): float(p) for i, p in enumerate(self.probabilities) if p > 0}

    def ancilla_probability(self, value: int) -> float:
        if not self.has_ancilla:
            raise ValueError("record has no ancilla")
        half = 1 << self.n_system
        p = self.probabilities[half:] if value else self.probabilities[:half]
        return float(np.sum(p))

    def to_csv(self) -> str:
        """Rows ``bitstring,count,frequency``; counts are blank in analytic mode."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["bitstring", "count", "frequency"])
        for i, p in enumerate(self.probabilities):
            if p > 0:
                count = "" if self.counts is None else int(self.counts[i])
                w.writerow([self.bitstring(i), count, repr(float(p))])
        return buf.getvalue()


def record_from_distribution(probabilities: np.ndarray, n_system: int, has_ancilla: bool = True) -> MeasurementRecord:
    return MeasurementRecord("analytic", 0, None, np.asarray(probabilities, dtype=float), n_system, has_ancilla)


def derive_rng(seed: int | None, *key: int) -> np.random.Generator:
    """Independent stream per job key, reproducible from the master seed."""
    ss = np.random.SeedSequence(entropy=seed if seed is not None else 0, spawn_key=tuple(int(k) for k in key))
    return np.random.default_rng(ss)


def reference_circuit(terms: Sequence[tuple[complex, str]] | str) -> Circuit:
    """Preparation circuit for a basis state or a two-term equal-weight superposition.

    ``"1001"`` gives ``X_0 X_3``. ``[(a, "A"), (b, "B")]`` with ``|a| = |b|``
    gives ``(|A> + (b/a)|B>)/√2`` up to the global phase of ``a``, which is
    stored on the circuit so the prepared vector is exact.
    """
    if isinstance(terms, str):
        terms = [(1.0, terms)]
    terms = [(complex(a), b.strip().strip("|>")) for a, b in terms]
    n = len(terms[0][1])
    circ = Circuit(n)
    if len(terms) == 1:
        (a, bits), = terms
        for q, c in enumerate(bits):
            if c == "1":
                circ.add("X", q)
        circ.phase = a / abs(a)
        return circ
    if len(terms) != 2:
        raise ValueError("circuit preparation supports one or two terms; use a statevector otherwise")
    (a, sa), (b, sb) = terms
    if abs(abs(a) - abs(b)) > 1e-12 * max(abs(a), abs(b)) or sa == sb or len(sb) != n:
        raise ValueError("two-term preparation needs distinct bitstrings with equal-magnitude amplitudes")
    diff = [q for q in range(n) if sa[q] != sb[q]]
    q0 = diff[0]
    for q, c in enumerate(sa):
        if c == "1" and q != q0:
            circ.add("X", q)
    circ.add("H", q0)
    rel = np.angle(b / a)
    b_on_one = sb[q0] == "1"
    if abs(rel) > 1e-15:
        if not b_on_one:
            circ.add("X", q0)
        circ.add("P", q0, angle=float(rel))
        if not b_on_one:
            circ.add("X", q0)
    for p in diff[1:]:
        if not b_on_one:
            circ.add("X", q0)
        circ.add("X", p, q0)
        if not b_on_one:
            circ.add("X", q0)
    circ.phase = a / abs(a)
    return circ


def _as_state(prep: Circuit | np.ndarray) -> np.ndarray:
    if isinstance(prep, Circuit):
        state = np.zeros(1 << prep.n_qubits, dtype=complex)
        state[0] = 1.0
        return prep.apply(state)
    return np.asarray(prep, dtype=complex)


def _check_part(part: str) -> str:
    part = part.lower()
    if part not in PARTS:
        raise ValueError(f"part must be 're' or 'im', got {part!r}")
    return part


def hadamard_test_state(psi_i: np.ndarray, psi_j: np.ndarray, part: str = "re") -> np.ndarray:
    """Joint (system + ancilla) state just before measurement, built from the two branches."""
    part = _check_part(part)
    if psi_i.shape != psi_j.shape:
        raise ValueError("states have different dimensions")
    phase_one = 1.0 if part == "re" else -1j
    zero = 0.5 * (psi_i + phase_one * psi_j)
    one = 0.5 * (psi_i - phase_one * psi_j)
    return np.concatenate([zero, one])


def hadamard_test_circuit(
    prep_i: Circuit, prep_j: Circuit, part: str = "re", pauli: str | None = None
) -> Circuit:
    """Explicit circuit: ancilla prep, ``U_i``, controlled ``U_j = V_j V_i†``, final ``H``.

    With ``pauli`` given, basis-change gates for its X/Y letters follow on the
    system qubits so a computational-basis measurement reads its parity.
    """
    part = _check_part(part)
    if prep_i.n_qubits != prep_j.n_qubits:
        raise ValueError("preparations act on different qubit counts")
    n = prep_i.n_qubits
    anc = n
    circ = Circuit(n + 1)
    circ.add("H", anc)
    if part == "im":
        circ.add("SDG", anc)
    for g in prep_i.gates:
        circ.gates.append(g)
    circ.phase = prep_i.phase
    u_j = Circuit(n)
    u_j.extend(prep_i.inverse())
    u_j.extend(prep_j)
    circ.gates.extend(u_j.controlled(anc, n + 1).gates)
    circ.add("H", anc)
    if pauli is not None:
        if len(pauli) != n:
            raise ValueError("Pauli word length does not match the system")
        for q, c in enumerate(pauli):
            if c == "X":
                circ.add("H", q)
            elif c == "Y":
                circ.add("SDG", q).add("H", q)
    return circ


def rotate_to_z_basis(state: np.ndarray, word: str) -> np.ndarray:
    """Apply ``H`` (X letters) or ``S†`` then ``H`` (Y letters) on the system qubits."""
    for q, c in enumerate(word):
        if c == "X":
            state = apply_gate(state, "H", q)
        elif c == "Y":
            state = apply_gate(apply_gate(state, "SDG", q), "H", q)
    return state


def measure(
    joint: np.ndarray, n_system: int, mode: str = "analytic", shots: int = 0, rng: np.random.Generator | None = None,
    seed: int | None = None,
) -> MeasurementRecord:
    probs = np.abs(joint) ** 2
    probs = probs / probs.sum()
    if mode == "analytic":
        return MeasurementRecord("analytic", 0, seed, probs, n_system)
    if mode != "shots":
        raise ValueError(f"mode must be 'analytic' or 'shots', got {mode!r}")
    if shots <= 0:
        raise ValueError("shot mode needs shots > 0")
    rng = rng or np.random.default_rng(seed)
    counts = rng.multinomial(shots, probs)
    return MeasurementRecord("shots", shots, seed, counts / shots, n_system, counts=counts)


def overlap_estimate(
    prep_i: Circuit | np.ndarray,
    prep_j: Circuit | np.ndarray,
    part: str = "re",
    mode: str = "analytic",
    shots: int = 0,
    seed: int | None = None,
    rng: np.random.Generator | None = None,
) -> float:
    """Estimate ``Re`` or ``Im`` of ``<ψ_i|ψ_j>`` from the ancilla alone.

    Analytic mode returns ``P(0) - P(1)`` exactly; shot mode draws the
    number of ancilla-0 outcomes from ``Binomial(shots, P(0))``.
    """
    psi_i, psi_j = _as_state(prep_i), _as_state(prep_j)
    joint = hadamard_test_state(psi_i, psi_j, part)
    half = psi_i.shape[0]
    s0 = float(np.sum(np.abs(joint[:half]) ** 2))
    s1 = float(np.sum(np.abs(joint[half:]) ** 2))
    p0 = s0 / (s0 + s1)
    if mode == "analytic":
        return p0 - (1.0 - p0)
    if mode != "shots":
        raise ValueError(f"mode must be 'analytic' or 'shots', got {mode!r}")
    if shots <= 0:
        raise ValueError("shot mode needs shots > 0")
    rng = rng or np.random.default_rng(seed)
    n0 = rng.binomial(shots, p0)
    return (2 * n0 - shots) / shots


def pauli_record(
    prep_i: Circuit | np.ndarray,
    prep_j: Circuit | np.ndarray,
    word: str,
    part: str = "re",
    mode: str = "analytic",
    shots: int = 0,
    seed: int | None = None,
    rng: np.random.Generator | None = None,
) -> MeasurementRecord:
    psi_i, psi_j = _as_state(prep_i), _as_state(prep_j)
    n = n_qubits_of(psi_i)
    if len(word) != n:
        raise ValueError(f"Pauli word of length {len(word)} on a {n}-qubit system")
    joint = hadamard_test_state(rotate_to_z_basis(psi_i, word), rotate_to_z_basis(psi_j, word), part)
    return measure(joint, n, mode, shots, rng, seed)


def expectation_from_counts(record: MeasurementRecord, word: str | PauliString, condition: int | None = None) -> float:
    """``sum_bits P(bits) * (±1 parity of the word's support on the system bits)``.

    With ``condition`` set, only outcomes whose ancilla equals it contribute;
    the sum is the joint (not renormalised) one, so the ancilla-0 and
    ancilla-1 sums differ by exactly the requested matrix element part.
    """
    if isinstance(word, PauliString):
        word = word.word
    probs = record.probabilities
    if probs.size == 0 or not np.any(probs):
        raise ValueError("empty measurement record")
    if len(word) != record.n_system:
        raise ValueError("word length does not match the record")
    _, z, _ = word_masks(word)
    support = 0
    for q, c in enumerate(word):
        if c != "I":
            support |= 1 << q
    idx = np.arange(probs.shape[0])
    sign = _parity_sign(idx & support)
    if condition is not None:
        if not record.has_ancilla:
            raise ValueError("record has no ancilla to condition on")
        mask = (idx >> record.n_system & 1) == condition
        return float(np.sum(probs[mask] * sign[mask]))
    return float(np.sum(probs * sign))


def pauli_matrix_element_estimate(
    prep_i: Circuit | np.ndarray,
    prep_j: Circuit | np.ndarray,
    p: PauliString | str,
    part: str = "re",
    mode: str = "analytic",
    shots: int = 0,
    seed: int | None = None,
    rng: np.random.Generator | None = None,
) -> float:
    """``Re`` or ``Im`` of ``<ψ_i|P|ψ_j>`` for the bare word (coefficient ignored)."""
    word = p.word if isinstance(p, PauliString) else p
    rec = pauli_record(prep_i, prep_j, word, part, mode, shots, seed, rng)
    return expectation_from_counts(rec, word, 0) - expectation_from_counts(rec, word, 1)


def hamiltonian_matrix_element(
    prep_i: Circuit | np.ndarray,
    prep_j: Circuit | np.ndarray,
    op: QubitOperator,
    mode: str = "analytic",
    shots: int = 0,
    seed: int | None = None,
    key: Sequence[int] = (),
) -> complex:
    """``sum_m c_m (Re + i Im)<ψ_i|P_m|ψ_j>``, one Hadamard test per term and part.

    In shot mode every (term, part) gets ``shots`` shots and its own RNG
    stream derived from ``seed`` and ``key``.
    """
    psi_i, psi_j = _as_state(prep_i), _as_state(prep_j)
    total = 0j
    for m, p in enumerate(op):
        val = 0j
        for pi, part in enumerate(PARTS):
            rng = derive_rng(seed, *key, m, pi) if mode == "shots" else None
            if all(c == "I" for c in p.word):
                est = overlap_estimate(psi_i, psi_j, part, mode, shots, rng=rng)
            else:
                est = pauli_matrix_element_estimate(psi_i, psi_j, p.word, part, mode, shots, rng=rng)
            val += est if part == "re" else 1j * est
        total += p.coeff * val
    return total


def complex_overlap(
    prep_i: Circuit | np.ndarray,
    prep_j: Circuit | np.ndarray,
    mode: str = "analytic",
    shots: int = 0,
    seed: int | None = None,
    key: Sequence[int] = (),
) -> complex:
    """``Re + i Im`` of ``<ψ_i|ψ_j>`` from two overlap circuits."""
    psi_i, psi_j = _as_state(prep_i), _as_state(prep_j)
    out = 0j
    for pi, part in enumerate(PARTS):
        rng = derive_rng(seed, *key, _OVERLAP_KEY, pi) if mode == "shots" else None
        est = overlap_estimate(psi_i, psi_j, part, mode, shots, rng=rng)
        out += est if part == "re" else 1j * est
    return out
