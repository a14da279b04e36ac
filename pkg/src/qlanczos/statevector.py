"""Dense statevector simulation.

States are plain complex numpy arrays of length ``2**n``; qubit ``k`` is the
``2**k`` bit of the amplitude index. Gate and Pauli routines also accept 2-D
arrays of shape ``(2**n, m)`` and act on every column, which is how circuit
unitaries are assembled.
"""

from __future__ import annotations

import csv
import io
from typing import Sequence

import numpy as np

from .linalg import EigDecomposition, check_hermitian, hermitian_eig
from .pauli import PauliString, QubitOperator, word_masks, _parity_sign

NORM_TOL = 1e-10
_SQRT2 = np.sqrt(2.0)

FIXED_GATES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
    "H": np.array([[1, 1], [1, -1]], dtype=complex) / _SQRT2,
    "S": np.array([[1, 0], [0, 1j]], dtype=complex),
    "SDG": np.array([[1, 0], [0, -1j]], dtype=complex),
}
ROTATION_GATES = ("RX", "RY", "RZ", "P")


def gate_matrix(kind: str, angle: float | None = None) -> np.ndarray:
    """2x2 matrix of a named gate.

    ``RZ(θ) = exp(-iθZ/2) = diag(e^{-iθ/2}, e^{iθ/2})``; ``RX``/``RY`` are the
    analogous rotations and ``P(φ) = diag(1, e^{iφ})``.
    """
    kind = kind.upper()
    if kind in FIXED_GATES:
        return FIXED_GATES[kind]
    if kind not in ROTATION_GATES:
        raise ValueError(f"unknown gate {kind!r}")
    if angle is None or not np.isfinite(angle):
        raise ValueError(f"gate {kind} needs a finite angle")
    c, s = np.cos(angle / 2), np.sin(angle / 2)
    if kind == "RX":
        return np.array([[c, -1j * s], [-1j * s, c]])
    if kind == "RY":
        return np.array([[c, -s], [s, c]], dtype=complex)
    if kind == "RZ":
        return np.array([[np.exp(-0.5j * angle), 0], [0, np.exp(0.5j * angle)]])
    return np.array([[1, 0], [0, np.exp(1j * angle)]])


def n_qubits_of(state: np.ndarray) -> int:
    dim = state.shape[0]
    n = dim.bit_length() - 1
    if dim < 1 or 1 << n != dim:
        raise ValueError(f"state length {dim} is not a power of two")
    return n


def bitstring_to_index(bits: str) -> int:
    bits = bits.strip().strip("|>").strip("⟩")
    if set(bits) - {"0", "1"}:
        raise ValueError(f"not a bitstring: {bits!r}")
    return sum(1 << k for k, c in enumerate(bits) if c == "1")


def index_to_bitstring(index: int, n_qubits: int) -> str:
    return "".join("1" if index >> k & 1 else "0" for k in range(n_qubits))


def prepare_product_state(bits: str) -> np.ndarray:
    """Computational basis state, e.g. ``"1001"`` = ``X_0 X_3 |0000>``."""
    bits = bits.strip().strip("|>").strip("⟩")
    state = np.zeros(1 << len(bits), dtype=complex)
    state[bitstring_to_index(bits)] = 1.0
    return state


def prepare_superposition(terms: Sequence[tuple[complex, str]]) -> np.ndarray:
    """Normalised ``sum_t amp_t |bits_t>``."""
    if not terms:
        raise ValueError("empty superposition")
    n = len(terms[0][1].strip().strip("|>"))
    state = np.zeros(1 << n, dtype=complex)
    for amp, bits in terms:
        bits = bits.strip().strip("|>").strip("⟩")
        if len(bits) != n:
            raise ValueError("bitstrings of different lengths")
        state[bitstring_to_index(bits)] += amp
    norm = np.linalg.norm(state)
    if norm == 0:
        raise ValueError("superposition has zero norm")
    return state / norm


def _check_qubit(q: int, n: int):
    if not 0 <= q < n:
        raise IndexError(f"qubit {q} out of range for {n} qubits")


def apply_matrix(
    state: np.ndarray, matrix: np.ndarray, target: int, controls: Sequence[int] = ()
) -> np.ndarray:
    """Apply a 2x2 ``matrix`` to ``target``, conditioned on all ``controls`` being 1."""
    n = n_qubits_of(state)
    _check_qubit(target, n)
    for c in controls:
        _check_qubit(c, n)
        if c == target:
            raise ValueError("control and target coincide")
    idx = np.arange(1 << n)
    sel = (idx >> target & 1) == 0
    for c in controls:
        sel &= (idx >> c & 1) == 1
    i0 = idx[sel]
    i1 = i0 | (1 << target)
    out = np.array(state, dtype=complex, copy=True)
    a0, a1 = state[i0], state[i1]
    out[i0] = matrix[0, 0] * a0 + matrix[0, 1] * a1
    out[i1] = matrix[1, 0] * a0 + matrix[1, 1] * a1
    return out


def apply_gate(
    state: np.ndarray,
    gate: str,
    target: int,
    control: int | Sequence[int] | None = None,
    angle: float | None = None,
) -> np.ndarray:
    """Return the state after one (optionally controlled) gate.

    ``gate`` is one of ``I X Y Z H S SDG RX RY RZ P``; ``"CX"`` is accepted as
    ``X`` with a control.
    """
    kind = gate.upper()
    if kind in ("CX", "CNOT"):
        if control is None:
            raise ValueError("CX needs a control qubit")
        kind = "X"
    if kind in ("SDAG", "S†"):
        kind = "SDG"
    controls = () if control is None else ((control,) if isinstance(control, (int, np.integer)) else tuple(control))
    return apply_matrix(state, gate_matrix(kind, angle), target, controls)


def apply_pauli_string(state: np.ndarray, p: PauliString | str) -> np.ndarray:
    """``c·P|ψ>`` using bit masks, no dense matrix."""
    if isinstance(p, str):
        p = PauliString(p)
    n = n_qubits_of(state)
    if p.n_qubits != n:
        raise ValueError(f"{p.n_qubits}-qubit string on a {n}-qubit state")
    x, z, ny = word_masks(p.word)
    src = np.arange(1 << n) ^ x
    factor = p.coeff * (1j) ** ny * _parity_sign(src & z)
    if state.ndim == 2:
        factor = factor[:, None]
    return factor * state[src]


def apply_operator(state: np.ndarray, op: QubitOperator) -> np.ndarray:
    out = np.zeros_like(state, dtype=complex)
    for p in op:
        out += apply_pauli_string(state, p)
    return out


def inner_product(a: np.ndarray, b: np.ndarray) -> complex:
    """``<a|b>``, antilinear in the first argument."""
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch {a.shape} vs {b.shape}")
    return complex(np.vdot(a, b))


def expectation(state: np.ndarray, op: QubitOperator | np.ndarray) -> complex:
    if isinstance(op, QubitOperator):
        return inner_product(state, apply_operator(state, op))
    return inner_product(state, np.asarray(op) @ state)


def norm(state: np.ndarray) -> float:
    return float(np.linalg.norm(state))


class SpectralPropagator:
    """Exact real/imaginary-time propagation from a cached eigendecomposition."""

    def __init__(self, hamiltonian: QubitOperator | np.ndarray | EigDecomposition):
        if isinstance(hamiltonian, EigDecomposition):
            self.eig = hamiltonian
        else:
            h = hamiltonian.to_dense() if isinstance(hamiltonian, QubitOperator) else check_hermitian(hamiltonian)
            self.eig = hermitian_eig(h)

    @property
    def dim(self) -> int:
        return self.eig.eigenvectors.shape[0]

    def evolve(self, state: np.ndarray, t: float, mode: str = "real") -> np.ndarray:
        w, v = self.eig
        if state.shape[0] != v.shape[0]:
            raise ValueError(f"state dimension {state.shape[0]} != Hamiltonian dimension {v.shape[0]}")
        coeffs = v.conj().T @ state
        if mode == "real":
            return v @ (np.exp(-1j * t * w) * coeffs)
        if mode == "imaginary":
            # shift by the lowest eigenvalue so large tau does not overflow; renormalised anyway
            out = v @ (np.exp(-t * (w - w[0])) * coeffs)
            nrm = np.linalg.norm(out)
            if nrm == 0:
                raise ValueError("imaginary-time evolution annihilated the state")
            return out / nrm
        raise ValueError(f"unknown evolution mode {mode!r}")

    def unitary(self, t: float) -> np.ndarray:
        w, v = self.eig
        return (v * np.exp(-1j * t * w)) @ v.conj().T


def exact_evolve(
    state: np.ndarray,
    hamiltonian: QubitOperator | np.ndarray | SpectralPropagator,
    t: float,
    mode: str = "real",
) -> np.ndarray:
    """``e^{-itH}|ψ>`` (real) or normalised ``e^{-tH}|ψ>`` (imaginary)."""
    prop = hamiltonian if isinstance(hamiltonian, SpectralPropagator) else SpectralPropagator(hamiltonian)
    return prop.evolve(state, t, mode)


def pauli_exponential(state: np.ndarray, word: str, theta: float) -> np.ndarray:
    """``exp(-iθP)|ψ> = cos θ |ψ> - i sin θ P|ψ>`` for a real angle."""
    if weight_is_identity(word):
        return np.exp(-1j * theta) * state
    return np.cos(theta) * state - 1j * np.sin(theta) * apply_pauli_string(state, word)


def weight_is_identity(word: str) -> bool:
    return all(c == "I" for c in word)


def trotter_evolve(state: np.ndarray, op: QubitOperator, dt: float, k: int = 1, trotter_n: int = 1) -> np.ndarray:
    """First-order Trotter product ``(prod_m exp(-i c_m P_m dt k / N))^N |ψ>``.

    Terms are applied in canonical word order; the first term in that order
    acts on the state first.
    """
    if trotter_n < 1:
        raise ValueError("Trotter number must be >= 1")
    terms = op.real_terms()
    tau = dt * k / trotter_n
    out = np.array(state, dtype=complex, copy=True)
    if tau == 0:
        return out
    for _ in range(trotter_n):
        for word, c in terms:
            out = pauli_exponential(out, word, c * tau)
    return out


def probabilities(state: np.ndarray) -> np.ndarray:
    return np.abs(state) ** 2


def dump_state_csv(state: np.ndarray, tol: float = 0.0) -> str:
    """CSV rows ``index,bitstring,re,im`` (index uses qubit k as bit 2**k)."""
    n = n_qubits_of(state)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["index", "bitstring", "re", "im"])
    for i, a in enumerate(state):
        if abs(a) > tol or (tol == 0.0):
            w.writerow([i, index_to_bitstring(i, n), repr(float(a.real)), repr(float(a.imag))])
    return buf.getvalue()
