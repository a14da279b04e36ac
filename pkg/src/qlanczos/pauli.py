"""Pauli strings, qubit operators and the Jordan-Wigner mapping.

A word like ``"XIZY"`` places letter ``k`` on qubit ``k`` (qubit 0 leftmost,
matching the occupation-bitstring rendering). In dense form qubit ``k`` is
the ``2**k`` bit of the row/column index.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, TextIO

import numpy as np

from .fermion_hamiltonian import InteractionData

DROP_THRESHOLD = 1e-12
DENSE_QUBIT_CAP = 14
LETTERS = "IXYZ"

# (a, b) -> (phase, c) with a·b = phase·c
_PRODUCT = {
    ("I", "I"): (1, "I"), ("I", "X"): (1, "X"), ("I", "Y"): (1, "Y"), ("I", "Z"): (1, "Z"),
    ("X", "I"): (1, "X"), ("X", "X"): (1, "I"), ("X", "Y"): (1j, "Z"), ("X", "Z"): (-1j, "Y"),
    ("Y", "I"): (1, "Y"), ("Y", "X"): (-1j, "Z"), ("Y", "Y"): (1, "I"), ("Y", "Z"): (1j, "X"),
    ("Z", "I"): (1, "Z"), ("Z", "X"): (1j, "Y"), ("Z", "Y"): (-1j, "X"), ("Z", "Z"): (1, "I"),
}


class OperatorParseError(ValueError):
    """Malformed operator text."""


def _check_word(word: str) -> str:
    if set(word) - set(LETTERS):
        raise ValueError(f"invalid Pauli word {word!r}")
    return word


def word_masks(word: str) -> tuple[int, int, int]:
    """``(x_mask, z_mask, n_y)`` such that ``P|b> = i**n_y (-1)**|b & z| |b ^ x>``."""
    x = z = ny = 0
    for k, c in enumerate(word):
        if c == "X":
            x |= 1 << k
        elif c == "Y":
            x |= 1 << k
            z |= 1 << k
            ny += 1
        elif c == "Z":
            z |= 1 << k
    return x, z, ny


def multiply_words(a: str, b: str) -> tuple[complex, str]:
    if len(a) != len(b):
        raise ValueError(f"word length mismatch: {len(a)} vs {len(b)}")
    phase: complex = 1
    out = []
    for p, q in zip(a, b):
        ph, r = _PRODUCT[(p, q)]
        phase *= ph
        out.append(r)
    return phase, "".join(out)


def weight(word: str) -> int:
    return sum(1 for c in word if c != "I")


@dataclass(frozen=True)
class PauliString:
    word: str
    coeff: complex = 1.0

    def __post_init__(self):
        _check_word(self.word)

    @property
    def n_qubits(self) -> int:
        return len(self.word)

    @property
    def weight(self) -> int:
        return weight(self.word)

    def __str__(self) -> str:
        return f"({self.coeff:.6g}) {self.word}"


class QubitOperator:
    """Weighted sum of Pauli words on a fixed number of qubits.

    Like words are merged on construction and arithmetic; tiny coefficients
    are only removed by :meth:`simplify`. Iteration yields terms in canonical
    order, lexicographic in the word with ``I < X < Y < Z``.
    """

    __slots__ = ("n_qubits", "terms")

    def __init__(self, n_qubits: int, terms: Mapping[str, complex] | Iterable[tuple[str, complex]] = ()):
        self.n_qubits = int(n_qubits)
        self.terms: dict[str, complex] = {}
        items = terms.items() if isinstance(terms, Mapping) else terms
        for word, c in items:
            if len(_check_word(word)) != self.n_qubits:
                raise ValueError(f"word {word!r} does not have {self.n_qubits} letters")
            self.terms[word] = self.terms.get(word, 0) + complex(c)

    @classmethod
    def identity(cls, n_qubits: int, coeff: complex = 1.0) -> "QubitOperator":
        return cls(n_qubits, {"I" * n_qubits: coeff})

    @classmethod
    def from_pauli(cls, p: PauliString) -> "QubitOperator":
        return cls(p.n_qubits, {p.word: p.coeff})

    @classmethod
    def single(cls, n_qubits: int, letters: Mapping[int, str], coeff: complex = 1.0) -> "QubitOperator":
        """Operator with one term, e.g. ``single(4, {0: "Z", 2: "Z"})``."""
        word = ["I"] * n_qubits
        for q, c in letters.items():
            word[q] = c
        return cls(n_qubits, {"".join(word): coeff})

    def __len__(self) -> int:
        return len(self.terms)

    def __iter__(self) -> Iterator[PauliString]:
        for word in sorted(self.terms):
            yield PauliString(word, self.terms[word])

    def __repr__(self) -> str:
        body = " + ".join(f"({c:.6g}){w}" for w, c in sorted(self.terms.items()))
        return f"QubitOperator({self.n_qubits}, {body or '0'})"

    def _check_other(self, other: "QubitOperator"):
        if other.n_qubits != self.n_qubits:
            raise ValueError(f"qubit count mismatch: {self.n_qubits} vs {other.n_qubits}")

    def __add__(self, other):
        if isinstance(other, QubitOperator):
            self._check_other(other)
            out = QubitOperator(self.n_qubits, self.terms)
            for w, c in other.terms.items():
                out.terms[w] = out.terms.get(w, 0) + c
            return out
        if isinstance(other, (int, float, complex)):
            return self + QubitOperator.identity(self.n_qubits, other)
        return NotImplemented

    __radd__ = __add__

    def __neg__(self):
        return self * -1

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, QubitOperator):
            self._check_other(other)
            out: dict[str, complex] = {}
            for wa, ca in self.terms.items():
                for wb, cb in other.terms.items():
                    ph, w = multiply_words(wa, wb)
                    out[w] = out.get(w, 0) + ph * ca * cb
            return QubitOperator(self.n_qubits, out)
        if isinstance(other, (int, float, complex, np.number)):
            return QubitOperator(self.n_qubits, {w: c * other for w, c in self.terms.items()})
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (int, float, complex, np.number)):
            return self * other
        return NotImplemented

    def adjoint(self) -> "QubitOperator":
        return QubitOperator(self.n_qubits, {w: c.conjugate() for w, c in self.terms.items()})

    def simplify(self, threshold: float = DROP_THRESHOLD) -> "QubitOperator":
        return QubitOperator(
            self.n_qubits, {w: c for w, c in sorted(self.terms.items()) if abs(c) >= threshold}
        )

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        return all(abs(c.imag) <= tol for c in self.simplify(tol).terms.values())

    def real_terms(self, tol: float = 1e-12) -> list[tuple[str, float]]:
        """Canonically ordered ``(word, real coefficient)`` pairs; raises on complex ones."""
        out = []
        for p in self:
            if abs(p.coeff.imag) > tol:
                raise ValueError(f"term {p.word} has complex coefficient {p.coeff}; operator is not Hermitian")
            out.append((p.word, p.coeff.real))
        return out

    def allclose(self, other: "QubitOperator", atol: float = 1e-12) -> bool:
        self._check_other(other)
        words = set(self.terms) | set(other.terms)
        return all(abs(self.terms.get(w, 0) - other.terms.get(w, 0)) <= atol for w in words)

    def to_dense(self, cap: int = DENSE_QUBIT_CAP) -> np.ndarray:
        return to_dense(self, cap)

    def to_sparse(self):
        import scipy.sparse as sp

        dim = 1 << self.n_qubits
        b = np.arange(dim)
        rows, cols, vals = [], [], []
        for word, c in self.terms.items():
            x, z, ny = word_masks(word)
            rows.append(b ^ x)
            cols.append(b)
            vals.append(c * (1j) ** ny * _parity_sign(b & z))
        if not rows:
            return sp.csr_matrix((dim, dim), dtype=complex)
        return sp.csr_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(dim, dim)
        )


def _parity_sign(v: np.ndarray) -> np.ndarray:
    return 1 - 2 * (np.bitwise_count(v) & 1).astype(np.int8)


def op_add(a: QubitOperator, b: QubitOperator) -> QubitOperator:
    return a + b


def op_multiply(a: QubitOperator, b: QubitOperator) -> QubitOperator:
    return a * b


def op_scale(a: QubitOperator, s: complex) -> QubitOperator:
    return a * s


def op_simplify(a: QubitOperator, threshold: float = DROP_THRESHOLD) -> QubitOperator:
    return a.simplify(threshold)


def to_dense(op: QubitOperator, cap: int = DENSE_QUBIT_CAP) -> np.ndarray:
    """Dense ``2**n x 2**n`` matrix of ``op``."""
    n = op.n_qubits
    if n > cap:
        raise ValueError(f"{n} qubits exceeds the dense cap of {cap}")
    dim = 1 << n
    b = np.arange(dim)
    m = np.zeros((dim, dim), dtype=complex)
    for word, c in op.terms.items():
        x, z, ny = word_masks(word)
        m[b ^ x, b] += c * (1j) ** ny * _parity_sign(b & z)
    return m


def _jw(index: int, n_qubits: int, sign: int, convention: str) -> QubitOperator:
    if not 0 <= index < n_qubits:
        raise IndexError(f"mode {index} out of range for {n_qubits} qubits")
    if convention == "negated_z":
        string_coeff = (-1) ** index  # product of (-Z_j), j < index
    elif convention == "standard":
        string_coeff = 1
    else:
        raise ValueError(f"unknown Jordan-Wigner convention {convention!r}")
    prefix = "Z" * index
    rest = "I" * (n_qubits - index - 1)
    return QubitOperator(
        n_qubits,
        {prefix + "X" + rest: 0.5 * string_coeff, prefix + "Y" + rest: 0.5j * sign * string_coeff},
    )


def jw_creation(index: int, n_qubits: int, convention: str = "negated_z") -> QubitOperator:
    """``a†_n -> 1/2 (prod_{j<n} -Z_j)(X_n - i Y_n)``.

    ``convention="standard"`` uses ``+Z_j`` in the string instead. The two
    differ by the mode sign ``(-1)**n``, which leaves the anticommutation
    relations and every spectrum unchanged.
    """
    return _jw(index, n_qubits, -1, convention)


def jw_annihilation(index: int, n_qubits: int, convention: str = "negated_z") -> QubitOperator:
    """``a_n -> 1/2 (prod_{j<n} -Z_j)(X_n + i Y_n)``."""
    return _jw(index, n_qubits, +1, convention)


def map_hamiltonian(
    data: InteractionData,
    n_qubits: int | None = None,
    convention: str = "negated_z",
    threshold: float = DROP_THRESHOLD,
) -> QubitOperator:
    """Jordan-Wigner image of the second-quantised Hamiltonian.

    Returns a simplified operator whose coefficients are real (the imaginary
    parts cancel between Hermitian partners and are dropped below
    ``threshold``).
    """
    n = data.n_states if n_qubits is None else n_qubits
    if data.n_states > n:
        raise ValueError(f"interaction uses {data.n_states} states but only {n} qubits")
    create = [jw_creation(k, n, convention) for k in range(n)]
    annihilate = [jw_annihilation(k, n, convention) for k in range(n)]

    total = QubitOperator.identity(n, data.core) if data.core else QubitOperator(n)
    for k, e in sorted(data.spe.items()):
        if e:
            total = total + (create[k] * annihilate[k]) * e
    pair_cache: dict[tuple[int, int], QubitOperator] = {}

    def pair(p, q, kind):
        key = (p, q) if kind == "c" else (-1 - p, -1 - q)
        if key not in pair_cache:
            pair_cache[key] = create[p] * create[q] if kind == "c" else annihilate[p] * annihilate[q]
        return pair_cache[key]

    for (i, j, k, l), v in sorted(data.tbme.items()):
        total = total + (pair(i, j, "c") * pair(l, k, "a")) * v
    out = total.simplify(threshold)
    for w, c in out.terms.items():
        if abs(c.imag) > 1e-10:
            raise ArithmeticError(f"mapped Hamiltonian term {w} has complex coefficient {c}")
    return QubitOperator(n, {w: complex(c.real) for w, c in out.terms.items()}).simplify(threshold)


def parse_operator(source: TextIO | str) -> QubitOperator:
    """Read ``<re> <im> <word>`` lines; ``#`` starts a comment."""
    text = source if isinstance(source, str) else source.read()
    terms: list[tuple[str, complex]] = []
    n = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 3:
            raise OperatorParseError(f"line {lineno}: expected '<re> <im> <word>', got {raw!r}")
        try:
            c = complex(float(parts[0]), float(parts[1]))
        except ValueError:
            raise OperatorParseError(f"line {lineno}: bad coefficient in {raw!r}") from None
        word = parts[2]
        if n is None:
            n = len(word)
        elif len(word) != n:
            raise OperatorParseError(f"line {lineno}: word length {len(word)} != {n}")
        try:
            _check_word(word)
        except ValueError as exc:
            raise OperatorParseError(f"line {lineno}: {exc}") from None
        terms.append((word, c))
    if n is None:
        raise OperatorParseError("operator file has no terms")
    return QubitOperator(n, terms)


def format_operator(op: QubitOperator) -> str:
    return "".join(f"{float(p.coeff.real)!r} {float(p.coeff.imag)!r} {p.word}\n" for p in op)


def one_norm(op: QubitOperator) -> float:
    """``sum |c_m|`` over non-identity terms."""
    return math.fsum(abs(c) for w, c in op.terms.items() if weight(w))
