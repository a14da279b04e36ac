"""Krylov subspace construction and the regularised generalised eigensolve.

Basis states are ``|Ψ_{a,k}> = U^k |Ψ_a>`` for references ``a = 0..R-1`` and
``k = 0..S``, with ``U = e^{-iΔtH}`` (real time) or ``e^{-ΔτH}``
(imaginary time). Everything is expressed through the moments

    ν_k(a, b) = <Ψ_a| U^k |Ψ_b>,    ε_k(a, b) = <Ψ_a| U^k H |Ψ_b>,

from which the overlap and Hamiltonian matrices are assembled:

    real time:       N[a,k; b,l] = ν_{l-k}(a, b)
    imaginary time:  N[a,k; b,l] = ν_{k+l}(a, b) / sqrt(ν_{2k}(a, a) ν_{2l}(b, b))

and ``H`` likewise with ε. Rows are ordered reference-major:
``row(a, k) = a (S + 1) + k``.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .circuits import Circuit, compile_trotter_step
from .hadamard import complex_overlap, hamiltonian_matrix_element
from .linalg import EigDecomposition, check_hermitian, hermitian_eig
from .pauli import QubitOperator
from .statevector import SpectralPropagator, apply_operator, trotter_evolve

MODES = ("real", "imaginary")
BACKENDS = ("eigenbasis_moments", "statevector_exact", "statevector_trotter", "measured")
DEFAULT_DELTA = 1e-8
DEGENERACY_TOL = 1e-6


class SubspaceCollapsed(RuntimeError):
    """Every overlap eigenvalue fell below the cutoff."""


@dataclass
class KrylovConfig:
    evolution: str = "real"
    backend: str = "eigenbasis_moments"
    dt: float = 0.1
    S: int = 8
    trotter_n: int = 1
    delta: float = DEFAULT_DELTA
    noise_eta: float = 0.0
    seed: int = 0
    shots: int = 0
    criterion: float = 0.05
    n_eigs: int = 5
    controlled_evolution: str = "trotter"

    def __post_init__(self):
        if self.evolution not in MODES:
            raise ValueError(f"evolution must be one of {MODES}")
        if self.backend not in BACKENDS:
            raise ValueError(f"backend must be one of {BACKENDS}")
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.S < 0 or self.trotter_n < 1:
            raise ValueError("need S >= 0 and trotter_n >= 1")
        if self.delta < 0 or self.noise_eta < 0 or self.shots < 0:
            raise ValueError("delta, noise_eta and shots must be non-negative")
        if self.controlled_evolution not in ("trotter", "exact"):
            raise ValueError("controlled_evolution must be 'trotter' or 'exact'")


@dataclass
class MomentTable:
    """ν and ε indexed ``[k - kmin, a, b]``.

    Real time covers ``k in [-S, S]``; imaginary time covers ``[0, 2S]``.
    For imaginary time the stored values are those of ``H - shift``'s
    propagator, ``ν_k e^{kΔτ shift}``; the shift cancels in assembly.
    """

    mode: str
    dt: float
    S: int
    nu: np.ndarray
    eps: np.ndarray
    shift: float = 0.0

    @property
    def R(self) -> int:
        return self.nu.shape[1]

    @property
    def kmin(self) -> int:
        return -self.S if self.mode == "real" else 0

    @property
    def kmax(self) -> int:
        return self.S if self.mode == "real" else 2 * self.S

    def krange(self) -> range:
        return range(self.kmin, self.kmax + 1)

    def nu_at(self, k: int, a: int | slice = slice(None), b: int | slice = slice(None)):
        return self.nu[k - self.kmin, a, b]

    def eps_at(self, k: int, a: int | slice = slice(None), b: int | slice = slice(None)):
        return self.eps[k - self.kmin, a, b]

    def truncated(self, S: int) -> "MomentTable":
        """Moments needed for a smaller iteration count."""
        if S > self.S:
            raise ValueError(f"table only covers S = {self.S}")
        if self.mode == "real":
            sl = slice(self.S - S, self.S + S + 1)
        else:
            sl = slice(0, 2 * S + 1)
        return MomentTable(self.mode, self.dt, S, self.nu[sl].copy(), self.eps[sl].copy(), self.shift)

    def copy(self) -> "MomentTable":
        return MomentTable(self.mode, self.dt, self.S, self.nu.copy(), self.eps.copy(), self.shift)


@dataclass
class KrylovMatrices:
    overlap: np.ndarray
    hamiltonian: np.ndarray
    R: int
    S: int

    @property
    def dimension(self) -> int:
        return self.overlap.shape[0]

    def row(self, a: int, k: int) -> int:
        return a * (self.S + 1) + k

    def index_map(self) -> dict[tuple[int, int], int]:
        return {(a, k): self.row(a, k) for a in range(self.R) for k in range(self.S + 1)}


@dataclass
class GenEigResult:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    retained_dim: int
    overlap_eigenvalues: np.ndarray


@dataclass
class TraceEntry:
    S: int
    retained_dim: int
    energies: np.ndarray
    wall_time: float


@dataclass
class ConvergenceTrace:
    entries: list[TraceEntry] = field(default_factory=list)
    converged: bool = False
    iterations: int | None = None
    e_exact: float | None = None
    e_ref: float | None = None
    criterion: float | None = None

    def to_csv(self, n_eigs: int | None = None, manifest: str | None = None) -> str:
        m = n_eigs or max((len(e.energies) for e in self.entries), default=0)
        head = "# qlanczos-trace v1"
        if manifest:
            head += f"; manifest={manifest}"
        lines = [head, ",".join(["S", "retained_dim"] + [f"E_{i}" for i in range(m)])]
        for e in self.entries:
            vals = [repr(float(x)) for x in e.energies[:m]] + [""] * max(0, m - len(e.energies))
            lines.append(",".join([str(e.S), str(e.retained_dim)] + vals))
        return "\n".join(lines) + "\n"

    def fraction_of_ec(self) -> float | None:
        """Final ``|E_0 - E_exact| / |E_c|``."""
        if not self.entries or self.e_exact is None or self.e_ref is None:
            return None
        ec = abs(self.e_exact - self.e_ref)
        err = abs(self.entries[-1].energies[0] - self.e_exact)
        return 0.0 if ec == 0 else err / ec


# --------------------------------------------------------------------------- moments


def _check_refs(refs: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    refs = np.atleast_2d(np.asarray(refs, dtype=complex))
    norms = np.linalg.norm(refs, axis=1)
    if np.any(np.abs(norms - 1) > tol):
        raise ValueError(f"reference states are not normalised (norms {norms})")
    return refs


def _symmetrise_negative(nu: np.ndarray, S: int) -> None:
    """Fill k < 0 from ``ν_{-k}(a, b) = ν_k(b, a)*`` in place."""
    for k in range(1, S + 1):
        nu[S - k] = nu[S + k].conj().T


def moments_from_spectrum(
    energies: np.ndarray,
    ref_coeffs: np.ndarray,
    dt: float,
    S: int,
    mode: str = "real",
    shift: float | None = None,
) -> MomentTable:
    """Closed-form moments from eigenvalues ``E_j`` and reference amplitudes.

    Parameters
    ----------
    energies : (J,) array
    ref_coeffs : (R, J) array
        ``ref_coeffs[a, j] = <j|Ψ_a>``; each row must be normalised.
    shift : float, optional
        Imaginary time only; defaults to ``min(E)`` to keep ``e^{-kΔτE}``
        finite. Pass ``0.0`` for the literal moments.
    """
    e = np.asarray(energies, dtype=float)
    c = _check_refs(ref_coeffs)
    if c.shape[1] != e.shape[0]:
        raise ValueError("reference coefficients do not match the spectrum size")
    if mode == "real":
        ks = np.arange(-S, S + 1)
        phases = np.exp(-1j * dt * np.outer(ks, e))
        shift = 0.0
    elif mode == "imaginary":
        ks = np.arange(0, 2 * S + 1)
        shift = float(e.min()) if shift is None else float(shift)
        phases = np.exp(-dt * np.outer(ks, e - shift))
    else:
        raise ValueError(f"unknown mode {mode!r}")
    # ν_k(a, b) = sum_j conj(c[a, j]) c[b, j] phase_k(j)
    nu = np.einsum("aj,kj,bj->kab", c.conj(), phases, c)
    eps = np.einsum("aj,kj,bj->kab", c.conj(), phases * e, c)
    return MomentTable(mode, dt, S, nu, eps, shift)


def _apply_h(h, v):
    if isinstance(h, QubitOperator):
        return apply_operator(v, h)
    return h @ v


def moments_from_statevector(
    hamiltonian: QubitOperator | np.ndarray,
    refs: Sequence[np.ndarray],
    dt: float,
    S: int,
    mode: str = "real",
    backend: str = "exact",
    trotter_n: int = 1,
    propagator: SpectralPropagator | None = None,
    shift: float | None = None,
) -> MomentTable:
    """Moments from explicitly evolved statevectors.

    Each reference ``|Ψ_b>`` and ``H|Ψ_b>`` are stepped forward ``S`` (real)
    or ``2S`` (imaginary) times and reused; ``ν_k(a, b)`` and ``ε_k(a, b)``
    are inner products with the unevolved ``<Ψ_a|``. ``backend="trotter"``
    uses one first-order Trotter step of ``dt`` with ``trotter_n`` slices as
    ``U`` (real time only).
    """
    refs = _check_refs(np.array(refs))
    R = refs.shape[0]
    if backend == "trotter":
        if mode != "real":
            raise ValueError("Trotterised evolution is defined for real time only")
        if not isinstance(hamiltonian, QubitOperator):
            raise TypeError("Trotter backend needs a QubitOperator")
        step = lambda v: trotter_evolve(v, hamiltonian, dt, 1, trotter_n)  # noqa: E731
        shift = 0.0
    elif backend == "exact":
        prop = propagator or SpectralPropagator(hamiltonian)
        w, vecs = prop.eig
        if mode == "real":
            shift = 0.0
            factor = np.exp(-1j * dt * w)
        else:
            shift = float(w[0]) if shift is None else float(shift)
            factor = np.exp(-dt * (w - shift))
        step = lambda v: vecs @ (factor * (vecs.conj().T @ v))  # noqa: E731
    else:
        raise ValueError(f"unknown statevector backend {backend!r}")

    kmax = S if mode == "real" else 2 * S
    offset = S if mode == "real" else 0
    nu = np.zeros((kmax + offset + 1, R, R), dtype=complex)
    eps = np.zeros_like(nu)
    bras = refs.conj()
    for b in range(R):
        psi = refs[b].copy()
        hpsi = _apply_h(hamiltonian, refs[b]) - shift * refs[b]
        for k in range(kmax + 1):
            if k:
                psi, hpsi = step(psi), step(hpsi)
            nu[offset + k, :, b] = bras @ psi
            eps[offset + k, :, b] = bras @ hpsi + shift * nu[offset + k, :, b]
    if mode == "real":
        _symmetrise_negative(nu, S)
        _symmetrise_negative(eps, S)
    return MomentTable(mode, dt, S, nu, eps, shift)


def moments_measured(
    hamiltonian: QubitOperator,
    ref_preps: Sequence[Circuit | np.ndarray],
    dt: float,
    S: int,
    trotter_n: int = 1,
    mode: str = "analytic",
    shots: int = 0,
    seed: int | None = 0,
    controlled_evolution: str = "trotter",
    propagator: SpectralPropagator | None = None,
) -> MomentTable:
    """Real-time moments assembled entirely from simulated Hadamard tests.

    ``ν_k(a, b)`` compares ``|Ψ_a>`` with ``U^k|Ψ_b>``; ``ε_k(a, b)`` compares
    ``U^{-k}|Ψ_a>`` with ``|Ψ_b>`` through every Pauli term of ``H``.

    ``controlled_evolution="trotter"`` (default) uses the compiled Trotter
    step circuit as ``U``, so analytic mode reproduces the Trotter
    statevector backend. ``"exact"`` substitutes the exact propagator for
    the evolution block; the estimation path is unchanged. Raw statevectors
    are accepted as references in analytic mode only.
    """
    if controlled_evolution == "trotter":
        step_c = compile_trotter_step(hamiltonian, dt, 1, trotter_n)
        back_c = step_c.inverse()
        step, back = step_c.apply, back_c.apply
    elif controlled_evolution == "exact":
        prop = propagator or SpectralPropagator(hamiltonian)
        step = lambda v: prop.evolve(v, dt)  # noqa: E731
        back = lambda v: prop.evolve(v, -dt)  # noqa: E731
    else:
        raise ValueError(f"unknown controlled evolution {controlled_evolution!r}")
    R = len(ref_preps)
    dim = 1 << hamiltonian.n_qubits
    zero = np.zeros(dim, dtype=complex)
    zero[0] = 1.0

    forward = []
    backward = []
    for prep in ref_preps:
        if isinstance(prep, Circuit):
            if prep.n_qubits != hamiltonian.n_qubits:
                raise ValueError("reference circuit and Hamiltonian act on different qubit counts")
            base = prep.apply(zero)
        else:
            if mode != "analytic":
                raise ValueError("shot sampling needs references given as preparation circuits")
            base = _check_refs(prep)[0]
            if base.shape[0] != dim:
                raise ValueError("reference state and Hamiltonian dimensions differ")
        f, g = [base], [base]
        for _ in range(S):
            f.append(step(f[-1]))
            g.append(back(g[-1]))
        forward.append(f)
        backward.append(g)

    nu = np.zeros((2 * S + 1, R, R), dtype=complex)
    eps = np.zeros_like(nu)
    for a in range(R):
        for b in range(R):
            for k in range(S + 1):
                key = (a, b, k)
                nu[S + k, a, b] = complex_overlap(forward[a][0], forward[b][k], mode, shots, seed, key=(0, *key))
                eps[S + k, a, b] = hamiltonian_matrix_element(
                    backward[a][k], forward[b][0], hamiltonian, mode, shots, seed, key=(1, *key)
                )
    # k = 0 blocks are Hermitian by construction; shot noise is not
    for arr in (nu, eps):
        arr[S] = 0.5 * (arr[S] + arr[S].conj().T)
    _symmetrise_negative(nu, S)
    _symmetrise_negative(eps, S)
    return MomentTable("real", dt, S, nu, eps, 0.0)


def inject_noise(table: MomentTable, eta: float, seed: int | None = 0) -> MomentTable:
    """Multiply each measured moment by ``1 ± u`` with ``u ~ U[0, eta]``.

    Sign and magnitude are drawn independently per entry. Entries fixed by
    symmetry are regenerated from their partner so ``N`` and ``H`` stay
    Hermitian; ``ν_0(a, a) = 1`` is a norm, not a measurement, and is kept.
    """
    if eta < 0:
        raise ValueError("eta must be non-negative")
    out = table.copy()
    if eta == 0:
        return out
    rng = np.random.default_rng(seed)
    R = table.R

    def factors(shape):
        u = rng.uniform(0.0, eta, size=shape)
        sign = rng.choice([-1.0, 1.0], size=shape)
        return 1.0 + sign * u

    if table.mode == "real":
        S = table.S
        pos = slice(S + 1, 2 * S + 1)
        out.nu[pos] *= factors(out.nu[pos].shape)
        out.eps[pos] *= factors(out.eps[pos].shape)
        iu = np.triu_indices(R, 1)
        out.nu[S][iu] *= factors(len(iu[0]))
        di = np.diag_indices(R)
        out.eps[S][di] *= factors(R)
        out.eps[S][iu] *= factors(len(iu[0]))
        for arr in (out.nu, out.eps):
            arr[S][(iu[1], iu[0])] = arr[S][iu].conj()
            _symmetrise_negative(arr, S)
    else:
        # entries with a > b mirror a < b; ν_0(a, a) kept
        for arr in (out.nu, out.eps):
            f = factors(arr.shape)
            for k in range(arr.shape[0]):
                f[k] = np.triu(f[k]) + np.triu(f[k], 1).T
            if arr is out.nu:
                f[0][np.diag_indices(R)] = 1.0
            arr *= f
    return out


# --------------------------------------------------------------------------- assembly & solve


def assemble_krylov(table: MomentTable, S: int | None = None) -> KrylovMatrices:
    """Overlap and Hamiltonian matrices of dimension ``R (S + 1)``."""
    S = table.S if S is None else S
    if S > table.S:
        raise ValueError(f"table covers S = {table.S}, requested {S}")
    R = table.R
    D = R * (S + 1)
    ks = np.arange(S + 1)
    if table.mode == "real":
        idx = ks[None, :] - ks[:, None]  # l - k
        nblk = table.nu[idx - table.kmin]  # (S+1, S+1, R, R) -> [k, l, a, b]
        eblk = table.eps[idx - table.kmin]
        nmat = nblk.transpose(2, 0, 3, 1).reshape(D, D)
        hmat = eblk.transpose(2, 0, 3, 1).reshape(D, D)
    else:
        idx = ks[None, :] + ks[:, None]
        diag = np.real(np.einsum("kaa->ka", table.nu[2 * ks]))  # ν_{2k}(a, a)
        if np.any(diag <= 0):
            raise ValueError("non-positive imaginary-time norm moment")
        norm = np.sqrt(diag)  # (S+1, R)
        nblk = table.nu[idx]
        eblk = table.eps[idx]
        denom = norm[:, None, :, None] * norm[None, :, None, :]  # [k, l, a, b]
        nmat = (nblk / denom).transpose(2, 0, 3, 1).reshape(D, D)
        hmat = (eblk / denom).transpose(2, 0, 3, 1).reshape(D, D)
    return KrylovMatrices(nmat, hmat, R, S)


def regularized_geneig(
    m: KrylovMatrices | tuple[np.ndarray, np.ndarray], delta: float = DEFAULT_DELTA
) -> GenEigResult:
    """Solve ``H c = E N c`` on the span of overlap eigenvectors above the cutoff.

    Overlap eigenpairs with ``v <= delta * max(v)`` are dropped; on the rest
    ``X = U_r v_r^{-1/2}`` orthonormalises the Krylov vectors and
    ``X^H H X`` is diagonalised. Returned eigenvectors are Krylov-basis
    coefficients ``c = X y``.
    """
    if isinstance(m, KrylovMatrices):
        n, h = m.overlap, m.hamiltonian
    else:
        n, h = m
    n = check_hermitian(n, 1e-8)
    h = check_hermitian(h, 1e-8)
    v, u = hermitian_eig(n, tol=1e-8)
    vmax = v.max() if v.size else 0.0
    keep = v > delta * vmax
    if vmax <= 0 or not np.any(keep):
        raise SubspaceCollapsed("subspace collapsed: no overlap eigenvalue above the cutoff")
    x = u[:, keep] / np.sqrt(v[keep])
    h_eff = x.conj().T @ h @ x
    e, y = hermitian_eig(0.5 * (h_eff + h_eff.conj().T), tol=1e-8)
    return GenEigResult(e, x @ y, int(keep.sum()), v)


def cluster_degenerate(eigenvalues: Sequence[float], tol: float = DEGENERACY_TOL) -> list[tuple[float, int]]:
    """Group sorted eigenvalues closer than ``tol`` into ``(mean, multiplicity)``."""
    out: list[list[float]] = []
    for e in sorted(eigenvalues):
        if out and abs(e - out[-1][-1]) <= tol:
            out[-1].append(e)
        else:
            out.append([e])
    return [(float(np.mean(g)), len(g)) for g in out]


def lowest_energies(table: MomentTable, S: int, delta: float, n_eigs: int = 1) -> tuple[np.ndarray, int]:
    res = regularized_geneig(assemble_krylov(table, S), delta)
    return res.eigenvalues[:n_eigs], res.retained_dim


def run_to_convergence(
    table: MomentTable,
    e_exact: float,
    e_ref: float,
    criterion: float = 0.05,
    delta: float = DEFAULT_DELTA,
    n_eigs: int = 1,
    S_max: int | None = None,
    stop_early: bool = True,
) -> ConvergenceTrace:
    """Grow ``S`` from 0 until ``|E_0(S) - E_exact| <= criterion |E_exact - E_ref|``.

    The trace records every ``S`` tried. ``converged`` is False (and
    ``iterations`` None) if ``S_max`` is reached first. A collapsed subspace
    at some ``S`` is recorded with ``retained_dim = 0`` and NaN energies.
    """
    S_max = table.S if S_max is None else min(S_max, table.S)
    trace = ConvergenceTrace(e_exact=e_exact, e_ref=e_ref, criterion=criterion)
    tol = criterion * abs(e_exact - e_ref)
    for S in range(S_max + 1):
        t0 = time.perf_counter()
        try:
            energies, kept = lowest_energies(table, S, delta, n_eigs)
        except SubspaceCollapsed:
            energies, kept = np.full(n_eigs, np.nan), 0
        trace.entries.append(TraceEntry(S, kept, energies, time.perf_counter() - t0))
        if kept and abs(energies[0] - e_exact) <= tol:
            if not trace.converged:
                trace.converged, trace.iterations = True, S
            if stop_early:
                break
    return trace


def iterations_to_converge(trace: ConvergenceTrace, S_max: int) -> int:
    """Iteration count, with non-converged runs censored at ``S_max + 1``."""
    return trace.iterations if trace.converged else S_max + 1


# --------------------------------------------------------------------------- references


@dataclass
class AnnealedReference:
    state: np.ndarray
    energy: float
    steps: int


def random_state(dim: int, seed: int | None, complex_valued: bool = False) -> np.ndarray:
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(dim)
    if complex_valued:
        v = v + 1j * rng.standard_normal(dim)
    v = v.astype(complex)
    return v / np.linalg.norm(v)


def reference_from_ite_anneal(
    hamiltonian: np.ndarray | QubitOperator | SpectralPropagator,
    target_energy: float,
    dtau: float = 0.01,
    seed: int | None = 0,
    max_steps: int = 100_000,
    tol: float = 1e-9,
    initial: np.ndarray | None = None,
) -> AnnealedReference:
    """Evolve a seeded random vector in imaginary time until ``<H> <= target + tol``."""
    prop = hamiltonian if isinstance(hamiltonian, SpectralPropagator) else SpectralPropagator(hamiltonian)
    w, v = prop.eig
    if target_energy < w[0] - tol:
        raise ValueError(f"target {target_energy} is below the ground energy {w[0]}")
    psi = random_state(prop.dim, seed) if initial is None else np.asarray(initial, dtype=complex)
    c = v.conj().T @ psi
    c = c / np.linalg.norm(c)
    damp = np.exp(-dtau * (w - w[0]))
    for steps in range(max_steps + 1):
        energy = float(np.real(np.vdot(c, w * c)))
        if energy <= target_energy + tol:
            return AnnealedReference(v @ c, energy, steps)
        c = damp * c
        c = c / np.linalg.norm(c)
    raise RuntimeError(f"imaginary-time anneal did not reach {target_energy} in {max_steps} steps")


# --------------------------------------------------------------------------- drivers


def build_moments(
    config: KrylovConfig,
    hamiltonian: QubitOperator | np.ndarray,
    references: Sequence[np.ndarray] | None = None,
    ref_preps: Sequence[Circuit] | None = None,
    eig: EigDecomposition | None = None,
    S: int | None = None,
) -> MomentTable:
    """Dispatch on ``config.backend`` and apply ``config.noise_eta``."""
    S = config.S if S is None else S
    if references is None and ref_preps is None:
        raise ValueError("need reference states or preparation circuits")
    if references is None:
        zero = None
        references = []
        for prep in ref_preps:
            if zero is None:
                zero = np.zeros(1 << prep.n_qubits, dtype=complex)
                zero[0] = 1.0
            references.append(prep.apply(zero))
    if config.backend == "eigenbasis_moments":
        if eig is None:
            h = hamiltonian.to_dense() if isinstance(hamiltonian, QubitOperator) else hamiltonian
            eig = hermitian_eig(h)
        coeffs = np.array([eig.eigenvectors.conj().T @ r for r in references])
        table = moments_from_spectrum(eig.eigenvalues, coeffs, config.dt, S, config.evolution)
    elif config.backend == "statevector_exact":
        prop = SpectralPropagator(eig) if eig is not None else None
        table = moments_from_statevector(
            hamiltonian, references, config.dt, S, config.evolution, "exact", propagator=prop
        )
    elif config.backend == "statevector_trotter":
        table = moments_from_statevector(
            hamiltonian, references, config.dt, S, config.evolution, "trotter", config.trotter_n
        )
    else:
        if config.evolution != "real":
            raise ValueError("the measured backend is real-time only")
        mode = "shots" if config.shots else "analytic"
        preps = list(ref_preps) if ref_preps is not None else list(references)
        prop = SpectralPropagator(eig) if eig is not None else None
        table = moments_measured(
            hamiltonian, preps, config.dt, S, config.trotter_n, mode, config.shots, config.seed,
            config.controlled_evolution, prop,
        )
    if config.noise_eta:
        table = inject_noise(table, config.noise_eta, config.seed)
    return table
