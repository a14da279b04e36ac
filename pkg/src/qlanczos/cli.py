"""Command-line front end.

Subcommands: ``basis``, ``map``, ``evolve``, ``qlanczos``, ``lanczos`` and
``noise-sweep``. Data goes to ``--out`` or stdout; diagnostics go to stderr.

Exit codes: 0 ok, 2 parse/input error, 3 inconsistent dimensions,
4 subspace collapse, 5 non-convergence (the trace is still written).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import platform
import sys
from contextlib import nullcontext
from dataclasses import dataclass, fields
from datetime import datetime, timezone
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .circuits import compile_trotter_step, estimate_gate_count_letter_rule, gate_count, ladder_gate_count
from .fermion_hamiltonian import InteractionParseError, parse_interaction_file
from .krylov import (
    ConvergenceTrace,
    KrylovConfig,
    SubspaceCollapsed,
    build_moments,
    cluster_degenerate,
    inject_noise,
    iterations_to_converge,
    run_to_convergence,
)
from .lanczos import classical_lanczos
from .linalg import EigDecomposition, hermitian_eig
from .pauli import DENSE_QUBIT_CAP, OperatorParseError, QubitOperator, format_operator, map_hamiltonian, parse_operator
from .references import ReferenceParseError, ReferenceState, parse_reference_file
from .shell_basis import ModelSpaceError, enumerate_mscheme_basis, enumerate_single_particle_states, parse_model_space
from .statevector import SpectralPropagator, dump_state_csv, expectation, prepare_product_state, trotter_evolve

EXIT_OK, EXIT_PARSE, EXIT_DIMENSION, EXIT_COLLAPSE, EXIT_NOT_CONVERGED = 0, 2, 3, 4, 5
TRACE_SCHEMA = "qlanczos-trace v1"
PARSE_ERRORS = (ModelSpaceError, InteractionParseError, OperatorParseError, ReferenceParseError)


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


# --------------------------------------------------------------------------- config


CONFIG_KEYS = {
    "operator", "model_space", "interaction", "convention", "references",
    "evolution", "backend", "dt", "S", "criterion", "delta", "eta", "seed", "shots",
    "trotter_N", "n_eigs", "e_ref", "controlled_evolution",
}


def parse_config(text: str) -> dict[str, str]:
    """Flat ``key = value`` lines; ``#`` starts a comment."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise CliError(f"config line {lineno}: expected key=value, got {raw!r}", EXIT_PARSE)
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in CONFIG_KEYS:
            raise CliError(f"config line {lineno}: unknown key {key!r}", EXIT_PARSE)
        out[key] = value
    return out


def load_config(path: str | None, overrides: Sequence[str]) -> tuple[dict[str, str], Path]:
    base = Path(".")
    cfg: dict[str, str] = {}
    if path:
        p = Path(path)
        cfg = parse_config(_read(p))
        base = p.parent
        for key in ("operator", "model_space", "interaction", "references"):
            if key in cfg and not Path(cfg[key]).is_absolute():
                cfg[key] = str(base / cfg[key])
    for item in overrides:
        cfg.update(parse_config(item))
    return cfg, base


def krylov_config(cfg: dict[str, str], seed: int | None) -> KrylovConfig:
    kw = {}
    names = {
        "evolution": ("evolution", str), "backend": ("backend", str), "dt": ("dt", float),
        "S": ("S", int), "trotter_N": ("trotter_n", int), "delta": ("delta", float),
        "eta": ("noise_eta", float), "seed": ("seed", int), "shots": ("shots", int),
        "n_eigs": ("n_eigs", int), "controlled_evolution": ("controlled_evolution", str),
    }
    try:
        for key, (attr, conv) in names.items():
            if key in cfg:
                kw[attr] = conv(cfg[key])
        if "criterion" in cfg and cfg["criterion"].lower() != "none":
            kw["criterion"] = float(cfg["criterion"])
        if seed is not None:
            kw["seed"] = seed
        return KrylovConfig(**kw)
    except ValueError as exc:
        raise CliError(f"config: {exc}", EXIT_PARSE) from None


def _read(path: Path | str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror}", EXIT_PARSE) from None


def _hash(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


# --------------------------------------------------------------------------- problem setup


@dataclass
class Problem:
    hamiltonian: QubitOperator
    references: list[ReferenceState]
    eig: EigDecomposition  # sector eigenpairs embedded in the full qubit space
    inputs: dict[str, str]

    @property
    def e_exact(self) -> float:
        return float(self.eig.eigenvalues[0])

    def states(self) -> list[np.ndarray]:
        return [r.statevector() for r in self.references]


def load_hamiltonian(cfg: dict[str, str]) -> tuple[QubitOperator, dict[str, str]]:
    if "operator" in cfg:
        return parse_operator(_read(cfg["operator"])), {"operator": cfg["operator"]}
    if "interaction" not in cfg:
        raise CliError("need 'operator' or 'interaction' (with optional 'model_space')", EXIT_PARSE)
    inputs = {"interaction": cfg["interaction"]}
    n_states = None
    if "model_space" in cfg:
        states = enumerate_single_particle_states(parse_model_space(_read(cfg["model_space"])))
        n_states = len(states)
        inputs["model_space"] = cfg["model_space"]
    text = _read(cfg["interaction"])
    try:
        data = parse_interaction_file(text, n_states)
    except InteractionParseError as exc:
        if n_states is None:
            raise
        # a file that parses on its own disagrees with the model space in size
        other = parse_interaction_file(text)
        raise CliError(f"{exc} ({other.n_states} states vs {n_states} in the model space)", EXIT_DIMENSION) from None
    return map_hamiltonian(data, n_states, cfg.get("convention", "negated_z")), inputs


def sector_eig(h: QubitOperator, weights: set[int]) -> EigDecomposition:
    """Eigenpairs of ``h`` restricted to the references' particle-number sector.

    Falls back to the full space when the sector is not invariant under ``h``.
    """
    if h.n_qubits > DENSE_QUBIT_CAP:
        raise CliError(f"{h.n_qubits} qubits exceeds the dense cap of {DENSE_QUBIT_CAP}", EXIT_DIMENSION)
    dense = h.to_dense()
    dim = dense.shape[0]
    pop = np.bitwise_count(np.arange(dim, dtype=np.uint64)).astype(int)
    inside = np.isin(pop, sorted(weights))
    if np.linalg.norm(dense[np.ix_(~inside, inside)]) > 1e-10:
        inside[:] = True
    idx = np.flatnonzero(inside)
    sub = hermitian_eig(dense[np.ix_(idx, idx)])
    vecs = np.zeros((dim, idx.size), dtype=complex)
    vecs[idx] = sub.eigenvectors
    return EigDecomposition(sub.eigenvalues, vecs)


def load_problem(cfg: dict[str, str]) -> Problem:
    h, inputs = load_hamiltonian(cfg)
    if "references" not in cfg:
        raise CliError("config needs a 'references' file", EXIT_PARSE)
    refs = parse_reference_file(_read(cfg["references"]))
    inputs["references"] = cfg["references"]
    for r in refs:
        if r.n_qubits != h.n_qubits:
            raise CliError(
                f"reference {r.label!r} has {r.n_qubits} qubits, Hamiltonian has {h.n_qubits}", EXIT_DIMENSION
            )
    weights = set().union(*(r.hamming_weights() for r in refs))
    return Problem(h, refs, sector_eig(h, weights), inputs)


def manifest(command: str, cfg: dict[str, str], inputs: dict[str, str], seed: int | None) -> dict:
    hashes = {k: _hash(v) for k, v in sorted(inputs.items())}
    core = {"command": command, "config": dict(sorted(cfg.items())), "input_sha256": hashes, "seed": seed}
    run_id = hashlib.sha256(json.dumps(core, sort_keys=True).encode()).hexdigest()[:16]
    return {
        **core,
        "run_id": run_id,
        "versions": {
            "qlanczos": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
        },
        "created": datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }


# --------------------------------------------------------------------------- output


def emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def write_manifest(man: dict, out: str | None) -> str:
    """Write ``<out>.manifest.json`` next to the result; return the reference string."""
    if out:
        path = Path(str(out) + ".manifest.json")
        path.write_text(json.dumps(man, indent=2, sort_keys=True) + "\n")
        return f"{path.name}#{man['run_id']}"
    print(json.dumps(man, sort_keys=True), file=sys.stderr)
    return man["run_id"]


def _json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _float(x) -> float | None:
    x = float(x)
    return None if np.isnan(x) else x


# --------------------------------------------------------------------------- commands


def cmd_basis(args) -> int:
    orbitals = parse_model_space(_read(args.model_space))
    states = enumerate_single_particle_states(orbitals)
    basis = enumerate_mscheme_basis(states, args.protons, args.neutrons, args.twoM)
    if args.format == "json":
        text = _json({"n_states": len(states), "dimension": len(basis), "determinants": [d.to_string() for d in basis]})
    else:
        text = "# dimension={}\nindex,bitstring\n".format(len(basis))
        text += "".join(f"{i},{d.to_string()}\n" for i, d in enumerate(basis))
    emit(text, args.out)
    return EXIT_OK


def cmd_map(args) -> int:
    cfg = {"interaction": args.interaction, "convention": args.convention}
    if args.model_space:
        cfg["model_space"] = args.model_space
    h, _ = load_hamiltonian(cfg)
    emit(format_operator(h), args.out)
    words = [p.word for p in h]
    step = compile_trotter_step(h, args.dt, 1, 1)
    report = {
        "n_qubits": h.n_qubits,
        "term_count": len(words),
        "letter_rule_gates_per_step": estimate_gate_count_letter_rule(words),
        "ladder_gates_per_step": ladder_gate_count(words),
        "compiled_gate_counts": dict(sorted(gate_count(step).counts.items())),
    }
    if args.report:
        Path(args.report).write_text(_json(report))
    else:
        for key, val in report.items():
            print(f"{key}: {val}", file=sys.stderr)
    return EXIT_OK


def cmd_evolve(args) -> int:
    cfg, _ = load_config(args.config, args.set)
    h, _ = load_hamiltonian(cfg)
    if args.state:
        if len(args.state) != h.n_qubits:
            raise CliError(f"state has {len(args.state)} qubits, Hamiltonian has {h.n_qubits}", EXIT_DIMENSION)
        psi = prepare_product_state(args.state)
    else:
        psi = parse_reference_file(_read(cfg["references"]))[0].statevector()
        if psi.shape[0] != 1 << h.n_qubits:
            raise CliError("reference and Hamiltonian qubit counts differ", EXIT_DIMENSION)
    if args.method == "trotter":
        if args.mode != "real":
            raise CliError("Trotter evolution is real-time only", EXIT_PARSE)
        out = trotter_evolve(psi, h, args.time, 1, args.trotter_n)
    else:
        if h.n_qubits > DENSE_QUBIT_CAP:
            raise CliError(f"{h.n_qubits} qubits exceeds the dense cap", EXIT_DIMENSION)
        out = SpectralPropagator(h).evolve(psi, args.time, args.mode)
    if args.format == "json":
        nz = np.flatnonzero(np.abs(out) > 0)
        emit(_json({"energy": float(expectation(out, h).real),
                    "amplitudes": {int(i): [float(out[i].real), float(out[i].imag)] for i in nz}}), args.out)
    else:
        emit(dump_state_csv(out), args.out)
    return EXIT_OK


def _trace_json(trace: ConvergenceTrace, ref: str) -> str:
    return _json({
        "schema": TRACE_SCHEMA,
        "manifest": ref,
        "entries": [
            {"S": e.S, "retained_dim": e.retained_dim, "energies": [_float(x) for x in e.energies]}
            for e in trace.entries
        ],
    })


def cmd_qlanczos(args) -> int:
    cfg, _ = load_config(args.config, args.set)
    kc = krylov_config(cfg, args.seed)
    prob = load_problem(cfg)
    states = prob.states()
    preps = None
    if kc.backend == "measured":
        preps = [r.circuit() for r in prob.references]
        if kc.shots and any(p is None for p in preps):
            raise CliError("shot sampling needs one- or two-term references", EXIT_PARSE)
        preps = [p if p is not None else s for p, s in zip(preps, states)]
    table = build_moments(kc, prob.hamiltonian, states, preps, prob.eig)
    e_ref = float(cfg["e_ref"]) if "e_ref" in cfg else float(expectation(states[0], prob.hamiltonian).real)
    use_criterion = cfg.get("criterion", "0.05").lower() != "none"
    trace = run_to_convergence(
        table, prob.e_exact, e_ref, kc.criterion, kc.delta, kc.n_eigs, kc.S, stop_early=use_criterion
    )
    man = manifest("qlanczos", cfg, prob.inputs, kc.seed)
    ref = write_manifest(man, args.out)
    if args.format == "json":
        emit(_trace_json(trace, ref), args.out)
    else:
        emit(trace.to_csv(kc.n_eigs, manifest=ref), args.out)
    last = trace.entries[-1]
    summary = {
        "manifest": ref,
        "e_exact": prob.e_exact,
        "e_ref": e_ref,
        "correlation_energy": prob.e_exact - e_ref,
        "final_S": last.S,
        "final_energies": [_float(x) for x in last.energies],
        "degeneracies": [[m, k] for m, k in cluster_degenerate([x for x in last.energies if not np.isnan(x)])],
        "retained_dims": [e.retained_dim for e in trace.entries],
        "fraction_of_ec": trace.fraction_of_ec(),
        "converged": trace.converged,
        "iterations": trace.iterations,
    }
    if args.summary:
        Path(args.summary).write_text(_json(summary))
    elif args.out:
        Path(str(args.out) + ".summary.json").write_text(_json(summary))
    else:
        print(json.dumps(summary, sort_keys=True), file=sys.stderr)
    if last.retained_dim == 0:
        print("error: subspace collapsed: no overlap eigenvalue above the cutoff", file=sys.stderr)
        return EXIT_COLLAPSE
    if use_criterion and not trace.converged:
        print(f"error: not converged to {kc.criterion} of E_c by S = {kc.S}", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def cmd_lanczos(args) -> int:
    cfg, _ = load_config(args.config, args.set)
    prob = load_problem(cfg)
    pivot = prob.states()[0]
    sparse = prob.hamiltonian.to_sparse()
    res = classical_lanczos(lambda v: sparse @ v, pivot, args.iterations)
    m = max(len(r) for r in res.ritz)
    n_show = min(args.n_eigs, m)
    man = manifest("lanczos", {**cfg, "iterations": str(args.iterations)}, prob.inputs, None)
    ref = write_manifest(man, args.out)
    if args.format == "json":
        text = _json({"manifest": ref, "alphas": res.alphas.tolist(), "betas": res.betas.tolist(),
                      "ritz": [r[:n_show].tolist() for r in res.ritz], "terminated_early": res.terminated_early,
                      "e_exact": prob.e_exact})
    else:
        lines = [f"# lanczos-ritz v1; manifest={ref}", ",".join(["iteration"] + [f"ritz_{i}" for i in range(n_show)])]
        for it, r in enumerate(res.ritz, 1):
            vals = [repr(float(x)) for x in r[:n_show]] + [""] * (n_show - min(len(r), n_show))
            lines.append(",".join([str(it)] + vals))
        text = "\n".join(lines) + "\n"
    emit(text, args.out)
    if res.terminated_early:
        print(f"note: invariant subspace reached after {res.iterations} iterations", file=sys.stderr)
    print(f"lowest Ritz value {float(res.ritz[-1][0])!r}; dense ground energy {prob.e_exact!r}", file=sys.stderr)
    return EXIT_OK


def cmd_noise_sweep(args) -> int:
    cfg, _ = load_config(args.config, args.set)
    base = krylov_config(cfg, args.seed)
    prob = load_problem(cfg)
    states = prob.states()
    e_ref = float(cfg["e_ref"]) if "e_ref" in cfg else float(expectation(states[0], prob.hamiltonian).real)
    ref_counts = [int(x) for x in args.refs.split(",")] if args.refs else [len(states)]
    if max(ref_counts) > len(states):
        raise CliError(f"asked for {max(ref_counts)} references, file has {len(states)}", EXIT_DIMENSION)
    etas = [float(x) for x in args.etas.split(",")]
    lines = ["# noise-sweep v1", "eta,R,run,seed,iterations,converged,E_0"]
    summary = []
    for eta in etas:
        for R in ref_counts:
            cfg_r = KrylovConfig(**{f.name: getattr(base, f.name) for f in fields(KrylovConfig)})
            cfg_r.noise_eta = 0.0
            clean = build_moments(cfg_r, prob.hamiltonian, states[:R], None, prob.eig)
            its = []
            for run in range(args.runs):
                seed = base.seed * 100_003 + run
                table = inject_noise(clean, eta, seed)
                tr = run_to_convergence(table, prob.e_exact, e_ref, base.criterion, base.delta, 1, base.S)
                it = iterations_to_converge(tr, base.S)
                its.append(it)
                e0 = _float(tr.entries[-1].energies[0])
                lines.append(f"{eta!r},{R},{run},{seed},{it},{int(tr.converged)},{e0!r}")
            summary.append({"eta": eta, "R": R, "median_iterations": float(np.median(its))})
    man = manifest("noise-sweep", {**cfg, "etas": args.etas, "runs": str(args.runs)}, prob.inputs, base.seed)
    ref = write_manifest(man, args.out)
    lines[0] += f"; manifest={ref}"
    if args.format == "json":
        emit(_json({"manifest": ref, "summary": summary}), args.out)
    else:
        emit("\n".join(lines) + "\n", args.out)
    for row in summary:
        print(f"eta={row['eta']} R={row['R']} median_iterations={row['median_iterations']}", file=sys.stderr)
    return EXIT_OK


# --------------------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="master RNG seed (overrides config)")
    common.add_argument("--out", default=None, help="output file (default: stdout)")
    common.add_argument("--threads", type=int, default=None, help="cap BLAS threads")
    common.add_argument("--format", choices=("csv", "json"), default="csv")

    p = argparse.ArgumentParser(prog="qlanczos", description="Quantum Lanczos shell-model toolkit")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    b = sub.add_parser("basis", parents=[common], help="list the M-scheme basis")
    b.add_argument("--model-space", required=True)
    b.add_argument("--protons", type=int, required=True)
    b.add_argument("--neutrons", type=int, required=True)
    b.add_argument("--twoM", type=int, default=0, help="twice the total M")
    b.set_defaults(func=cmd_basis)

    m = sub.add_parser("map", parents=[common], help="Jordan-Wigner map an interaction file")
    m.add_argument("--interaction", required=True)
    m.add_argument("--model-space", default=None)
    m.add_argument("--convention", choices=("negated_z", "standard"), default="negated_z")
    m.add_argument("--dt", type=float, default=0.1, help="time step for the gate-count report")
    m.add_argument("--report", default=None, help="write the term/gate report as JSON")
    m.set_defaults(func=cmd_map)

    def with_config(sp):
        sp.add_argument("--config", default=None, help="flat key=value file")
        sp.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override a config key")

    e = sub.add_parser("evolve", parents=[common], help="evolve a state exactly or by Trotter steps")
    with_config(e)
    e.add_argument("--state", default=None, help="product-state bitstring (default: first reference)")
    e.add_argument("--time", type=float, required=True)
    e.add_argument("--mode", choices=("real", "imaginary"), default="real")
    e.add_argument("--method", choices=("exact", "trotter"), default="exact")
    e.add_argument("--trotter-n", type=int, default=1)
    e.set_defaults(func=cmd_evolve)

    q = sub.add_parser("qlanczos", parents=[common], help="run a QLanczos convergence trace")
    with_config(q)
    q.add_argument("--summary", default=None, help="summary JSON path")
    q.set_defaults(func=cmd_qlanczos)

    lz = sub.add_parser("lanczos", parents=[common], help="classical Lanczos baseline")
    with_config(lz)
    lz.add_argument("--iterations", type=int, default=50)
    lz.add_argument("--n-eigs", type=int, default=5)
    lz.set_defaults(func=cmd_lanczos)

    ns = sub.add_parser("noise-sweep", parents=[common], help="iterations-to-converge under moment noise")
    with_config(ns)
    ns.add_argument("--etas", default="0,0.001,0.01")
    ns.add_argument("--refs", default=None, help="comma list of reference counts R")
    ns.add_argument("--runs", type=int, default=100)
    ns.set_defaults(func=cmd_noise_sweep)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.threads:
        from threadpoolctl import threadpool_limits

        limiter = threadpool_limits(limits=args.threads)
    else:
        limiter = nullcontext()
    try:
        with limiter:
            return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except PARSE_ERRORS as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except SubspaceCollapsed as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_COLLAPSE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIMENSION if "qubit" in str(exc) or "dimension" in str(exc) else EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
