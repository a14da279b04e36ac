import json
import shutil
from pathlib import Path

import numpy as np
import pytest

from qlanczos.cli import main
from qlanczos.pauli import parse_operator, to_dense

DATA = Path(__file__).resolve().parents[1] / "data" / "n14"


@pytest.fixture
def workdir(tmp_path):
    for f in DATA.iterdir():
        shutil.copy(f, tmp_path / f.name)
    return tmp_path


def run(*argv):
    return main([str(a) for a in argv])


def read_trace(path):
    lines = Path(path).read_text().splitlines()
    assert lines[0].startswith("# qlanczos-trace v1; manifest=")
    rows = [line.split(",") for line in lines[2:]]
    return lines[1].split(","), rows


# --------------------------------------------------------------------------- basis


def test_basis_lists_two_n14_determinants(workdir, capsys):
    assert run("basis", "--model-space", workdir / "model_space.txt", "--protons", 1, "--neutrons", 1) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0] == "# dimension=2"
    assert out[2:] == ["0,1001", "1,0110"]


def test_basis_empty_space(tmp_path, capsys):
    (tmp_path / "empty.txt").write_text("# no orbitals\n")
    with pytest.warns(UserWarning, match="basis is empty"):
        code = run("basis", "--model-space", tmp_path / "empty.txt", "--protons", 1, "--neutrons", 1, "--format", "json")
    assert code == 0
    assert json.loads(capsys.readouterr().out)["dimension"] == 0


def test_basis_bad_file_exits_2(tmp_path, capsys):
    (tmp_path / "bad.txt").write_text("ORBITAL p x\n")
    assert run("basis", "--model-space", tmp_path / "bad.txt", "--protons", 1, "--neutrons", 1) == 2
    assert "line 1" in capsys.readouterr().err
    assert run("basis", "--model-space", tmp_path / "missing.txt", "--protons", 1, "--neutrons", 1) == 2


# --------------------------------------------------------------------------- map


def test_map_reports_17_terms(workdir):
    out, report = workdir / "h.op", workdir / "report.json"
    args = ["map", "--interaction", workdir / "interaction.txt", "--model-space", workdir / "model_space.txt"]
    assert run(*args, "--out", out, "--report", report) == 0
    rep = json.loads(report.read_text())
    assert rep["term_count"] == 17 and rep["n_qubits"] == 4
    assert rep["letter_rule_gates_per_step"] >= rep["ladder_gates_per_step"] > 0
    op = parse_operator(out.read_text())
    assert len(op) == 17
    first = out.read_bytes()
    assert run(*args, "--out", out) == 0
    assert out.read_bytes() == first


def test_map_spe_only_gives_z_terms(tmp_path):
    (tmp_path / "spe.txt").write_text("NSTATES 3\nSPE 0 -1.0\nSPE 1 0.5\nSPE 2 2.0\n")
    out = tmp_path / "spe.op"
    assert run("map", "--interaction", tmp_path / "spe.txt", "--out", out, "--report", tmp_path / "r.json") == 0
    op = parse_operator(out.read_text())
    assert op.terms and all(set(p.word) <= {"I", "Z"} for p in op)
    dense = to_dense(op)
    occupation = [(i >> 0 & 1) * -1.0 + (i >> 1 & 1) * 0.5 + (i >> 2 & 1) * 2.0 for i in range(8)]
    assert np.allclose(dense, np.diag(occupation), atol=1e-12)


def test_map_inconsistent_dimensions_exit_3(workdir):
    (workdir / "big.txt").write_text("NSTATES 6\nSPE 5 1.0\n")
    code = run("map", "--interaction", workdir / "big.txt", "--model-space", workdir / "model_space.txt")
    assert code == 3


def test_map_parse_error_exit_2(tmp_path):
    (tmp_path / "bad.txt").write_text("NSTATES 2\nTBME 0 1 0\n")
    assert run("map", "--interaction", tmp_path / "bad.txt") == 2


# --------------------------------------------------------------------------- qlanczos


def ground_reference(workdir):
    """Write the exact ground state of the M=0 sector as a two-term reference."""
    out = workdir / "h.op"
    run("map", "--interaction", workdir / "interaction.txt", "--out", out, "--report", workdir / "r.json")
    dense = to_dense(parse_operator(out.read_text()))
    idx = [0b1001, 0b0110]
    w, v = np.linalg.eigh(dense[np.ix_(idx, idx)].real)
    v = v.tolist()
    text = f"REF ground\nTERM {v[0][0]!r} 0.0 1001\nTERM {v[1][0]!r} 0.0 0110\n"
    (workdir / "ground.txt").write_text(text)
    return float(w[0])


def test_eigenstate_reference_converges_at_zero(workdir):
    e0 = ground_reference(workdir)
    out = workdir / "trace.csv"
    code = run("qlanczos", "--config", workdir / "qlanczos.cfg", "--set", f"references={workdir / 'ground.txt'}",
               "--set", f"e_ref={e0 + 1.0!r}", "--out", out)
    assert code == 0
    header, rows = read_trace(out)
    assert header[:3] == ["S", "retained_dim", "E_0"]
    assert len(rows) == 1 and rows[0][0] == "0"
    assert float(rows[0][2]) == pytest.approx(e0, abs=1e-12)
    summary = json.loads(Path(str(out) + ".summary.json").read_text())
    assert summary["converged"] and summary["iterations"] == 0
    assert summary["fraction_of_ec"] == pytest.approx(0.0, abs=1e-10)
    manifest = json.loads(Path(str(out) + ".manifest.json").read_text())
    assert manifest["seed"] == 7 and set(manifest["input_sha256"]) == {"interaction", "model_space", "references"}
    assert manifest["run_id"] in Path(out).read_text().splitlines()[0]


def test_exact_and_measured_analytic_agree(workdir):
    energies = {}
    for backend in ("statevector_exact", "measured"):
        out = workdir / f"{backend}.csv"
        code = run("qlanczos", "--config", workdir / "qlanczos.cfg", "--set", f"backend={backend}",
                   "--set", "controlled_evolution=exact", "--set", "criterion=none", "--set", "S=3",
                   "--set", "delta=1e-6", "--out", out)
        assert code == 0
        _, rows = read_trace(out)
        energies[backend] = np.array([[float(x) if x else np.nan for x in r[2:]] for r in rows])
    a, b = energies.values()
    assert a.shape == b.shape == (4, 3)
    assert np.nanmax(np.abs(a - b)) <= 1e-8


def test_rerun_is_byte_identical(workdir):
    outs = []
    for _ in range(2):
        code = run("qlanczos", "--config", workdir / "qlanczos.cfg", "--set", "backend=measured",
                   "--set", "shots=2000", "--set", "criterion=none", "--set", "S=2", "--out", workdir / "a.csv")
        assert code in (0, 4)
        outs.append((workdir / "a.csv").read_bytes())
    assert outs[0] == outs[1]


def test_exit_codes_collapse_and_nonconvergence(workdir):
    cfg = workdir / "qlanczos.cfg"
    assert run("qlanczos", "--config", cfg, "--set", "delta=2", "--out", workdir / "c.csv") == 4
    # one product reference cannot reach the ground state at S = 0
    (workdir / "one.txt").write_text("REF lowest\nTERM 1 0 1001\n")
    code = run("qlanczos", "--config", cfg, "--set", f"references={workdir / 'one.txt'}", "--set", "S=0",
               "--out", workdir / "n.csv")
    assert code == 5
    # trace is still written on non-convergence
    _, rows = read_trace(workdir / "n.csv")
    assert len(rows) == 1


def test_exit_codes_parse_and_dimension(workdir):
    cfg = workdir / "qlanczos.cfg"
    (workdir / "bad.cfg").write_text("evolution real\n")
    assert run("qlanczos", "--config", workdir / "bad.cfg") == 2
    assert run("qlanczos", "--config", cfg, "--set", "colour=blue") == 2
    (workdir / "wide.txt").write_text("REF w\nTERM 1 0 100100\n")
    assert run("qlanczos", "--config", cfg, "--set", f"references={workdir / 'wide.txt'}") == 3


def test_imaginary_time_trace(workdir):
    out = workdir / "im.csv"
    code = run("qlanczos", "--config", workdir / "qlanczos.cfg", "--set", "evolution=imaginary", "--out", out)
    assert code == 0
    summary = json.loads(Path(str(out) + ".summary.json").read_text())
    assert summary["converged"]


# --------------------------------------------------------------------------- evolve, lanczos, noise-sweep


def test_evolve_real_time_preserves_norm(workdir, capsys):
    assert run("evolve", "--config", workdir / "qlanczos.cfg", "--time", 0.7, "--format", "json") == 0
    amps = json.loads(capsys.readouterr().out)["amplitudes"]
    norm = sum(re * re + im * im for re, im in amps.values())
    assert norm == pytest.approx(1.0, abs=1e-12)
    in_sector = sum(re * re + im * im for i, (re, im) in amps.items() if int(i) in (0b1001, 0b0110))
    assert in_sector == pytest.approx(1.0, abs=1e-12)


def test_evolve_state_width_mismatch(workdir):
    assert run("evolve", "--config", workdir / "qlanczos.cfg", "--time", 1, "--state", "101") == 3


def test_lanczos_reaches_sector_ground(workdir, capsys):
    e0 = ground_reference(workdir)
    capsys.readouterr()
    assert run("lanczos", "--config", workdir / "qlanczos.cfg", "--iterations", 5) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[1].startswith("iteration,ritz_0")
    assert float(lines[-1].split(",")[1]) == pytest.approx(e0, abs=1e-10)


def test_noise_sweep_rows(workdir, capsys):
    out = workdir / "sweep.csv"
    code = run("noise-sweep", "--config", workdir / "qlanczos.cfg", "--etas", "0,0.01", "--refs", "1,2",
               "--runs", 3, "--out", out)
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[1] == "eta,R,run,seed,iterations,converged,E_0"
    assert len(lines) == 2 + 2 * 2 * 3
    assert run("noise-sweep", "--config", workdir / "qlanczos.cfg", "--refs", "3", "--runs", 1) == 3
