"""Drive the qlanczos command line on the bundled 14N inputs.

Equivalent shell commands are printed before each run.

Run: python demos/06_cli_walkthrough.py
"""

import shlex
import tempfile
from pathlib import Path

from qlanczos.cli import main

from _common import DATA

out = Path(tempfile.mkdtemp(prefix="qlanczos-demo-"))
cfg = str(DATA / "qlanczos.cfg")
runs = [
    ["basis", "--model-space", str(DATA / "model_space.txt"), "--protons", "1", "--neutrons", "1"],
    ["map", "--interaction", str(DATA / "interaction.txt"), "--model-space", str(DATA / "model_space.txt"),
     "--report", str(out / "report.json")],
    ["qlanczos", "--config", cfg, "--out", str(out / "trace.csv")],
    # With finite shots the overlap cutoff must sit above the noise floor, or
    # noise-only directions survive and pull the lowest Ritz value down.
    ["qlanczos", "--config", cfg, "--set", "backend=measured", "--set", "shots=20000", "--set", "delta=0.05",
     "--out", str(out / "shots.csv")],
    ["lanczos", "--config", cfg, "--iterations", "4"],
    ["evolve", "--config", cfg, "--state", "1001", "--time", "1.0", "--method", "trotter", "--trotter-n", "4"],
    ["noise-sweep", "--config", cfg, "--etas", "0,0.01", "--runs", "5"],
]
for argv in runs:
    print("$ qlanczos", shlex.join(argv))
    code = main(argv)
    print(f"[exit {code}]\n")

for name in ("report.json", "trace.csv", "shots.csv"):
    print(f"--- {name}\n{(out / name).read_text()}")
