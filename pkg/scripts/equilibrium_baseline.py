#!/usr/bin/env python3
"""Equilibrium baseline: undriven, unbiased junction at kT = 0.5.

Precomputes the static field grid, runs the trajectory ensemble, and
prints the cycle-limit kinetic energy, which must equal kT (two nuclear
degrees of freedom at kT/2 each).
"""

import csv
import sys
from pathlib import Path

from floqef.cli import main

OUT = Path(__file__).resolve().parent.parent / "out" / "equilibrium"


def run(threads: int = 2) -> int:
    rc = main([
        "dynamics", "--out", str(OUT), "--threads", str(threads),
        "--set", "model.amp=0", "--set", "model.n_floquet=0",
        "--set", "quad.e_max=16", "--set", "quad.tail_tol=1e-3",
        "--set", "dynamics.n_traj=1000",
    ])
    if rc != 0:
        return rc
    with open(OUT / "dynamics.csv", encoding="utf-8") as fh:
        rows = list(csv.reader(ln for ln in fh if not ln.startswith("#")))
    row = dict(zip(rows[0], rows[1]))
    print(f"kinetic_mean = {float(row['kinetic_mean']):.4f} "
          f"+- {float(row['kinetic_stderr']):.4f}  (target kT = {row['kt']})")
    return 0


if __name__ == "__main__":
    sys.exit(run())
