#!/usr/bin/env python3
"""Antisymmetric-friction maps with overlaid deterministic limit cycles.

For each bias in BIASES: precompute the driven field map, run noiseless
trajectories that spiral into the Lorentz-force cycle, and (if matplotlib
is available) render the overlay figure via the plotting layer.
"""

import subprocess
import sys
from pathlib import Path

from floqef.cli import main

ROOT = Path(__file__).resolve().parent.parent
RENDER = ROOT / "plots" / "render.py"
BIASES = (1.0, 4.0)
AMP, OMEGA = 5.0, 1.0


def run(threads: int = 2) -> int:
    for bias in BIASES:
        out = ROOT / "out" / f"cycles_mu{bias:g}"
        args = [
            "--out", str(out), "--threads", str(threads),
            "--set", f"model.amp={AMP}", "--set", f"model.omega={OMEGA}",
            "--set", f"model.mu_left={bias}", "--set", f"model.mu_right={-bias}",
            "--set", "quad.e_max=16", "--set", "quad.tail_tol=1e-3",
            "--set", "grid.nx=41", "--set", "grid.ny=41",
        ]
        rc = main(["friction-map"] + args)
        if rc != 0:
            return rc
        rc = main(["dynamics"] + args + [
            "--set", "dynamics.stochastic=false",
            "--set", "dynamics.n_traj=4",
            "--set", "dynamics.t_burn=100", "--set", "dynamics.t_total=250",
            "--set", "dynamics.dump_every=10"])
        if rc != 0:
            return rc
        fig = out / "cycle_overlay.png"
        proc = subprocess.run([
            sys.executable, str(RENDER), "--kind", "heatmap_orbit",
            "--in", str(out / "friction_map.csv"),
            "--in", str(out / "trajectories.csv"),
            "--out", str(fig)])
        if proc.returncode == 0:
            print(f"wrote {fig}")
    return 0


if __name__ == "__main__":
    sys.exit(run())
