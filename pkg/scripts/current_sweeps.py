#!/usr/bin/env python3
"""Ensemble current versus bias and versus driving frequency.

Produces the negative-differential-resistance bias sweep (undriven and
driven) and the strong-driving frequency sweep, then renders the curves
when matplotlib is available.
"""

import subprocess
import sys
from pathlib import Path

from floqef.cli import main

ROOT = Path(__file__).resolve().parent.parent
RENDER = ROOT / "plots" / "render.py"

COMMON = ["--set", "quad.e_max=16", "--set", "quad.tail_tol=1e-3",
          "--set", "grid.nx=41", "--set", "grid.ny=41",
          "--set", "dynamics.n_traj=400",
          "--set", "dynamics.t_burn=150", "--set", "dynamics.t_total=500"]


def run(threads: int = 2) -> int:
    jobs = [
        ("iv_static", "iv-sweep",
         ["--set", "model.amp=0", "--set", "model.n_floquet=0",
          "--set", "sweep.bias=1,2,3,4"]),
        ("iv_driven", "iv-sweep",
         ["--set", "model.amp=2", "--set", "model.omega=1",
          "--set", "sweep.bias=1,2,3,4"]),
        ("freq_large_bias", "freq-sweep",
         ["--set", "model.amp=5", "--set", "model.mu_left=4",
          "--set", "model.mu_right=-4", "--set", "sweep.omega=2,3,4,6"]),
        ("freq_small_bias", "freq-sweep",
         ["--set", "model.amp=5", "--set", "model.mu_left=1",
          "--set", "model.mu_right=-1", "--set", "sweep.omega=2,3,4,6"]),
    ]
    outputs = {}
    for name, command, extra in jobs:
        out = ROOT / "out" / name
        rc = main([command, "--out", str(out), "--threads", str(threads)]
                  + COMMON + extra)
        if rc != 0:
            return rc
        outputs[name] = out
        print(f"{name}: done")

    figures = [
        ("iv", [outputs["iv_static"] / "iv_sweep.csv",
                outputs["iv_driven"] / "iv_sweep.csv"], "iv_curves.png"),
        ("ke_vs_bias", [outputs["iv_static"] / "iv_sweep.csv"],
         "ke_vs_bias.png"),
        ("i_vs_omega", [outputs["freq_large_bias"] / "freq_sweep.csv",
                        outputs["freq_small_bias"] / "freq_sweep.csv"],
         "i_vs_omega.png"),
    ]
    for kind, inputs, fname in figures:
        cmd = [sys.executable, str(RENDER), "--kind", kind,
               "--out", str(ROOT / "out" / fname)]
        for path in inputs:
            cmd += ["--in", str(path)]
        if subprocess.run(cmd).returncode == 0:
            print(f"wrote out/{fname}")
    return 0


if __name__ == "__main__":
    sys.exit(run(int(sys.argv[1]) if len(sys.argv) > 1 else 2))
