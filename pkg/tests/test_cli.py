import csv
import json
from pathlib import Path

import numpy as np
import pytest

from floqef.cli import main
from floqef.config import load_config
from floqef.errors import ConfigError

FAST_GRID = ["--set", "grid.x_min=-4", "--set", "grid.x_max=-2",
             "--set", "grid.y_min=-3", "--set", "grid.y_max=-1",
             "--set", "grid.nx=5", "--set", "grid.ny=5"]
FAST_QUAD = ["--set", "quad.e_max=16", "--set", "quad.tail_tol=1e-3"]
STATIC = ["--set", "model.amp=0", "--set", "model.n_floquet=0"]


def read_csv(path: Path):
    lines = path.read_text().splitlines()
    comments = [ln for ln in lines if ln.startswith("#")]
    rows = list(csv.reader(ln for ln in lines if not ln.startswith("#")))
    return comments, rows[0], rows[1:]


def test_config_file_and_overrides(tmp_path):
    cfg_file = tmp_path / "run.cfg"
    cfg_file.write_text(
        "# comment\n"
        "model.kt = 0.6\n"
        "dynamics.n_traj = 7\n"
        "sweep.bias = 1, 2, 3\n"
        "output_dir = somewhere\n")
    cfg = load_config(str(cfg_file), ["model.kt=0.7"], None)
    assert cfg.model.kt == 0.7
    assert cfg.dynamics.n_traj == 7
    assert cfg.sweep.bias == (1.0, 2.0, 3.0)
    assert cfg.output_dir == "somewhere"


def test_unknown_key_rejected():
    with pytest.raises(ConfigError):
        load_config(None, ["model.bogus=1"])
    with pytest.raises(ConfigError):
        load_config(None, ["nosection=1"])


def test_invalid_physics_exits_2(tmp_path, capsys):
    rc = main(["validate", "--set", "model.gamma_tilde=0",
               "--out", str(tmp_path)])
    assert rc == 2
    assert "config error" in capsys.readouterr().err


def test_validate_ok(tmp_path):
    rc = main(["validate", "--set", "model.n_floquet=1",
               "--out", str(tmp_path)])
    assert rc == 0
    report = json.loads((tmp_path / "validate.json").read_text())
    assert report["failed"] == []
    assert all(c["pass"] for c in report["checks"])


def test_validate_coarse_quadrature_exits_5(tmp_path, capsys):
    rc = main(["validate", "--set", "model.n_floquet=1",
               "--set", "quad.de=1.0", "--out", str(tmp_path)])
    assert rc == 5
    report = json.loads((tmp_path / "validate.json").read_text())
    assert any(name.startswith("quadrature") for name in report["failed"])


def test_friction_map_outputs_and_determinism(tmp_path):
    outs = []
    for sub in ("a", "b"):
        out = tmp_path / sub
        rc = main(["friction-map", "--out", str(out)] + STATIC + FAST_GRID
                  + FAST_QUAD)
        assert rc == 0
        outs.append(out)
    comments, header, rows = read_csv(outs[0] / "friction_map.csv")
    assert any("config_fingerprint" in c for c in comments)
    assert header == ["x", "y", "Fx", "Fy", "g_xx", "g_xy", "g_yx", "g_yy",
                      "antisym", "D_xx", "D_xy", "D_yy", "I_loc"]
    assert len(rows) == 25
    gmax = max(abs(float(r[4])) for r in rows)
    assert all(abs(float(r[8])) <= 1e-8 * gmax for r in rows)

    assert (outs[0] / "friction_map.csv").read_bytes() == \
        (outs[1] / "friction_map.csv").read_bytes()
    npz_a = sorted(outs[0].glob("field_grid_*.npz"))[0]
    npz_b = sorted(outs[1].glob("field_grid_*.npz"))[0]
    assert npz_a.read_bytes() == npz_b.read_bytes()


def test_dynamics_smoke_single_trajectory(tmp_path):
    out = tmp_path / "dyn"
    rc = main(["dynamics", "--out", str(out)] + STATIC + FAST_QUAD + [
        "--set", "grid.x_min=-6", "--set", "grid.x_max=0",
        "--set", "grid.y_min=-5", "--set", "grid.y_max=1",
        "--set", "grid.nx=25", "--set", "grid.ny=25",
        "--set", "grid.out_of_bounds_policy=clamp",
        "--set", "dynamics.n_traj=1", "--set", "dynamics.t_burn=1",
        "--set", "dynamics.t_total=3", "--set", "dynamics.dump_every=20"])
    assert rc == 0
    comments, header, rows = read_csv(out / "dynamics.csv")
    assert len(rows) == 1
    row = dict(zip(header, rows[0]))
    assert float(row["kinetic_mean"]) > 0.0
    assert row["n_traj"] == "1"
    _, theader, trows = read_csv(out / "trajectories.csv")
    assert theader == ["traj", "t", "x", "y", "px", "py"]
    assert len(trows) > 10
    # grid cache reused on the second run
    assert (out / "grids").exists()
    rc = main(["dynamics", "--out", str(out)] + STATIC + FAST_QUAD + [
        "--set", "grid.x_min=-6", "--set", "grid.x_max=0",
        "--set", "grid.y_min=-5", "--set", "grid.y_max=1",
        "--set", "grid.nx=25", "--set", "grid.ny=25",
        "--set", "grid.out_of_bounds_policy=clamp",
        "--set", "dynamics.n_traj=1", "--set", "dynamics.t_burn=1",
        "--set", "dynamics.t_total=3"])
    assert rc == 0


def test_dynamics_escape_exits_4(tmp_path, capsys):
    rc = main(["dynamics", "--out", str(tmp_path)] + STATIC + FAST_QUAD
              + FAST_GRID + [
        "--set", "dynamics.n_traj=4", "--set", "dynamics.t_burn=0.5",
        "--set", "dynamics.t_total=20"])
    assert rc == 4
    assert "trajectory" in capsys.readouterr().err


def test_iv_sweep(tmp_path):
    out = tmp_path / "iv"
    rc = main(["iv-sweep", "--out", str(out)] + STATIC + FAST_QUAD + [
        "--set", "grid.x_min=-6", "--set", "grid.x_max=0",
        "--set", "grid.y_min=-5", "--set", "grid.y_max=1",
        "--set", "grid.nx=25", "--set", "grid.ny=25",
        "--set", "grid.out_of_bounds_policy=clamp",
        "--set", "sweep.bias=0,1",
        "--set", "dynamics.n_traj=8", "--set", "dynamics.t_burn=1",
        "--set", "dynamics.t_total=4"])
    assert rc == 0
    _, header, rows = read_csv(out / "iv_sweep.csv")
    assert header[0] == "mu_left"
    assert [r[0] for r in rows] == ["0.0", "1.0"]
    zero = dict(zip(header, rows[0]))
    assert abs(float(zero["current_mean"])) <= \
        3 * float(zero["current_stderr"]) + 1e-12
    biased = dict(zip(header, rows[1]))
    assert float(biased["current_mean"]) > 0.0


def test_freq_sweep_undriven_is_frequency_independent(tmp_path):
    out = tmp_path / "freq"
    rc = main(["freq-sweep", "--out", str(out)] + STATIC + FAST_QUAD + [
        "--set", "grid.x_min=-6", "--set", "grid.x_max=0",
        "--set", "grid.y_min=-5", "--set", "grid.y_max=1",
        "--set", "grid.nx=25", "--set", "grid.ny=25",
        "--set", "grid.out_of_bounds_policy=clamp",
        "--set", "model.mu_left=1", "--set", "model.mu_right=-1",
        "--set", "sweep.omega=0.8,1.6",
        "--set", "dynamics.n_traj=8", "--set", "dynamics.t_burn=1",
        "--set", "dynamics.t_total=4"])
    assert rc == 0
    _, header, rows = read_csv(out / "freq_sweep.csv")
    assert len(rows) == 2
    # undriven fields are frequency independent up to the omega-dependent
    # quadrature window (tail-exactness level)
    i1, i2 = float(rows[0][1]), float(rows[1][1])
    assert abs(i1 - i2) <= 1e-10 * max(abs(i1), 1e-12)


def test_set_override_reflected_in_output(tmp_path):
    out = tmp_path / "kt"
    rc = main(["dynamics", "--out", str(out), "--seed", "777"] + STATIC
              + FAST_QUAD + [
        "--set", "grid.x_min=-6", "--set", "grid.x_max=0",
        "--set", "grid.y_min=-5", "--set", "grid.y_max=1",
        "--set", "grid.nx=25", "--set", "grid.ny=25",
        "--set", "grid.out_of_bounds_policy=clamp",
        "--set", "model.kt=0.65",
        "--set", "dynamics.n_traj=2", "--set", "dynamics.t_burn=0.5",
        "--set", "dynamics.t_total=2"])
    assert rc == 0
    _, header, rows = read_csv(out / "dynamics.csv")
    row = dict(zip(header, rows[0]))
    assert row["kt"] == "0.65"
    assert row["master_seed"] == "777"


def test_sweep_requires_list(tmp_path):
    assert main(["iv-sweep", "--out", str(tmp_path)]) == 2
    assert main(["freq-sweep", "--out", str(tmp_path)]) == 2
