"""Command-line front end: friction-map, dynamics, iv-sweep, freq-sweep,
validate.

Exit codes are stable API: 0 ok, 2 config error, 3 quadrature failure,
4 trajectory escape, 5 validation failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import dynamics as dyn
from . import fields as ef
from . import floquet as fq
from . import model as md
from . import transport as tp
from .config import RunConfig, config_lines, load_config
from .errors import ConfigError, OutOfBounds, QuadratureNotConverged
from .grid import FieldGrid, params_fingerprint, precompute
from .quadrature import energy_quadrature

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_QUADRATURE = 3
EXIT_DYNAMICS = 4
EXIT_VALIDATION = 5


def config_fingerprint(cfg: RunConfig) -> str:
    # output_dir excluded: where results land must not change their content
    lines = [ln for ln in config_lines(cfg) if not ln.startswith("output_dir")]
    return hashlib.sha256("\n".join(lines).encode()).hexdigest()


def _open_csv(path: Path, cfg: RunConfig, command: str):
    fh = open(path, "w", encoding="utf-8", newline="")
    fh.write(f"# floqef {command}\n")
    fh.write(f"# config_fingerprint = {config_fingerprint(cfg)}\n")
    return fh, csv.writer(fh, lineterminator="\n")


def _grid_cache_path(cfg: RunConfig) -> Path:
    fp = params_fingerprint(cfg.model, cfg.quad)
    s = cfg.grid
    tag = hashlib.sha256(
        f"{s.x_min},{s.x_max},{s.y_min},{s.y_max},{s.nx},{s.ny}".encode()
    ).hexdigest()[:8]
    return Path(cfg.output_dir) / "grids" / f"grid_{fp[:12]}_{tag}.npz"


def _ensure_grid(cfg: RunConfig, threads: int) -> FieldGrid:
    path = _grid_cache_path(cfg)
    if path.exists():
        return FieldGrid.load(path, cfg.model, cfg.quad)
    grid = precompute(cfg.model, cfg.quad, cfg.grid, threads=threads)
    path.parent.mkdir(parents=True, exist_ok=True)
    grid.save(path)
    return grid


def cmd_friction_map(cfg: RunConfig, threads: int) -> int:
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    grid = precompute(cfg.model, cfg.quad, cfg.grid, threads=threads)
    grid.save(out / f"field_grid_{grid.fingerprint[:12]}.npz")
    fh, writer = _open_csv(out / "friction_map.csv", cfg, "friction-map")
    with fh:
        writer.writerow(["x", "y", "Fx", "Fy", "g_xx", "g_xy", "g_yx",
                         "g_yy", "antisym", "D_xx", "D_xy", "D_yy", "I_loc"])
        xs, ys = grid.spec.xs, grid.spec.ys
        for ix, x in enumerate(xs):
            for iy, y in enumerate(ys):
                g = grid.gamma[ix, iy]
                d = grid.diffusion[ix, iy]
                writer.writerow([
                    x, y, grid.force[ix, iy, 0], grid.force[ix, iy, 1],
                    g[0, 0], g[0, 1], g[1, 0], g[1, 1],
                    0.5 * (g[0, 1] - g[1, 0]),
                    d[0, 0], d[0, 1], d[1, 1], grid.current[ix, iy]])
    return EXIT_OK


def _ensemble_row(cfg: RunConfig, stats: dyn.EnsembleStats) -> list:
    m, d = cfg.model, cfg.dynamics
    return [m.kt, m.delta, m.amp, m.omega, m.gamma_tilde, m.mu_left,
            m.mu_right, m.lambda_x, m.lambda_y, m.mass, m.n_floquet, m.d,
            d.n_traj, d.dt, d.t_burn, d.t_total, d.master_seed, d.stochastic,
            stats.kinetic_mean, stats.kinetic_stderr, stats.coupling_sq,
            stats.coupling_sq_stderr, stats.current_mean, stats.current_stderr]


_ENSEMBLE_HEADER = [
    "kt", "delta", "amp", "omega", "gamma_tilde", "mu_left", "mu_right",
    "lambda_x", "lambda_y", "mass", "n_floquet", "d",
    "n_traj", "dt", "t_burn", "t_total", "master_seed", "stochastic",
    "kinetic_mean", "kinetic_stderr", "coupling_sq", "coupling_sq_stderr",
    "current_mean", "current_stderr"]


def cmd_dynamics(cfg: RunConfig, threads: int) -> int:
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    grid = _ensure_grid(cfg, threads)
    d = cfg.dynamics
    stats = dyn.run_ensemble(cfg.model, grid, d.n_traj, d.dt, d.t_burn,
                             d.t_total, d.master_seed,
                             stochastic=d.stochastic, threads=threads)
    fh, writer = _open_csv(out / "dynamics.csv", cfg, "dynamics")
    with fh:
        writer.writerow(_ENSEMBLE_HEADER)
        writer.writerow(_ensemble_row(cfg, stats))
    if d.dump_every > 0:
        times, rs, ps = dyn.run_trajectories(
            cfg.model, grid, min(d.dump_max_traj, d.n_traj), d.dt, d.t_total,
            d.master_seed, stochastic=d.stochastic,
            record_every=d.dump_every)
        fh, writer = _open_csv(out / "trajectories.csv", cfg, "dynamics")
        with fh:
            writer.writerow(["traj", "t", "x", "y", "px", "py"])
            for i in range(rs.shape[0]):
                for j, t in enumerate(times):
                    writer.writerow([i, t, rs[i, j, 0], rs[i, j, 1],
                                     ps[i, j, 0], ps[i, j, 1]])
    return EXIT_OK


def _sweep(cfg: RunConfig, threads: int, variable: str, values,
           filename: str) -> int:
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    fh, writer = _open_csv(out / filename, cfg, f"{variable}-sweep")
    with fh:
        writer.writerow([variable, "current_mean", "current_stderr",
                         "coupling_sq", "coupling_sq_stderr",
                         "kinetic_mean", "kinetic_stderr"])
        for v in values:
            if variable == "mu_left":
                model = replace(cfg.model, mu_left=v, mu_right=-v)
            else:
                model = replace(cfg.model, omega=v)
            point_cfg = replace(cfg, model=model)
            grid = _ensure_grid(point_cfg, threads)
            d = cfg.dynamics
            stats = dyn.run_ensemble(model, grid, d.n_traj, d.dt, d.t_burn,
                                     d.t_total, d.master_seed,
                                     stochastic=d.stochastic, threads=threads)
            writer.writerow([v, stats.current_mean, stats.current_stderr,
                             stats.coupling_sq, stats.coupling_sq_stderr,
                             stats.kinetic_mean, stats.kinetic_stderr])
            fh.flush()
    return EXIT_OK


def cmd_iv_sweep(cfg: RunConfig, threads: int) -> int:
    if not cfg.sweep.bias:
        raise ConfigError("iv-sweep requires sweep.bias")
    return _sweep(cfg, threads, "mu_left", cfg.sweep.bias, "iv_sweep.csv")


def cmd_freq_sweep(cfg: RunConfig, threads: int) -> int:
    if not cfg.sweep.omega:
        raise ConfigError("freq-sweep requires sweep.omega")
    return _sweep(cfg, threads, "omega", cfg.sweep.omega, "freq_sweep.csv")


# -- validation battery ------------------------------------------------------

def _check_fourier_reconstruction(cfg):
    p = cfg.model
    r = md.NuclearPoint(0.7, -1.3)
    blocks = md.fourier_blocks(r, p)
    ts = np.linspace(0.0, p.period, 64, endpoint=False)
    worst = 0.0
    for t in ts:
        h = sum(blocks[n] * np.exp(1j * n * p.omega * t) for n in blocks)
        worst = max(worst, np.abs(h - md.system_hamiltonian(r, t, p)).max())
    assert worst <= 1e-12, f"reconstruction error {worst:.2e}"


def _check_gradient_fd(cfg):
    p = cfg.model
    dx, dy = md.nuclear_gradients(p)
    r0 = md.NuclearPoint(-1.1, 0.4)
    eps = 1e-5
    fd_x = (md.system_hamiltonian((r0.x + eps, r0.y), 0.3, p)
            - md.system_hamiltonian((r0.x - eps, r0.y), 0.3, p)) / (2 * eps)
    fd_y = (md.system_hamiltonian((r0.x, r0.y + eps), 0.3, p)
            - md.system_hamiltonian((r0.x, r0.y - eps), 0.3, p)) / (2 * eps)
    worst = max(np.abs(fd_x - dx).max(), np.abs(fd_y - dy).max())
    assert worst <= 1e-9, f"gradient FD error {worst:.2e}"


def _check_hybridization_psd(cfg):
    gl, gr = md.hybridization_matrices(cfg.model)
    for g in (gl, gr):
        assert np.allclose(g, g.T) and np.linalg.eigvalsh(g).min() >= 0


def _check_lorentzian_norm(cfg):
    p, q = cfg.model, cfg.quad
    hw = 0.5 * p.gamma_tilde

    def lorentzian(eps):
        return hw / (eps**2 + hw**2) / np.pi

    val, _ = energy_quadrature(lorentzian, p, q)
    assert abs(val - 1.0) <= 1e-8, f"Lorentzian norm off by {abs(val-1):.2e}"


def _check_field_convergence(cfg):
    p = cfg.model
    ef.evaluate_sample((-p.lambda_x, -p.lambda_y), p, cfg.quad)


def _check_greens_identities(cfg):
    p = cfg.model
    rng = np.random.default_rng(7)
    for _ in range(20):
        eps = float(rng.uniform(-8, 8))
        r = (float(rng.uniform(-6, 1)), float(rng.uniform(-5, 2)))
        g = fq.greens_at(eps, r, p)
        assert np.array_equal(g.g_a, g.g_r.conj().T)
        wb = np.abs((g.g_r - g.g_a) - (g.g_greater - g.g_lesser)).max()
        assert wb <= 1e-10 * max(np.abs(g.g_r).max(), 1.0)
        anti = np.abs(g.g_lesser + g.g_lesser.conj().T).max()
        assert anti <= 1e-12 * max(np.abs(g.g_lesser).max(), 1e-12)
        occ = np.linalg.eigvalsh(-1j * g.g_lesser).min()
        emp = np.linalg.eigvalsh(1j * g.g_greater).min()
        assert occ >= -1e-10 and emp >= -1e-10
        de = 1e-4
        fd = (fq.greens_at(eps + de, r, p).g_r
              - fq.greens_at(eps - de, r, p).g_r) / (2 * de)
        ana = fq.denergy_retarded(g.g_r)
        assert (np.abs(fd - ana).max()
                <= 1e-6 * max(np.abs(ana).max(), 1e-12))


def _equilibrium_model(p):
    return replace(p, amp=0.0, mu_left=0.0, mu_right=0.0)


def _check_equilibrium_antisymmetry(cfg):
    p = _equilibrium_model(cfg.model)
    for r in ((-3.0, -2.0), (-1.0, 0.5), (-5.0, -3.5)):
        gam = ef.friction_tensor(r, p, cfg.quad)
        assert (abs(gam[0, 1] - gam[1, 0])
                <= 1e-8 * max(np.abs(gam).max(), 1e-12))


def _check_fluctuation_dissipation(cfg):
    p = _equilibrium_model(cfg.model)
    for r in ((-3.0, -2.0), (-2.0, -1.0)):
        s = ef.evaluate_sample(r, p, cfg.quad)
        err = np.abs(s.diffusion - p.kt * s.gamma).max()
        assert err <= 1e-4 * np.abs(s.diffusion).max()


def _check_floquet_reduction(cfg):
    p = _equilibrium_model(cfg.model)
    if p.n_floquet == 0:
        return
    s_static = ef.evaluate_sample((-2.5, -1.5), replace(p, n_floquet=0),
                                  cfg.quad)
    s_floquet = ef.evaluate_sample((-2.5, -1.5), p, cfg.quad)
    err = np.abs(s_floquet.gamma - s_static.gamma).max()
    assert err <= 1e-10 * np.abs(s_static.gamma).max()


def _check_diffusion_psd(cfg):
    for r in ((-3.0, -2.0), (0.5, 1.0)):
        d = ef.diffusion_tensor(r, cfg.model, cfg.quad)
        assert np.linalg.eigvalsh(d).min() >= 0.0


def _check_transport_zero_bias(cfg):
    p = replace(cfg.model, mu_left=0.0, mu_right=0.0)
    cur = tp.local_current((-3.0, -2.0), p, cfg.quad)
    assert abs(cur.i_symmetric) <= 1e-12


def _check_transport_cross(cfg):
    cur = tp.local_current((-3.0, -2.0), cfg.model, cfg.quad)
    scale = max(abs(cur.i_symmetric), 1e-12)
    assert abs(cur.i_general - cur.i_symmetric) <= 1e-6 * scale


def _check_lorentz_conservation(cfg):
    fields = dyn.ConstantFields(gamma=[[0.0, 0.6], [-0.6, 0.0]])
    state = dyn.TrajectoryState(r=np.zeros(2), p_momentum=np.array([1.0, 0.2]),
                                t=0.0)
    rng = np.random.default_rng(0)
    ke = state.kinetic_energy()
    for _ in range(200):
        new = dyn.step(state, fields, cfg.model, 0.01, rng, stochastic=False)
        drift = abs(new.kinetic_energy() - ke) / ke
        assert drift <= 1e-10, f"per-step KE drift {drift:.2e}"
        state = new


def _check_random_force_covariance(cfg):
    dmat = np.array([[0.8, 0.3], [0.3, 0.5]])
    rng = np.random.default_rng(11)
    n, dt = 200_000, 0.01
    z = rng.standard_normal((n, 2))
    forces = dyn._noise_batch(np.broadcast_to(dmat, (n, 2, 2)), z, dt)
    cov = forces.T @ forces / n
    assert np.abs(cov - 2 * dmat / dt).max() <= 0.03 * (2 / dt)


_CHECKS = [
    ("model.fourier-reconstruction", _check_fourier_reconstruction),
    ("model.gradient-finite-difference", _check_gradient_fd),
    ("model.hybridization-psd", _check_hybridization_psd),
    ("quadrature.lorentzian-norm", _check_lorentzian_norm),
    ("quadrature.field-convergence", _check_field_convergence),
    ("floquet.greens-identities", _check_greens_identities),
    ("fields.equilibrium-antisymmetry", _check_equilibrium_antisymmetry),
    ("fields.fluctuation-dissipation", _check_fluctuation_dissipation),
    ("fields.floquet-reduction", _check_floquet_reduction),
    ("fields.diffusion-psd", _check_diffusion_psd),
    ("transport.zero-bias", _check_transport_zero_bias),
    ("transport.cross-check", _check_transport_cross),
    ("dynamics.lorentz-energy-conservation", _check_lorentz_conservation),
    ("dynamics.random-force-covariance", _check_random_force_covariance),
]


def cmd_validate(cfg: RunConfig, threads: int) -> int:
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    report = []
    for name, fn in _CHECKS:
        try:
            fn(cfg)
            report.append({"name": name, "pass": True, "detail": ""})
        except Exception as exc:  # any failure is a finding, not a crash
            report.append({"name": name, "pass": False, "detail": str(exc)})
    payload = {"config_fingerprint": config_fingerprint(cfg),
               "checks": report,
               "failed": [r["name"] for r in report if not r["pass"]]}
    text = json.dumps(payload, indent=2)
    (out / "validate.json").write_text(text + "\n", encoding="utf-8")
    print(text)
    if payload["failed"]:
        print("failed invariants: " + ", ".join(payload["failed"]),
              file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


_COMMANDS = {
    "friction-map": cmd_friction_map,
    "dynamics": cmd_dynamics,
    "iv-sweep": cmd_iv_sweep,
    "freq-sweep": cmd_freq_sweep,
    "validate": cmd_validate,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="floqef",
        description="Floquet electronic-friction simulation pipeline")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", default=None, help="config file path")
        sp.add_argument("--set", action="append", default=[],
                        metavar="KEY=VALUE", help="override a config entry")
        sp.add_argument("--out", default=None, help="output directory")
        sp.add_argument("--threads", type=int, default=1)
        sp.add_argument("--seed", type=int, default=None,
                        help="override dynamics.master_seed")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, args.set, args.out)
        if args.seed is not None:
            cfg = replace(cfg, dynamics=replace(cfg.dynamics,
                                                master_seed=args.seed))
        return _COMMANDS[args.command](cfg, max(args.threads, 1))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except QuadratureNotConverged as exc:
        print(f"quadrature failure: {exc}", file=sys.stderr)
        return EXIT_QUADRATURE
    except OutOfBounds as exc:
        print(f"dynamics failure: {exc}", file=sys.stderr)
        return EXIT_DYNAMICS


if __name__ == "__main__":
    sys.exit(main())
