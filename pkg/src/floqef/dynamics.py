"""Langevin dynamics under the Floquet EF fields.

Equation of motion per nuclear degree of freedom:

    M * R_ddot = F(R) - gamma(R) * R_dot + dF,    cov(dF) = 2 D(R) / dt

integrated by a stochastic leapfrog: half kick, drift, half kick with the
deterministic force and drag re-evaluated at the updated position and the
random force frozen across the whole step.  Each half kick resolves the
velocity-proportional drag trapezoidally (a Cayley form), so a purely
antisymmetric drag rotates the momentum exactly (kinetic energy preserved
to machine precision), a symmetric drag decays it monotonically for any
step size, and the gamma = 0 limit is plain velocity Verlet.

Every trajectory owns an independent child stream of the master seed, and
per-trajectory observables are reduced in a fixed order, so results are
bit-identical for any worker count.
"""

from __future__ import annotations

import multiprocessing
from dataclasses import dataclass

import numpy as np

from .errors import NotPositiveSemidefinite, OutOfBounds
from .fields import evaluate_sample
from .model import ModelParams
from .quadrature import QuadratureSpec

_PSD_TOL = 1e-10
_TRAJ_CHUNK = 256     # trajectories advanced together (fixed: determinism)
_NOISE_BLOCK = 1024   # steps of noise drawn per generator call


@dataclass(frozen=True)
class TrajectoryState:
    """Phase-space point of one trajectory."""

    r: np.ndarray
    p_momentum: np.ndarray
    t: float

    def kinetic_energy(self, mass: float = 1.0) -> float:
        return float(np.dot(self.p_momentum, self.p_momentum)) / (2.0 * mass)


@dataclass(frozen=True)
class EnsembleStats:
    """Ensemble- and time-averaged observables with standard errors."""

    kinetic_mean: float
    kinetic_stderr: float
    coupling_sq: float
    coupling_sq_stderr: float
    current_mean: float
    current_stderr: float
    n_traj: int
    t_burn: float
    t_total: float


class ConstantFields:
    """Uniform field provider, mainly for integrator tests."""

    def __init__(self, force=(0.0, 0.0), gamma=None, diffusion=None,
                 current=0.0):
        self.force = np.asarray(force, dtype=float)
        self.gamma = (np.zeros((2, 2)) if gamma is None
                      else np.asarray(gamma, dtype=float))
        self.diffusion = (np.zeros((2, 2)) if diffusion is None
                          else np.asarray(diffusion, dtype=float))
        self.current = float(current)

    def sample_batch(self, pts):
        n = np.asarray(pts).reshape(-1, 2).shape[0]
        return {"force": np.broadcast_to(self.force, (n, 2)),
                "gamma": np.broadcast_to(self.gamma, (n, 2, 2)),
                "diffusion": np.broadcast_to(self.diffusion, (n, 2, 2)),
                "current": np.full(n, self.current)}


class HarmonicFields:
    """Bare harmonic restoring force only; for symplectic-limit tests."""

    def __init__(self, p: ModelParams):
        self.center = np.array([-p.lambda_x, -p.lambda_y])

    def sample_batch(self, pts):
        pts = np.asarray(pts, dtype=float).reshape(-1, 2)
        n = pts.shape[0]
        return {"force": -(pts - self.center),
                "gamma": np.zeros((n, 2, 2)),
                "diffusion": np.zeros((n, 2, 2)),
                "current": np.zeros(n)}


class DirectFields:
    """On-the-fly field evaluation (debug flag for small runs; slow)."""

    def __init__(self, p: ModelParams, q: QuadratureSpec):
        self.p = p
        self.q = q

    def sample_batch(self, pts):
        pts = np.asarray(pts, dtype=float).reshape(-1, 2)
        samples = [evaluate_sample(pt, self.p, self.q) for pt in pts]
        return {"force": np.array([s.force for s in samples]),
                "gamma": np.array([s.gamma for s in samples]),
                "diffusion": np.array([s.diffusion for s in samples]),
                "current": np.array([s.local_current for s in samples])}


def _as_provider(fields):
    if hasattr(fields, "sample_batch"):
        return fields
    raise TypeError("fields must expose sample_batch(points)")


def sample_initial_conditions(p: ModelParams, rng: np.random.Generator
                              ) -> TrajectoryState:
    """Boltzmann sample of the bare harmonic potential at temperature kT."""
    z = rng.standard_normal(4)
    r = np.array([-p.lambda_x, -p.lambda_y]) + np.sqrt(p.kt) * z[:2]
    pm = np.sqrt(p.mass * p.kt) * z[2:]
    return TrajectoryState(r=r, p_momentum=pm, t=0.0)


def random_force(diffusion: np.ndarray, dt: float,
                 rng: np.random.Generator) -> np.ndarray:
    """Gaussian random force with covariance 2*D/dt.

    Eigendecomposes D, draws independent normals with std sqrt(2*d_i/dt)
    along each eigUSE axis, and rotates back.
    """
    diffusion = np.asarray(diffusion, dtype=float)
    vals, vecs = np.linalg.eigh(diffusion)
    if np.any(vals < -_PSD_TOL):
        raise NotPositiveSemidefinite(
            f"diffusion eigenvalues {vals} below -{_PSD_TOL:.0e}")
    sig = np.sqrt(2.0 * np.clip(vals, 0.0, None) / dt)
    return vecs @ (sig * rng.standard_normal(2))


# -- batched kernels ---------------------------------------------------------

def _noise_batch(dmat: np.ndarray, z: np.ndarray, dt: float) -> np.ndarray:
    """random_force vectorized over trajectories via closed-form 2x2 eigs."""
    a, b, c = dmat[:, 0, 0], dmat[:, 0, 1], dmat[:, 1, 1]
    half_tr = 0.5 * (a + c)
    s = np.hypot(0.5 * (a - c), b)
    lo = half_tr - s
    if np.any(lo < -_PSD_TOL):
        raise NotPositiveSemidefinite(
            f"diffusion eigenvalue {lo.min():.3e} below -{_PSD_TOL:.0e}")
    theta = 0.5 * np.arctan2(2.0 * b, a - c)
    ct, st = np.cos(theta), np.sin(theta)
    sig_hi = np.sqrt(2.0 * np.clip(half_tr + s, 0.0, None) / dt)
    sig_lo = np.sqrt(2.0 * np.clip(lo, 0.0, None) / dt)
    w_hi = sig_hi * z[:, 0]
    w_lo = sig_lo * z[:, 1]
    return np.stack([ct * w_hi - st * w_lo, st * w_hi + ct * w_lo], axis=1)


def _half_kick(pm: np.ndarray, force: np.ndarray, gam: np.ndarray,
               dt: float, mass: float) -> np.ndarray:
    """Trapezoidal (Cayley) half kick: solves
    (I + b*gamma) p' = (I - b*gamma) p + (dt/2) force,  b = dt/(4M)."""
    b = dt / (4.0 * mass)
    g00, g01 = gam[:, 0, 0], gam[:, 0, 1]
    g10, g11 = gam[:, 1, 0], gam[:, 1, 1]
    rhs0 = pm[:, 0] - b * (g00 * pm[:, 0] + g01 * pm[:, 1]) \
        + 0.5 * dt * force[:, 0]
    rhs1 = pm[:, 1] - b * (g10 * pm[:, 0] + g11 * pm[:, 1]) \
        + 0.5 * dt * force[:, 1]
    det = (1.0 + b * g00) * (1.0 + b * g11) - b * b * g01 * g10
    out0 = ((1.0 + b * g11) * rhs0 - b * g01 * rhs1) / det
    out1 = (-b * g10 * rhs0 + (1.0 + b * g00) * rhs1) / det
    return np.stack([out0, out1], axis=1)


def _advance_chunk(r, pm, provider, p, dt, n_steps, burn_steps, rngs,
                   stochastic, traj_offset, record_every=0):
    """Advance a trajectory chunk; returns per-trajectory time averages."""
    n = r.shape[0]
    ke_sum = np.zeros(n)
    y_sum = np.zeros(n)
    i_sum = np.zeros(n)
    rec_r, rec_pm, rec_t = [], [], []

    def lookup(points, t_now):
        try:
            return provider.sample_batch(points)
        except OutOfBounds as exc:
            row = exc.trajectory or 0
            raise OutOfBounds(
                f"trajectory {traj_offset + row} left the grid at "
                f"t={t_now:.3f}: {exc}",
                point=exc.point, trajectory=traj_offset + row,
                time=t_now) from exc

    if record_every:
        rec_r.append(r.copy())
        rec_pm.append(pm.copy())
        rec_t.append(0.0)

    bundle = lookup(r, 0.0)
    noise = None
    for k in range(n_steps):
        t_now = k * dt
        if stochastic:
            j = k % _NOISE_BLOCK
            if j == 0:
                m = min(_NOISE_BLOCK, n_steps - k)
                noise = np.stack(
                    [rng.standard_normal((m, 2)) for rng in rngs])
            df = _noise_batch(bundle["diffusion"], noise[:, j], dt)
        else:
            df = 0.0
        p_half = _half_kick(pm, bundle["force"] + df, bundle["gamma"],
                            dt, p.mass)
        r = r + dt * p_half / p.mass
        bundle = lookup(r, t_now + dt)
        pm = _half_kick(p_half, bundle["force"] + df, bundle["gamma"],
                        dt, p.mass)
        if k + 1 > burn_steps:
            ke_sum += 0.5 * np.sum(pm * pm, axis=1) / p.mass
            y_sum += r[:, 1]
            i_sum += bundle["current"]
        if record_every and (k + 1) % record_every == 0:
            rec_r.append(r.copy())
            rec_pm.append(pm.copy())
            rec_t.append((k + 1) * dt)

    n_avg = max(n_steps - burn_steps, 1)
    out = (ke_sum / n_avg, y_sum / n_avg, i_sum / n_avg)
    if record_every:
        return out, (np.array(rec_t), np.stack(rec_r, axis=1),
                     np.stack(rec_pm, axis=1))
    return out, None


def step(state: TrajectoryState, fields, p: ModelParams, dt: float,
         rng: np.random.Generator, stochastic: bool = True
         ) -> TrajectoryState:
    """Advance a single trajectory by one leapfrog step."""
    provider = _as_provider(fields)
    r = state.r.reshape(1, 2).copy()
    pm = state.p_momentum.reshape(1, 2).copy()
    bundle = provider.sample_batch(r)
    if stochastic:
        df = _noise_batch(bundle["diffusion"], rng.standard_normal((1, 2)), dt)
    else:
        df = 0.0
    p_half = _half_kick(pm, bundle["force"] + df, bundle["gamma"], dt, p.mass)
    r = r + dt * p_half / p.mass
    bundle = provider.sample_batch(r)
    pm = _half_kick(p_half, bundle["force"] + df, bundle["gamma"], dt, p.mass)
    return TrajectoryState(r=r[0], p_momentum=pm[0], t=state.t + dt)


def _init_pool_worker():
    from ._blas import set_blas_threads
    set_blas_threads(1)


def _trajectory_streams(master_seed: int, n_traj: int):
    return np.random.SeedSequence(master_seed).spawn(n_traj)


def _chunk_task(args):
    (provider, p, dt, n_steps, burn_steps, master_seed, n_traj,
     start, count, stochastic) = args
    streams = _trajectory_streams(master_seed, n_traj)[start:start + count]
    rngs = [np.random.default_rng(s) for s in streams]
    ic = np.stack([rng.standard_normal(4) for rng in rngs])
    center = np.array([-p.lambda_x, -p.lambda_y])
    r = center[None, :] + np.sqrt(p.kt) * ic[:, :2]
    pm = np.sqrt(p.mass * p.kt) * ic[:, 2:]
    out, _ = _advance_chunk(r, pm, provider, p, dt, n_steps, burn_steps,
                            rngs, stochastic, start)
    return start, out


def run_ensemble(p: ModelParams, fields, n_traj: int, dt: float,
                 t_burn: float, t_total: float, master_seed: int,
                 stochastic: bool = True, threads: int = 1) -> EnsembleStats:
    """Trajectory-ensemble averages over the window (t_burn, t_total]."""
    if not (t_total > t_burn >= 0):
        raise ValueError("need t_total > t_burn >= 0")
    provider = _as_provider(fields)
    n_steps = int(round(t_total / dt))
    burn_steps = int(round(t_burn / dt))

    tasks = []
    start = 0
    while start < n_traj:
        count = min(_TRAJ_CHUNK, n_traj - start)
        tasks.append((provider, p, dt, n_steps, burn_steps, master_seed,
                      n_traj, start, count, stochastic))
        start += count

    results = {}
    try:
        if threads > 1 and len(tasks) > 1:
            ctx = multiprocessing.get_context("fork")
            with ctx.Pool(min(threads, len(tasks)),
                          initializer=_init_pool_worker) as pool:
                for s, out in pool.imap(_chunk_task, tasks):
                    results[s] = out
        else:
            for task in tasks:
                s, out = _chunk_task(task)
                results[s] = out
    except OutOfBounds as exc:
        exc.partial = (_reduce_stats(results, tasks, t_burn, t_total)
                       if results else None)
        raise

    return _reduce_stats(results, tasks, t_burn, t_total)


def _reduce_stats(results, tasks, t_burn, t_total) -> EnsembleStats:
    order = sorted(results)
    ke = np.concatenate([results[s][0] for s in order])
    ybar = np.concatenate([results[s][1] for s in order])
    cur = np.concatenate([results[s][2] for s in order])
    n = ke.shape[0]

    def mean_stderr(v):
        m = float(np.mean(v))
        se = float(np.std(v, ddof=1) / np.sqrt(n)) if n > 1 else 0.0
        return m, se

    ke_m, ke_se = mean_stderr(ke)
    cur_m, cur_se = mean_stderr(cur)
    y_m, y_se = mean_stderr(ybar)
    return EnsembleStats(
        kinetic_mean=ke_m, kinetic_stderr=ke_se,
        coupling_sq=y_m * y_m, coupling_sq_stderr=2.0 * abs(y_m) * y_se,
        current_mean=cur_m, current_stderr=cur_se,
        n_traj=n, t_burn=t_burn, t_total=t_total)


def run_trajectories(p: ModelParams, fields, n_traj: int, dt: float,
                     t_total: float, master_seed: int,
                     stochastic: bool = True, record_every: int = 10):
    """Integrate a small bundle of trajectories, recording decimated
    (t, R, P) samples: returns (times (m,), r (n, m, 2), p (n, m, 2))."""
    provider = _as_provider(fields)
    n_steps = int(round(t_total / dt))
    streams = _trajectory_streams(master_seed, n_traj)
    rngs = [np.random.default_rng(s) for s in streams]
    ic = np.stack([rng.standard_normal(4) for rng in rngs])
    center = np.array([-p.lambda_x, -p.lambda_y])
    r = center[None, :] + np.sqrt(p.kt) * ic[:, :2]
    pm = np.sqrt(p.mass * p.kt) * ic[:, 2:]
    _, rec = _advance_chunk(r, pm, provider, p, dt, n_steps, 0, rngs,
                            stochastic, 0, record_every=record_every)
    times, rec_r, rec_pm = rec
    return times, rec_r, rec_pm
