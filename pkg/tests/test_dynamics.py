import numpy as np
import pytest

from floqef import NotPositiveSemidefinite, OutOfBounds, QuadratureSpec
from floqef.dynamics import (ConstantFields, HarmonicFields, TrajectoryState,
                             _noise_batch, random_force, run_ensemble,
                             run_trajectories, sample_initial_conditions, step)
from floqef.grid import GridSpec, precompute


def test_initial_conditions_statistics(static_eq):
    rng = np.random.default_rng(5)
    n = 100_000
    rs = np.empty((n, 2))
    kes = np.empty(n)
    for i in range(n):
        s = sample_initial_conditions(static_eq, rng)
        rs[i] = s.r
        kes[i] = s.kinetic_energy()
    center = np.array([-static_eq.lambda_x, -static_eq.lambda_y])
    # 3 sigma of the mean estimator
    bound = 3.0 * np.sqrt(static_eq.kt / n)
    assert np.abs(rs.mean(axis=0) - center).max() <= bound
    assert abs(kes.mean() - static_eq.kt) <= 0.01 * static_eq.kt
    assert np.abs(rs.std(axis=0) - np.sqrt(static_eq.kt)).max() <= 0.01


def test_initial_conditions_deterministic(static_eq):
    a = sample_initial_conditions(static_eq, np.random.default_rng(42))
    b = sample_initial_conditions(static_eq, np.random.default_rng(42))
    assert np.array_equal(a.r, b.r)
    assert np.array_equal(a.p_momentum, b.p_momentum)
    assert a.t == 0.0


def test_random_force_zero_matrix():
    rng = np.random.default_rng(0)
    assert np.array_equal(random_force(np.zeros((2, 2)), 0.01, rng),
                          np.zeros(2))


def test_random_force_isotropic_variance():
    rng = np.random.default_rng(1)
    d, dt, n = 0.35, 0.01, 40_000
    draws = np.array([random_force(np.diag([d, d]), dt, rng)
                      for _ in range(n)])
    var = draws.var(axis=0)
    assert np.abs(var - 2 * d / dt).max() <= 0.05 * (2 * d / dt)


def test_random_force_rejects_indefinite():
    rng = np.random.default_rng(2)
    with pytest.raises(NotPositiveSemidefinite):
        random_force(np.array([[1.0, 0.0], [0.0, -1e-6]]), 0.01, rng)


def test_batched_noise_covariance_one_percent():
    # acceptance-scale check: 1e6 draws from a generic anisotropic PSD
    dmat = np.array([[0.8, 0.3], [0.3, 0.5]])
    rng = np.random.default_rng(11)
    n, dt = 1_000_000, 0.01
    z = rng.standard_normal((n, 2))
    forces = _noise_batch(np.broadcast_to(dmat, (n, 2, 2)), z, dt)
    cov = forces.T @ forces / n
    target = 2.0 * dmat / dt
    assert np.abs(cov - target).max() <= 0.01 * np.abs(target).max()


def test_batched_noise_matches_single_draw_distribution():
    dmat = np.array([[0.8, 0.3], [0.3, 0.5]])
    rng = np.random.default_rng(3)
    singles = np.array([random_force(dmat, 0.01, rng) for _ in range(50_000)])
    cov = singles.T @ singles / singles.shape[0]
    target = 2.0 * dmat / 0.01
    assert np.abs(cov - target).max() <= 0.03 * np.abs(target).max()


def test_harmonic_limit_conserves_energy(static_eq):
    # gamma = 0, D = 0: plain velocity Verlet on the bare oscillator
    fields = HarmonicFields(static_eq)
    times, rs, ps = run_trajectories(static_eq, fields, n_traj=1, dt=0.01,
                                     t_total=100 * 2 * np.pi,
                                     master_seed=7, stochastic=False,
                                     record_every=100)
    center = np.array([-static_eq.lambda_x, -static_eq.lambda_y])
    energy = (0.5 * np.sum(ps[0] ** 2, axis=1)
              + 0.5 * np.sum((rs[0] - center) ** 2, axis=1))
    assert np.abs(energy - energy[0]).max() <= 1e-4 * energy[0]


def test_lorentz_like_friction_preserves_momentum_norm(static_eq):
    fields = ConstantFields(gamma=[[0.0, 0.8], [-0.8, 0.0]])
    state = TrajectoryState(r=np.zeros(2), p_momentum=np.array([0.7, -0.4]),
                            t=0.0)
    rng = np.random.default_rng(0)
    ke0 = state.kinetic_energy()
    for _ in range(500):
        new = step(state, fields, static_eq, 0.01, rng, stochastic=False)
        assert abs(new.kinetic_energy() - state.kinetic_energy()) \
            <= 1e-10 * state.kinetic_energy()
        state = new
    assert abs(state.kinetic_energy() - ke0) <= 1e-9 * ke0


def test_symmetric_friction_decays_monotonically(static_eq):
    fields = ConstantFields(gamma=[[0.5, 0.1], [0.1, 0.4]])
    state = TrajectoryState(r=np.zeros(2), p_momentum=np.array([1.0, 0.3]),
                            t=0.0)
    rng = np.random.default_rng(0)
    for _ in range(300):
        new = step(state, fields, static_eq, 0.01, rng, stochastic=False)
        assert new.kinetic_energy() < state.kinetic_energy()
        state = new


def test_ensemble_bit_identical_across_workers(static_eq):
    fields = ConstantFields(force=(0.1, -0.2),
                            gamma=[[0.3, 0.0], [0.0, 0.3]],
                            diffusion=[[0.15, 0.0], [0.0, 0.15]],
                            current=0.5)
    kwargs = dict(n_traj=300, dt=0.01, t_burn=1.0, t_total=5.0,
                  master_seed=99)
    s1 = run_ensemble(static_eq, fields, threads=1, **kwargs)
    s2 = run_ensemble(static_eq, fields, threads=2, **kwargs)
    assert s1 == s2


def test_ensemble_seed_changes_results(static_eq):
    fields = ConstantFields(diffusion=np.eye(2) * 0.2,
                            gamma=np.eye(2) * 0.4)
    base = dict(n_traj=64, dt=0.01, t_burn=0.5, t_total=2.0)
    a = run_ensemble(static_eq, fields, master_seed=1, **base)
    b = run_ensemble(static_eq, fields, master_seed=2, **base)
    assert a.kinetic_mean != b.kinetic_mean


def test_out_of_bounds_reports_trajectory_and_time(static_eq, quad_coarse):
    spec = GridSpec(x_min=-3.4, x_max=-2.6, y_min=-2.4, y_max=-1.6,
                    nx=5, ny=5)
    grid = precompute(static_eq, quad_coarse, spec)
    with pytest.raises(OutOfBounds) as excinfo:
        run_ensemble(static_eq, grid, n_traj=16, dt=0.01, t_burn=0.0,
                     t_total=50.0, master_seed=3)
    exc = excinfo.value
    assert exc.trajectory is not None and exc.time is not None


def test_dt_halving_within_stderr(static_eq, quad_coarse):
    # integrator convergence: halving the step moves the ensemble kinetic
    # energy by less than its statistical uncertainty
    spec = GridSpec(x_min=-6.5, x_max=0.5, y_min=-5.5, y_max=1.5,
                    nx=29, ny=29, out_of_bounds_policy="clamp")
    grid = precompute(static_eq, quad_coarse, spec, threads=2)
    base = dict(n_traj=300, t_burn=50.0, t_total=250.0, master_seed=77,
                threads=2)
    coarse = run_ensemble(static_eq, grid, dt=0.01, **base)
    fine = run_ensemble(static_eq, grid, dt=0.005, **base)
    sigma = np.hypot(coarse.kinetic_stderr, fine.kinetic_stderr)
    assert abs(coarse.kinetic_mean - fine.kinetic_mean) <= sigma


def test_invalid_time_window_rejected(static_eq):
    with pytest.raises(ValueError):
        run_ensemble(static_eq, ConstantFields(), n_traj=2, dt=0.01,
                     t_burn=5.0, t_total=1.0, master_seed=0)


def test_run_trajectories_shapes(static_eq):
    fields = HarmonicFields(static_eq)
    times, rs, ps = run_trajectories(static_eq, fields, n_traj=3, dt=0.01,
                                     t_total=1.0, master_seed=5,
                                     stochastic=False, record_every=10)
    assert rs.shape == (3, len(times), 2)
    assert ps.shape == rs.shape
    assert times[0] == 0.0 and times[-1] == pytest.approx(1.0)
