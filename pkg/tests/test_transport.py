import dataclasses

import numpy as np

from floqef import ModelParams
from floqef.transport import local_current, transmission


def test_zero_bias_current_vanishes(quad):
    p = ModelParams(amp=1.0, omega=1.0, n_floquet=5, mu_left=0.0,
                    mu_right=0.0)
    cur = local_current((-3.0, -2.0), p, quad)
    assert abs(cur.i_symmetric) <= 1e-12
    assert abs(cur.i_general) <= 1e-12


def test_general_vs_symmetric_agreement(quad, rng):
    for _ in range(20):
        bias = float(rng.uniform(0.2, 4.0))
        p = ModelParams(amp=1.0, omega=1.0, n_floquet=5, mu_left=bias,
                        mu_right=-bias)
        r = (float(rng.uniform(-6, 1)), float(rng.uniform(-5, 2)))
        cur = local_current(r, p, quad)
        scale = max(abs(cur.i_symmetric), 1e-12)
        assert abs(cur.i_general - cur.i_symmetric) <= 1e-6 * scale


def test_current_odd_under_bias_reversal(quad):
    for bias in (0.7, 2.5):
        fwd = ModelParams(amp=1.0, omega=1.0, n_floquet=4, mu_left=bias,
                          mu_right=-bias)
        rev = dataclasses.replace(fwd, mu_left=-bias, mu_right=bias)
        r = (-3.0, -2.0)
        i_fwd = local_current(r, fwd, quad).i_symmetric
        i_rev = local_current(r, rev, quad).i_symmetric
        assert abs(i_fwd + i_rev) <= 1e-8 * max(abs(i_fwd), 1e-12)


def test_positive_current_for_positive_bias(quad):
    p = ModelParams(amp=0.0, n_floquet=0, mu_left=1.0, mu_right=-1.0)
    assert local_current((-3.0, -2.0), p, quad).i_symmetric > 0.0


def test_transmission_trace_properties(rng):
    p = ModelParams(amp=1.0, omega=1.0, n_floquet=3, mu_left=1.0,
                    mu_right=-1.0)
    bound = p.n_replicas * p.d
    for _ in range(10):
        eps = float(rng.uniform(-6, 6))
        t = transmission(eps, (-2.0, -1.0), p)
        tr = np.trace(t).real
        assert -1e-10 <= tr <= bound + 1e-9


def test_transmission_vanishes_when_decoupled():
    p = ModelParams(amp=0.0, n_floquet=0)
    object.__setattr__(p, "gamma_tilde", 1e-6)
    t = transmission(0.5, (-3.0, -2.0), p)
    assert np.trace(t).real < 1e-10


def test_undriven_transmission_is_replica_sum_of_static():
    p = ModelParams(amp=0.0, n_floquet=2, omega=0.9)
    p0 = dataclasses.replace(p, n_floquet=0)
    r, eps = (-2.5, -1.5), 0.4
    tr = np.trace(transmission(eps, r, p)).real
    expected = sum(
        np.trace(transmission(eps - n * p.omega, r, p0)).real
        for n in range(-2, 3))
    assert abs(tr - expected) <= 1e-10 * max(abs(expected), 1e-12)


def test_undriven_current_independent_of_floquet_setup(quad):
    base = ModelParams(amp=0.0, n_floquet=0, mu_left=1.0, mu_right=-1.0)
    ref = local_current((-3.0, -2.0), base, quad).i_symmetric
    for n, om in ((1, 0.7), (3, 2.5), (5, 1.0)):
        p = dataclasses.replace(base, n_floquet=n, omega=om)
        cur = local_current((-3.0, -2.0), p, quad).i_symmetric
        assert abs(cur - ref) <= 1e-10 * abs(ref)


def test_interface_currents_balance(quad):
    # charge conservation: the Meir-Wingreen current into the molecule from
    # the left interface equals minus the one from the right interface
    from floqef.floquet import (build_floquet_hybridization, greens_at,
                                lead_occupation)
    from floqef.quadrature import energy_quadrature_vec

    p = ModelParams(amp=1.0, omega=1.0, n_floquet=4, mu_left=1.5,
                    mu_right=-1.5)
    glf, grf = build_floquet_hybridization(p)
    r = (-2.5, -1.0)

    def integrand(eps):
        out = np.empty((eps.shape[0], 2), dtype=complex)
        for i, e in enumerate(eps):
            g = greens_at(float(e), r, p)
            fl = lead_occupation(float(e), "L", p)
            fr = lead_occupation(float(e), "R", p)
            out[i, 0] = 1j * np.trace(glf @ (g.g_lesser + fl @ (g.g_r - g.g_a)))
            out[i, 1] = 1j * np.trace(grf @ (g.g_lesser + fr @ (g.g_r - g.g_a)))
        return out

    vals, _ = energy_quadrature_vec(integrand, p, quad, check=False)
    i_left, i_right = vals.real / (2 * np.pi * p.n_replicas)
    assert abs(i_left + i_right) <= 1e-10 * max(abs(i_left), 1e-12)
    assert i_left > 0.0


def test_current_nondecreasing_in_coupling(quad):
    # linear-response regime: small bias, three-point coupling scan
    values = []
    for gt in (0.5, 1.0, 1.5):
        p = ModelParams(amp=0.0, n_floquet=0, gamma_tilde=gt, mu_left=0.1,
                        mu_right=-0.1)
        values.append(local_current((-3.0, -2.0), p, quad).i_symmetric)
    assert values[0] <= values[1] <= values[2]
