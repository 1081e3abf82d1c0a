"""Shared energy-axis quadrature for all Green's-function integrals.

Every observable here is an integral over the real energy axis of a smooth
integrand built from wide-band Green's functions: analytic in a strip of
half-width gamma_tilde/2 around the axis, decaying at least as 1/eps^2
toward -infinity and exponentially (through Fermi factors) toward
+infinity.  The scheme:

  * composite trapezoid on [-E, +E] with E = e_max + |delta| + max|mu| +
    (N+1)*omega and step <= de.  For integrands analytic in a strip the
    trapezoid converges geometrically, so the dominant core error is the
    Euler-Maclaurin endpoint term (h^2/12)(g'(E) - g'(-E)), which is removed
    analytically using one-sided finite differences of the sampled values.
  * algebraic tails beyond +-E folded in exactly via the substitution
    eps = +-1/u, which maps them onto finite intervals with a smooth
    integrand; fixed 32-point Gauss-Legendre handles those to near machine
    precision.

The reported error estimate is the difference against the step-doubled
core evaluation (same samples, every second point), which detects an
under-resolved step without extra integrand evaluations.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, QuadratureNotConverged
from .model import ModelParams

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(32)

# Components of a bundled integrand share one physical context; a component
# far below the bundle scale (far off-resonant tails, symmetry-suppressed
# entries) is certified relative to _SMALL_COMPONENT of that scale instead
# of its own near-zero magnitude, with an absolute roundoff floor for
# exactly-zero integrals (odd integrands, zero bias).
_SMALL_COMPONENT = 1e-3
_ABS_ERR_FLOOR = 1e-12


@dataclass(frozen=True)
class QuadratureSpec:
    """Controls the energy quadrature: window half-width beyond the spectral
    range, base step, and relative convergence tolerance."""

    e_max: float = 20.0
    de: float = 0.05
    tail_tol: float = 1e-6

    def __post_init__(self):
        if not (self.e_max > 0 and self.de > 0 and self.tail_tol > 0):
            raise ConfigError("e_max, de and tail_tol must all be > 0")


def energy_window(p: ModelParams, q: QuadratureSpec) -> float:
    """Half-width of the core integration window for this parameter set."""
    mu_max = max(abs(p.mu_left), abs(p.mu_right))
    return q.e_max + abs(p.delta) + mu_max + (p.n_floquet + 1) * p.omega


def energy_grid(p: ModelParams, q: QuadratureSpec) -> np.ndarray:
    """Symmetric core grid [-E, E] with an even number of intervals."""
    e = energy_window(p, q)
    n = 2 * int(np.ceil(e / q.de))
    return np.linspace(-e, e, n + 1)


def _trapezoid_em(vals: np.ndarray, h: float) -> np.ndarray:
    """Trapezoid over axis 0 with the h^2 Euler-Maclaurin endpoint fix."""
    core = h * (vals.sum(axis=0) - 0.5 * (vals[0] + vals[-1]))
    gp_hi = (3.0 * vals[-1] - 4.0 * vals[-2] + vals[-3]) / (2.0 * h)
    gp_lo = (-3.0 * vals[0] + 4.0 * vals[1] - vals[2]) / (2.0 * h)
    return core - h * h / 12.0 * (gp_hi - gp_lo)


def energy_quadrature_vec(integrand, p: ModelParams, q: QuadratureSpec,
                          check: bool = True):
    """Integrate a vectorized integrand over the whole energy axis.

    `integrand` maps an (ne,) energy array to an (ne,) or (ne, k) array.
    Returns (value, error_estimate) with the integrand's trailing shape.
    Raises QuadratureNotConverged when the step-doubled difference exceeds
    tail_tol relative to the component scale (with an absolute floor).
    """
    eps = energy_grid(p, q)
    h = eps[1] - eps[0]
    vals = np.asarray(integrand(eps))
    e = eps[-1]

    # tails: eps = +-1/u for u in (0, 1/E]
    u = 0.5 / e * (_GL_NODES + 1.0)
    w = 0.5 / e * _GL_WEIGHTS
    tail_shape = (u.shape[0],) + vals.shape[1:]
    lo = np.asarray(integrand(-1.0 / u)).reshape(tail_shape)
    hi = np.asarray(integrand(1.0 / u)).reshape(tail_shape)
    wexp = w.reshape((-1,) + (1,) * (vals.ndim - 1))
    tails = np.sum(wexp * (lo + hi) / (u**2).reshape(wexp.shape), axis=0)

    value = _trapezoid_em(vals, h) + tails
    coarse = _trapezoid_em(vals[::2], 2.0 * h) + tails
    err = np.abs(value - coarse)

    if check:
        scale = np.maximum(np.abs(value),
                           _SMALL_COMPONENT * np.abs(value).max())
        threshold = np.maximum(q.tail_tol * scale, _ABS_ERR_FLOOR)
        if np.any(err > threshold):
            worst = float(np.max(err / threshold)) * q.tail_tol
            raise QuadratureNotConverged(
                f"energy quadrature not converged: relative error estimate "
                f"{worst:.3e} exceeds tail_tol {q.tail_tol:.1e} "
                f"(de={q.de}, e_max={q.e_max})")
    return value, err


def energy_quadrature(integrand, p: ModelParams, q: QuadratureSpec,
                      check: bool = True):
    """Scalar-integrand convenience wrapper around energy_quadrature_vec."""
    value, err = energy_quadrature_vec(integrand, p, q, check=check)
    return complex(value), float(err)
