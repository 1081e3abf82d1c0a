"""Driven two-level junction model in reduced units.

Units: hbar = k_B = e = 1, nuclear mass M = 1 by default, and both bare
oscillator frequencies equal 1. The molecule is a d-level system (d = 2 for
the physical model, d = 1 for the single-level oracle preset) coupled to two
wide-band leads and driven through its off-diagonal element by A*cos(omega*t).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError


@dataclass(frozen=True)
class ModelParams:
    """Physical and numerical parameters of the junction and its driving.

    Defaults follow the baseline parameter set used throughout the study:
    kT = 0.5, level splitting 3, hybridization 1, potential shifts (3, 2).
    """

    kt: float = 0.5
    delta: float = 3.0
    amp: float = 0.0
    omega: float = 1.0
    gamma_tilde: float = 1.0
    mu_left: float = 0.0
    mu_right: float = 0.0
    lambda_x: float = 3.0
    lambda_y: float = 2.0
    mass: float = 1.0
    n_floquet: int = 5
    d: int = 2

    def __post_init__(self):
        checks = [
            (self.kt > 0, "kt must be > 0"),
            (self.gamma_tilde > 0, "gamma_tilde must be > 0"),
            (self.mass > 0, "mass must be > 0"),
            (int(self.n_floquet) == self.n_floquet and self.n_floquet >= 0,
             "n_floquet must be a non-negative integer"),
            (self.d in (1, 2), "d must be 1 or 2"),
            (self.omega > 0 or self.amp == 0.0,
             "omega must be > 0 when amp != 0"),
        ]
        for ok, msg in checks:
            if not ok:
                raise ConfigError(msg)
        for name in ("kt", "delta", "amp", "omega", "gamma_tilde",
                     "mu_left", "mu_right", "lambda_x", "lambda_y", "mass"):
            if not math.isfinite(getattr(self, name)):
                raise ConfigError(f"{name} must be finite")

    @property
    def n_replicas(self) -> int:
        return 2 * self.n_floquet + 1

    @property
    def dim(self) -> int:
        """Dimension d*(2N+1) of the Floquet-space matrices."""
        return self.d * self.n_replicas

    @property
    def period(self) -> float:
        return 2.0 * math.pi / self.omega


@dataclass(frozen=True)
class NuclearPoint:
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ConfigError("nuclear coordinates must be finite")

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y])


def as_point(r) -> NuclearPoint:
    """Coerce a NuclearPoint, (x, y) pair, or length-2 array."""
    if isinstance(r, NuclearPoint):
        return r
    x, y = np.asarray(r, dtype=float)
    return NuclearPoint(float(x), float(y))


def system_hamiltonian(r, t: float, p: ModelParams) -> np.ndarray:
    """Instantaneous system Hamiltonian h_s(R, t), Hermitian d x d."""
    r = as_point(r)
    if p.d == 1:
        return np.array([[r.x + p.delta]])
    coupling = r.y + p.amp * math.cos(p.omega * t)
    diag = r.x + p.delta
    return np.array([[diag, coupling], [coupling, -diag]])


def fourier_blocks(r, p: ModelParams) -> dict[int, np.ndarray]:
    """Fourier components h^(n) of h_s(R, t) over one driving period.

    Cosine driving makes the expansion exact with blocks only at n = 0, +-1;
    all |n| >= 2 vanish identically.
    """
    r = as_point(r)
    if p.d == 1:
        return {0: np.array([[r.x + p.delta]]),
                1: np.zeros((1, 1)), -1: np.zeros((1, 1))}
    diag = r.x + p.delta
    h0 = np.array([[diag, r.y], [r.y, -diag]])
    h1 = 0.5 * p.amp * np.array([[0.0, 1.0], [1.0, 0.0]])
    return {0: h0, 1: h1, -1: h1.copy()}


def nuclear_gradients(p: ModelParams) -> tuple[np.ndarray, np.ndarray]:
    """Constant gradients (dh/dx, dh/dy) of the system Hamiltonian."""
    if p.d == 1:
        return np.array([[1.0]]), np.array([[0.0]])
    return (np.array([[1.0, 0.0], [0.0, -1.0]]),
            np.array([[0.0, 1.0], [1.0, 0.0]]))


def bare_potential(r, p: ModelParams) -> tuple[float, np.ndarray]:
    """Bare harmonic nuclear potential U(R) and its gradient."""
    r = as_point(r)
    u = 0.5 * r.x**2 + p.lambda_x * r.x + 0.5 * r.y**2 + p.lambda_y * r.y
    grad = np.array([r.x + p.lambda_x, r.y + p.lambda_y])
    return u, grad


def hybridization_matrices(p: ModelParams) -> tuple[np.ndarray, np.ndarray]:
    """Wide-band lead couplings (Gamma_L, Gamma_R).

    For d = 2, orbital 1 couples to the left lead and orbital 2 to the right.
    The d = 1 oracle preset splits the coupling symmetrically between leads.
    """
    gt = p.gamma_tilde
    if p.d == 1:
        half = np.array([[0.5 * gt]])
        return half, half.copy()
    return np.diag([gt, 0.0]), np.diag([0.0, gt])
