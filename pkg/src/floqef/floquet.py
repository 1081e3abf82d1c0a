"""Floquet-space operators and nonequilibrium Green's functions.

Matrices live in the composite (replica, orbital) basis with replica-major
ordering: basis index a = (n + N)*d + i for replica n in [-N, N] and orbital
i in [0, d).  Block (m, m') of the Floquet Hamiltonian carries the Fourier
component h^(m - m') plus the diagonal replica shift m*omega.

Sign conventions (wide band):
    Sigma_r = -(i/2) (Gamma_L + Gamma_R)            energy independent
    Sigma_< = +i sum_z Gamma_z^F f_z^F(eps)
    Sigma_> = -i sum_z Gamma_z^F (1 - f_z^F(eps))
so that Sigma_> - Sigma_< = -i Gamma_tot^F and the lesser function carries
positive occupation (-i G_< is PSD).  A single occupied level then feels the
mean force -occupation * dh, and the equilibrium friction comes out positive;
the d = 1 oracle test pins this down.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SingularSystem
from .model import ModelParams, as_point, fourier_blocks, hybridization_matrices, nuclear_gradients

_SOLVE_RESIDUAL_TOL = 1e-10


def fermi(x):
    """Fermi function 1/(e^x + 1), overflow-safe for any real x."""
    return 0.5 * (1.0 - np.tanh(0.5 * np.asarray(x, dtype=float)))


def replica_numbers(p: ModelParams) -> np.ndarray:
    """Replica index n of each composite basis state, shape (dim,)."""
    return np.repeat(np.arange(-p.n_floquet, p.n_floquet + 1), p.d)


def build_floquet_hamiltonian(r, p: ModelParams) -> np.ndarray:
    """Floquet Hamiltonian h_s^F(R): Toeplitz blocks h^(m-m') + m*omega on
    the块 diagonal. Real symmetric for this model."""
    blocks = fourier_blocks(r, p)
    d, nrep = p.d, p.n_replicas
    hf = np.zeros((p.dim, p.dim))
    eye = np.eye(d)
    for bi in range(nrep):
        n = bi - p.n_floquet
        sl = slice(bi * d, (bi + 1) * d)
        hf[sl, sl] = blocks[0] + n * p.omega * eye
        if bi + 1 < nrep:
            sl_up = slice((bi + 1) * d, (bi + 2) * d)
            hf[sl, sl_up] = blocks[-1]
            hf[sl_up, sl] = blocks[1]
    return hf


def build_floquet_hybridization(p: ModelParams) -> tuple[np.ndarray, np.ndarray]:
    """(Gamma_L^F, Gamma_R^F): lead couplings replicated across replicas."""
    gl, gr = hybridization_matrices(p)
    eye = np.eye(p.n_replicas)
    return np.kron(eye, gl), np.kron(eye, gr)


def lead_mask_diagonals(p: ModelParams) -> tuple[np.ndarray, np.ndarray]:
    """Diagonals of Gamma_L^F and Gamma_R^F (both are diagonal matrices)."""
    gl, gr = hybridization_matrices(p)
    return (np.tile(np.diag(gl), p.n_replicas),
            np.tile(np.diag(gr), p.n_replicas))


def lead_occupation(eps: float, lead: str, p: ModelParams) -> np.ndarray:
    """Diagonal Floquet Fermi operator f(eps - n*omega - mu_lead)."""
    mu = {"L": p.mu_left, "R": p.mu_right}[lead]
    vals = fermi((eps - replica_numbers(p) * p.omega - mu) / p.kt)
    return np.diag(vals)


def self_energies(eps: float, p: ModelParams):
    """(Sigma_r^F, Sigma_<^F, Sigma_>^F) at energy eps, wide band."""
    glf, grf = build_floquet_hybridization(p)
    fl = lead_occupation(eps, "L", p)
    fr = lead_occupation(eps, "R", p)
    sigma_r = -0.5j * (glf + grf)
    sigma_lesser = 1j * (glf @ fl + grf @ fr)
    sigma_greater = -1j * (glf @ (np.eye(p.dim) - fl) + grf @ (np.eye(p.dim) - fr))
    return sigma_r, sigma_lesser, sigma_greater


@dataclass(frozen=True)
class GreenSet:
    """Retarded/advanced/lesser/greater Floquet Green's functions at one
    (energy, nuclear point)."""

    g_r: np.ndarray
    g_a: np.ndarray
    g_lesser: np.ndarray
    g_greater: np.ndarray


def greens_at(eps: float, r, p: ModelParams) -> GreenSet:
    """Solve for the GreenSet at (eps, R).

    The retarded function comes from a factor-and-solve on
    (eps - h^F - Sigma_r); the advanced one is its conjugate transpose,
    never a second solve.
    """
    hf = build_floquet_hamiltonian(r, p)
    sigma_r, sigma_lesser, sigma_greater = self_energies(eps, p)
    lhs = eps * np.eye(p.dim) - hf - sigma_r
    try:
        g_r = np.linalg.solve(lhs, np.eye(p.dim, dtype=complex))
    except np.linalg.LinAlgError as exc:
        raise SingularSystem(f"retarded solve failed at eps={eps}: {exc}") from exc
    residual = np.abs(lhs @ g_r - np.eye(p.dim)).max()
    if residual > _SOLVE_RESIDUAL_TOL:
        raise SingularSystem(
            f"retarded solve residual {residual:.2e} at eps={eps}; "
            "is gamma_tilde misconfigured?")
    g_a = g_r.conj().T
    return GreenSet(g_r=g_r, g_a=g_a,
                    g_lesser=g_r @ sigma_lesser @ g_a,
                    g_greater=g_r @ sigma_greater @ g_a)


def denergy_retarded(g_r: np.ndarray) -> np.ndarray:
    """d/d(eps) of the retarded function; -G_r^2 in the wide band."""
    return -(g_r @ g_r)


class FloquetContext:
    """Eigen-decomposed Floquet problem at one nuclear point.

    With the scalar wide-band self-energy, every Green's function is
    V diag(...) V^T in the eigenbasis of h^F, so all trace integrands reduce
    to elementwise products of small matrices plus one batched matmul per
    Fermi-weighted factor.  This is the production path for field and
    current evaluation; `greens_at` above is the plain reference
    implementation the tests cross-check it against.
    """

    def __init__(self, r, p: ModelParams):
        self.p = p
        self.point = as_point(r)
        hf = build_floquet_hamiltonian(self.point, p)
        lam, vec = np.linalg.eigh(hf)
        self.eigvals = lam
        self.vec = vec
        dx, dy = nuclear_gradients(p)
        eye = np.eye(p.n_replicas)
        dxf = np.kron(eye, dx)
        dyf = np.kron(eye, dy)
        self.grad_eig = (vec.T @ dxf @ vec, vec.T @ dyf @ vec)
        self.mask_left, self.mask_right = lead_mask_diagonals(p)
        self.shifts = replica_numbers(p) * p.omega
        # constant eigenbasis images of the lead masks (for transmission)
        self.mask_left_eig = vec.T @ (self.mask_left[:, None] * vec)
        self.mask_right_eig = vec.T @ (self.mask_right[:, None] * vec)

    def resolvent_diag(self, eps: np.ndarray) -> np.ndarray:
        """g_k(eps) = 1/(eps - lambda_k + i*gamma_tilde/2), shape (ne, dim)."""
        return 1.0 / (eps[:, None] - self.eigvals[None, :]
                      + 0.5j * self.p.gamma_tilde)

    def lead_fermi(self, eps: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Per-state Fermi factors f(eps - n*omega - mu_z), shape (ne, dim)."""
        kt = self.p.kt
        fl = fermi((eps[:, None] - self.shifts[None, :] - self.p.mu_left) / kt)
        fr = fermi((eps[:, None] - self.shifts[None, :] - self.p.mu_right) / kt)
        return fl, fr

    def weighted_eig(self, diag_vals: np.ndarray) -> np.ndarray:
        """V^T diag(w(eps)) V for a batch of diagonals, shape (ne, dim, dim).

        Evaluated as one skinny GEMM against the constant eigenvector
        matrix; this is the hot path of every field evaluation.
        """
        scaled = self.vec.T[None, :, :] * diag_vals[:, None, :]
        return scaled @ self.vec
