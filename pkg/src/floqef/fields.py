"""Mean force, friction tensor, and random-force correlation by energy
quadrature of Floquet Green's-function traces.

With kappa = 1/(2*pi*(2N+1)) and D_mu the Floquet embedding of dh/dR_mu:

    gamma_mu_nu = 2 Re[ kappa * Int Tr{D_mu (-G_r^2) D_nu G_<} d(eps) ]
    F_mu        = -kappa * Im[ Int Tr{D_mu G_<} d(eps) ] - dU/dR_mu
    D_sym       = (kappa/2) * sym Re[ Int Tr{D_mu G_> D_nu G_<} d(eps) ]

The friction sign is pinned by the d = 1 oracle: it makes the equilibrium
friction positive and satisfies D = kT*gamma exactly, together with the
lesser/greater conventions stated in floquet.py.

All traces are evaluated in the eigenbasis of h_s^F (FloquetContext), where
the wide-band structure reduces each integrand to elementwise products of
(ne, dim, dim) arrays plus one batched matmul per Fermi-weighted diagonal.
One quadrature pass yields every field component, including the local
current consumed by the grid precompute.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NotPositiveSemidefinite, ResidueCheckFailed
from .floquet import FloquetContext
from .model import ModelParams, as_point, bare_potential
from .quadrature import QuadratureSpec, energy_quadrature_vec
from .transport import symmetric_current_trace

_RESIDUE_TOL = 1e-9
_RESIDUE_ABS = 1e-13
_PSD_CLIP = 1e-10

# component order produced by the bundled integrand
_N_BUNDLE = 11
(_GXX, _GXY, _GYX, _GYY, _FX, _FY,
 _DXX, _DXY, _DYY, _DRES, _ISYM) = range(_N_BUNDLE)


@dataclass(frozen=True)
class EFSample:
    """Field bundle at one nuclear point: mean force, friction tensor,
    symmetrized diffusion tensor, and local (position-frozen) current."""

    force: np.ndarray
    gamma: np.ndarray
    diffusion: np.ndarray
    local_current: float


def bundle_integrand(ctx: FloquetContext):
    """Vectorized integrand returning all field components at once.

    Friction columns carry the +H.c. pointwise (2 Re of the trace), and the
    diffusion columns are symmetrized pointwise, so the large canceling
    imaginary parts never enter the quadrature convergence estimate.  The
    _DRES column collects the imaginary residues that symmetrization must
    kill; a nonzero integral there flags a convention bug.

    The heavy work is four skinny GEMMs against constant matrices
    (P = V^T diag(occ) V, Q_mu = (P o gbar) D_mu, and the current weight);
    every trace then reduces to elementwise products.  With
    pa_mu = P A_mu = Q_mu o g (column scaling):

        Tr{D_mu (-G_r^2) D_nu G_<}   = -i sum_ab Q_mu[a,b] g_a g_b^2 Dt_nu[b,a]
        Tr{D_mu G_<}                 =  i sum_a Q_mu[a,a] g_a
        Tr{D_mu G_> D_nu G_<}        = gt * sum_ab |g_a|^2 g_b Q_mu[b,a] Dt_nu[a,b]
                                       - sum_ab pa_nu[a,b] pa_mu[b,a]
    """
    gt = ctx.p.gamma_tilde
    dt_x, dt_y = ctx.grad_eig
    dts = (dt_x, dt_y)
    dts_t = (dt_x.T.copy(), dt_y.T.copy())

    def integrand(eps: np.ndarray) -> np.ndarray:
        g = ctx.resolvent_diag(eps)
        gbar = g.conj()
        gsq = g * g
        gabs = (g * gbar).real
        fl, fr = ctx.lead_fermi(eps)
        # occupied lead weight on the diagonal: p_a = sum_z Gamma_z,a f_z,a
        occ = ctx.mask_left * fl + ctx.mask_right * fr
        p_eig = ctx.weighted_eig(occ)
        pg = p_eig * gbar[:, None, :]          # P[a,k] gbar_k
        q_mats = [pg @ dt for dt in dts]       # Q_mu, skinny GEMMs

        out = np.empty((eps.shape[0], _N_BUNDLE), dtype=complex)
        dmat = np.empty((eps.shape[0], 2, 2), dtype=complex)
        for mu in (0, 1):
            qm = q_mats[mu]
            core = qm * (g[:, :, None] * gsq[:, None, :])
            for nu in (0, 1):
                out[:, _GXX + 2 * mu + nu] = 2.0 * np.real(
                    -1j * np.sum(core * dts_t[nu], axis=(1, 2)))
            out[:, _FX + mu] = 1j * np.sum(np.einsum("eaa->ea", qm) * g,
                                           axis=1)
            hop = (qm * g[:, :, None]).transpose(0, 2, 1) \
                * gabs[:, :, None]             # |g_a|^2 g_b Q_mu[b,a]
            for nu in (0, 1):
                dmat[:, mu, nu] = gt * np.sum(hop * dts[nu], axis=(1, 2))
        pa = [q_mats[i] * g[:, None, :] for i in (0, 1)]
        for mu in (0, 1):
            pa_mu_t = pa[mu].transpose(0, 2, 1)
            for nu in (0, 1):
                dmat[:, mu, nu] -= np.sum(pa[nu] * pa_mu_t, axis=(1, 2))

        sym_off = 0.5 * (dmat[:, 0, 1] + dmat[:, 1, 0])
        out[:, _DXX] = dmat[:, 0, 0].real
        out[:, _DXY] = sym_off.real
        out[:, _DYY] = dmat[:, 1, 1].real
        out[:, _DRES] = (np.abs(dmat[:, 0, 0].imag) + np.abs(sym_off.imag)
                         + np.abs(dmat[:, 1, 1].imag))
        # local current, symmetric Landauer form (owned by transport)
        out[:, _ISYM] = symmetric_current_trace(ctx, g, gbar, fl, fr)
        return out

    return integrand


def _check_residue(label, junk, scale):
    if junk > max(_RESIDUE_TOL * scale, _RESIDUE_ABS):
        raise ResidueCheckFailed(
            f"{label} residue {junk:.3e} exceeds {_RESIDUE_TOL:.0e} "
            f"relative to scale {scale:.3e}; convention or quadrature bug")


def clip_psd(mat: np.ndarray, label: str = "diffusion") -> np.ndarray:
    """Zero out eigenvalues in [-1e-10, 0); reject anything lower."""
    vals, vecs = np.linalg.eigh(mat)
    if np.any(vals < -_PSD_CLIP):
        raise NotPositiveSemidefinite(
            f"{label} eigenvalues {vals} below -{_PSD_CLIP:.0e}")
    out = (vecs * np.clip(vals, 0.0, None)) @ vecs.T
    return 0.5 * (out + out.T)


def evaluate_sample(r, p: ModelParams, q: QuadratureSpec) -> EFSample:
    """All EF fields plus local current at one nuclear point."""
    r = as_point(r)
    ctx = FloquetContext(r, p)
    raw, _err = energy_quadrature_vec(bundle_integrand(ctx), p, q)
    kappa = 1.0 / (2.0 * np.pi * p.n_replicas)

    gamma = kappa * np.real(raw[_GXX:_GYY + 1]).reshape(2, 2)

    force_raw = raw[_FX:_FY + 1]
    scale = max(np.abs(force_raw).max(), 1e-12)
    _check_residue("mean-force real part", np.abs(force_raw.real).max(), scale)
    _, grad_u = bare_potential(r, p)
    force = -kappa * force_raw.imag - grad_u

    dxx, dxy, dyy = np.real(raw[_DXX]), np.real(raw[_DXY]), np.real(raw[_DYY])
    dsym = 0.5 * kappa * np.array([[dxx, dxy], [dxy, dyy]])
    _check_residue("diffusion imaginary part",
                   0.5 * kappa * abs(raw[_DRES]),
                   max(np.abs(dsym).max(), 1e-12))
    diffusion = clip_psd(dsym)

    isym = raw[_ISYM]
    _check_residue("current imaginary part", abs(isym.imag),
                   max(abs(isym.real), 1e-12))
    return EFSample(force=force, gamma=gamma, diffusion=diffusion,
                    local_current=float(kappa * isym.real))


def friction_tensor(r, p: ModelParams, q: QuadratureSpec) -> np.ndarray:
    """2x2 friction tensor gamma_mu_nu(R); asymmetric out of equilibrium."""
    return evaluate_sample(r, p, q).gamma


def mean_force(r, p: ModelParams, q: QuadratureSpec) -> np.ndarray:
    """Mean (adiabatic) force including the bare-potential gradient."""
    return evaluate_sample(r, p, q).force


def diffusion_tensor(r, p: ModelParams, q: QuadratureSpec) -> np.ndarray:
    """Symmetrized random-force correlation, PSD-clipped."""
    return evaluate_sample(r, p, q).diffusion


def decompose_friction(gamma: np.ndarray) -> tuple[np.ndarray, float]:
    """Split gamma into its symmetric part and the single antisymmetric
    component (gamma_xy - gamma_yx)/2, the Lorentz-like force coefficient."""
    gamma = np.asarray(gamma, dtype=float)
    sym = 0.5 * (gamma + gamma.T)
    antisym = 0.5 * (gamma[0, 1] - gamma[1, 0])
    return sym, float(antisym)
