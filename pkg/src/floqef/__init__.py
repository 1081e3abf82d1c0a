"""Floquet electronic friction and Langevin transport for a periodically
driven two-level molecular junction."""

from .config import DynamicsConfig, RunConfig, SweepConfig, load_config
from .dynamics import (ConstantFields, DirectFields, EnsembleStats,
                       HarmonicFields, TrajectoryState, random_force,
                       run_ensemble, run_trajectories,
                       sample_initial_conditions, step)
from .errors import (ConfigError, FloqefError, NotPositiveSemidefinite,
                     OutOfBounds, QuadratureNotConverged, ResidueCheckFailed,
                     SingularSystem)
from .fields import (EFSample, decompose_friction, diffusion_tensor,
                     evaluate_sample, friction_tensor, mean_force)
from .floquet import (FloquetContext, GreenSet, build_floquet_hamiltonian,
                      build_floquet_hybridization, denergy_retarded, fermi,
                      greens_at, lead_occupation, self_energies)
from .grid import FieldGrid, GridSpec, params_fingerprint, precompute
from .model import (ModelParams, NuclearPoint, bare_potential, fourier_blocks,
                    hybridization_matrices, nuclear_gradients,
                    system_hamiltonian)
from .quadrature import QuadratureSpec, energy_quadrature, energy_quadrature_vec
from .transport import CurrentSample, local_current, transmission

__version__ = "0.1.0"
