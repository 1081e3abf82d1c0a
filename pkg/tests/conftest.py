import numpy as np
import pytest

from floqef import ModelParams, QuadratureSpec


@pytest.fixture(scope="session")
def quad():
    return QuadratureSpec()


@pytest.fixture(scope="session")
def quad_coarse():
    """Cheaper window for grid-heavy tests.  The step-doubled estimate
    certifies ~1e-3 here; the actual fine-grid accuracy is far better."""
    return QuadratureSpec(e_max=16.0, de=0.05, tail_tol=1e-3)


@pytest.fixture(scope="session")
def static_eq():
    """Undriven, unbiased baseline at the standard parameter set."""
    return ModelParams(amp=0.0, n_floquet=0)


@pytest.fixture(scope="session")
def driven():
    """Moderately driven, biased Floquet set at caption-level N."""
    return ModelParams(amp=1.0, omega=1.0, mu_left=1.0, mu_right=-1.0,
                       n_floquet=5)


@pytest.fixture()
def rng():
    return np.random.default_rng(20240811)
