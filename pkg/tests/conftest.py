import numpy as np
import pytest

from resqfi.reservoir import OhmicSpectralDensity


@pytest.fixture(scope="session")
def sd_ohmic_bound():
    """Strong-coupling Ohmic case with a bound state (omega0 = 1 units)."""
    return OhmicSpectralDensity(eta=0.4, omega_c=10.0, s=1.0)


@pytest.fixture(scope="session")
def sd_subohmic_nobound():
    """Sub-Ohmic weak-coupling case without a bound state."""
    return OhmicSpectralDensity(eta=0.05, omega_c=4.5, s=0.5)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240817)
