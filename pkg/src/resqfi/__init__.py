"""Non-Markovian bosonic sensor simulator and reservoir-estimation toolkit."""

from .analysis import (
    EstimationTarget,
    QfiScanResult,
    SqueezingAdvantage,
    dEb_dtheta,
    du_dtheta,
    find_rayleigh_curse,
    markovian_optimum,
    power_law_exponent,
    qfi_asymptotic,
    qfi_time_scan,
    squeezing_advantage,
    theta_factor,
)
from .gaussian import (
    GaussianState,
    InitialStateSpec,
    StateDerivative,
    error_propagation,
    evolve_state,
    min_measurement_error,
    qfi_gaussian,
    qfi_markovian,
    state_derivative,
    wigner,
)
from .propagator import (
    BoundState,
    PropagatorTrajectory,
    find_bound_state,
    pc_characteristic_roots,
    rates,
    solve_volterra,
    u_markovian,
    u_photonic_crystal,
    u_spectral,
)
from .reservoir import (
    DiscreteReservoir,
    OhmicSpectralDensity,
    PhotonicCrystalReservoir,
    bound_state_criterion,
    discretize,
    evaluate_j,
    level_shift,
    memory_kernel,
    self_energy,
)

__version__ = "0.1.0"
