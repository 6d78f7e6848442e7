"""SPH-driven particle variational inference.

A cloud of SPH particles evolves under pressure, viscosity, and a coupling
to the target distribution (either a score force or an external pressure
field); at equilibrium the cloud approximates draws from the target.
"""

from .backends import ACTIVE_NAME as active_backend
from .diagnostics import histogram, kde_1d, mode_occupancy, moments, w1_per_dim
from .errors import CapabilityError, ConfigurationError, NumericsError
from .forces import (
    build_cache,
    continuity_density_rate,
    eos_pressure,
    external_pressure,
    pressure_force,
    regularization_force,
    summation_density,
    total_acceleration,
    viscous_force,
)
from .kernels import (
    KernelKind,
    KernelSpec,
    kernel_grad,
    kernel_laplacian,
    kernel_radial_derivative,
    kernel_value,
    make_kernel,
    normalization_constant,
)
from .sampler import (
    DensityMode,
    HSchedule,
    InitSpec,
    Integrator,
    RunConfig,
    RunReport,
    cfl_step,
    initialize,
    leapfrog_step,
    run,
    semi_implicit_step,
)
from .state import FluidParams, ForceVariant, PairwiseCache, ParticleSystem, PressureVariant, SamplingMode, ViscosityMode
from .targets import TargetModel, gaussian_target, mixture_target, query_density, query_score, target_from_config

__version__ = "0.1.0"
