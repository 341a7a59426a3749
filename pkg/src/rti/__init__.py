"""Linear Rayleigh-Taylor growth rates for two rotating compressible layers."""
from ._backend import backend_name
from .config import RunConfig, config_hash, parse_config, serialize_config
from .dispersion import (DispersionCurve, DispersionPoint, F_of_s, Stable, dispersion_curve,
                         lambda_no_rotation, rotation_comparison, solve_fixed_point)
from .eigen import EigenResult, min_eigen, mu_curve, psi_at_interface
from .equilibrium import (EquilibriumProfile, FluidConfig, PressureLaw, hydrostatic_residual,
                          integrate_hydrostatic, solve_interface_densities)
from .errors import *  # noqa: F401,F403
from .evolve import (EvolutionOperator, SpectralState, energy_identity_drift, energy_trace, evolve,
                     growth_fit, mode_state, random_state, rhs, rotating_mode_rate)
from .forms import FormPencil, assemble_pencil, rayleigh_quotient, test_pair
from .grid import LOWER, UPPER, Grid1D
from .modes import NormalMode, build_mode, derivative_stack, ode_residual, rotate_mode
from .synthesis import (RadialAmplitude, SynthesisField, build_field, evaluate_field,
                        growth_sandwich, hk_norm, illposed_sequence)

__version__ = "0.1.0"
