"""
Core numerics: molecule model, spectral densities, quadrature, perturbative dynamics
and the discrete-bath oracle.
"""

from .errors import (ChiralSimError, ConfigError, OracleError, ParameterError, QuadratureError,
                     TruncationInvalidError)
from .model import MoleculeParams, PotentialParams, UnitSystem, derive_two_level, isolated_tunneling_probability
from .spectral import (DebyeSolventParams, GasMicroParams, SpectralDensity, debye_closed_form, debye_params,
                       gas_closed_form, gas_micro_integral, gas_params_from_micro, spectral_derivative)
from .quadrature import (PVIntegralSpec, QuadratureResult, pv_integrate, sinc_squared_integral,
                         sine_over_square_integral)
from .dynamics import (ChiOverlaps, PerturbativeInputs, PropagatorElements, Trajectory, chi_overlaps,
                       decay_rate, energy_shift, evolve_perturbative, p_right_dilute_closed_form,
                       p_right_general, u_alpha_element, u_vac_diagonal)
from .oracle import DiscreteBath, TruncatedState, build_hamiltonian, discretize, evolve, golden_rule_discrete

__all__ = [
    'ChiralSimError', 'ConfigError', 'OracleError', 'ParameterError', 'QuadratureError',
    'TruncationInvalidError',
    'MoleculeParams', 'PotentialParams', 'UnitSystem', 'derive_two_level', 'isolated_tunneling_probability',
    'DebyeSolventParams', 'GasMicroParams', 'SpectralDensity', 'debye_closed_form', 'debye_params',
    'gas_closed_form', 'gas_micro_integral', 'gas_params_from_micro', 'spectral_derivative',
    'PVIntegralSpec', 'QuadratureResult', 'pv_integrate', 'sinc_squared_integral', 'sine_over_square_integral',
    'ChiOverlaps', 'PerturbativeInputs', 'PropagatorElements', 'Trajectory', 'chi_overlaps', 'decay_rate',
    'energy_shift', 'evolve_perturbative', 'p_right_dilute_closed_form', 'p_right_general',
    'u_alpha_element', 'u_vac_diagonal',
    'DiscreteBath', 'TruncatedState', 'build_hamiltonian', 'discretize', 'evolve', 'golden_rule_discrete',
]
