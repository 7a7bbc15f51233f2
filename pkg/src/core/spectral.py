"""
Spectral densities of the harmonic environment.

Closed forms share the shape J(w) = J0 w^s exp(-w / cutoff): s = 1/2 for the
dilute gas and s = 1 for the Debye solvent. Tabulated densities are interpolated
with a monotone cubic and are never extrapolated.
"""

import logging
import math
import warnings
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Dict, Optional, Tuple, Union

import numpy as np
from scipy import constants, special
from scipy.integrate import IntegrationWarning, quad, trapezoid
from scipy.interpolate import PchipInterpolator

from .errors import ParameterError, QuadratureError
from .model import UnitSystem

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]

SUBOHMIC_GAS = 'sub-ohmic-gas'
OHMIC_DEBYE = 'ohmic-debye'
TABULATED = 'custom-tabulated'

DEBYE_UNIT = 1e-21 / constants.c  # C m
ONSAGER_RULE = 22.0


def _as_frequencies(omega: ArrayLike) -> np.ndarray:
    omega = np.asarray(omega, dtype=float)
    if np.any(omega < 0):
        raise ParameterError("spectral density is defined for omega >= 0 only")
    return omega


def _scalar_or_array(value: np.ndarray) -> ArrayLike:
    return float(value) if np.ndim(value) == 0 else value


@dataclass(frozen=True)
class SpectralDensity:
    """
    Frequency-resolved coupling weight J(w) of the bath.

    Use the constructors `gas`, `debye`, `zero` and `tabulated` rather than
    filling the fields by hand.
    """
    kind: str
    coupling: float = 0.0
    cutoff: float = 1.0
    exponent: float = 1.0
    table: Optional[Tuple[Tuple[float, ...], Tuple[float, ...]]] = None
    metadata: Dict[str, Any] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.kind not in (SUBOHMIC_GAS, OHMIC_DEBYE, TABULATED):
            raise ParameterError(f"unknown spectral density kind '{self.kind}'")
        if self.kind == TABULATED:
            if self.table is None:
                raise ParameterError("tabulated spectral density needs a table")
            return
        if self.coupling < 0:
            raise ParameterError("coupling strength must be non-negative")
        if self.cutoff <= 0:
            raise ParameterError("cut-off frequency must be positive")

    # constructors

    @classmethod
    def gas(cls, coupling: float, cutoff: float, **metadata) -> 'SpectralDensity':
        return cls(SUBOHMIC_GAS, coupling, cutoff, 0.5, metadata=metadata)

    @classmethod
    def debye(cls, coupling: float, cutoff: float, **metadata) -> 'SpectralDensity':
        return cls(OHMIC_DEBYE, coupling, cutoff, 1.0, metadata=metadata)

    @classmethod
    def zero(cls) -> 'SpectralDensity':
        return cls(OHMIC_DEBYE, 0.0, 1.0, 1.0)

    @classmethod
    def tabulated(cls, omega, values, **metadata) -> 'SpectralDensity':
        omega = np.asarray(omega, dtype=float)
        values = np.asarray(values, dtype=float)
        if omega.ndim != 1 or omega.shape != values.shape or omega.size < 2:
            raise ParameterError("table needs two equal-length columns with at least two rows")
        if np.any(np.diff(omega) <= 0):
            raise ParameterError("table frequencies must be strictly ascending")
        if omega[0] < 0 or np.any(values < 0):
            raise ParameterError("table must have omega >= 0 and J >= 0")
        return cls(TABULATED, table=(tuple(omega), tuple(values)), metadata=metadata)

    # evaluation

    @property
    def is_zero(self) -> bool:
        if self.kind == TABULATED:
            return not any(self.table[1])
        return self.coupling == 0.0

    @property
    def support(self) -> Tuple[float, float]:
        if self.kind == TABULATED:
            return self.table[0][0], self.table[0][-1]
        return 0.0, math.inf

    @property
    def scale(self) -> float:
        """Frequency scale used for tail truncation"""
        if self.kind == TABULATED:
            return self.table[0][-1] / 10.0
        return self.cutoff

    @cached_property
    def _interpolant(self) -> PchipInterpolator:
        omega, values = self.table
        return PchipInterpolator(np.array(omega), np.array(values), extrapolate=False)

    def __call__(self, omega: ArrayLike) -> ArrayLike:
        omega = _as_frequencies(omega)
        if self.kind == TABULATED:
            lo, hi = self.support
            if np.any((omega < lo) | (omega > hi)):
                raise ParameterError(f"tabulated spectral density is defined on [{lo}, {hi}] only")
            return _scalar_or_array(self._interpolant(omega))
        return _scalar_or_array(self.coupling * omega ** self.exponent * np.exp(-omega / self.cutoff))

    def derivative(self, omega: ArrayLike) -> ArrayLike:
        """dJ/dw; analytic for closed forms, central differences for tables"""
        omega = _as_frequencies(omega)
        if self.kind == TABULATED:
            return _scalar_or_array(self._finite_difference(omega, order=1))
        if self.exponent < 1 and np.any(omega == 0) and self.coupling > 0:
            raise ParameterError("derivative of a sub-ohmic density has a pole at omega = 0")
        s, cut = self.exponent, self.cutoff
        with np.errstate(divide='ignore', invalid='ignore'):
            slope = self.coupling * np.exp(-omega / cut) * (s * omega ** (s - 1) - omega ** s / cut)
        return _scalar_or_array(slope)

    def second_derivative(self, omega: ArrayLike) -> ArrayLike:
        omega = _as_frequencies(omega)
        if self.kind == TABULATED:
            return _scalar_or_array(self._finite_difference(omega, order=2))
        s, cut = self.exponent, self.cutoff
        with np.errstate(divide='ignore', invalid='ignore'):
            curvature = self.coupling * np.exp(-omega / cut) * (
                s * (s - 1) * omega ** (s - 2) - 2 * s * omega ** (s - 1) / cut + omega ** s / cut ** 2)
        return _scalar_or_array(curvature)

    def _finite_difference(self, omega: np.ndarray, order: int) -> np.ndarray:
        lo, hi = self.support
        step = 1e-4 * (hi - lo)
        # stay inside the table near its ends
        centre = np.clip(omega, lo + step, hi - step)
        if order == 1:
            return (self._interpolant(centre + step) - self._interpolant(centre - step)) / (2 * step)
        return (self._interpolant(centre + step) - 2 * self._interpolant(centre)
                + self._interpolant(centre - step)) / step ** 2

    @property
    def peak_frequency(self) -> float:
        if self.kind == TABULATED:
            omega, values = self.table
            return omega[int(np.argmax(values))]
        return self.exponent * self.cutoff

    def reorganization_integral(self) -> float:
        """Integral of J(w)/w over the support"""
        if self.kind == TABULATED:
            omega = np.array(self.table[0])
            values = np.array(self.table[1])
            mask = omega > 0
            return float(trapezoid(values[mask] / omega[mask], omega[mask]))
        return self.coupling * special.gamma(self.exponent) * self.cutoff ** self.exponent

    def describe(self) -> Dict[str, Any]:
        """Flat metadata for CSV headers"""
        data = {'kind': self.kind}
        if self.kind == TABULATED:
            data.update(points=len(self.table[0]), omega_min=self.support[0], omega_max=self.support[1])
        else:
            data.update(coupling=self.coupling, cutoff=self.cutoff, exponent=self.exponent)
        data.update(self.metadata)
        return data

    # two-column text format

    def to_table(self, path: str, omega: Optional[np.ndarray] = None) -> None:
        if omega is None:
            if self.kind == TABULATED:
                omega = np.array(self.table[0])
            else:
                omega = np.linspace(0.0, 10.0 * self.cutoff, 1001)
        values = np.asarray(self(omega))
        header = "\n".join(f"{key} = {value}" for key, value in self.describe().items())
        np.savetxt(path, np.column_stack([omega, values]), delimiter='\t', fmt='%.12e',
                   header=header + "\nomega\tJ", comments='# ')

    @classmethod
    def from_table(cls, path: str) -> 'SpectralDensity':
        data = np.loadtxt(path, comments='#', ndmin=2)
        if data.shape[1] != 2:
            raise ParameterError(f"{path}: expected two columns, got {data.shape[1]}")
        return cls.tabulated(data[:, 0], data[:, 1], source=str(path))


def gas_closed_form(omega: ArrayLike, coupling: float, cutoff: float) -> ArrayLike:
    """J0 w^(1/2) exp(-w / cutoff)"""
    return SpectralDensity.gas(coupling, cutoff)(omega)


def debye_closed_form(omega: ArrayLike, coupling: float, cutoff: float) -> ArrayLike:
    """J0 w exp(-w / cutoff)"""
    return SpectralDensity.debye(coupling, cutoff)(omega)


def spectral_derivative(omega: ArrayLike, density: SpectralDensity) -> ArrayLike:
    return density.derivative(omega)


# Dilute gas

@dataclass(frozen=True)
class GasMicroParams:
    """Microscopic description of an inert background gas"""
    number_density: float
    thermal_energy: float
    interaction_range: float
    reduced_planck: float = 0.1

    def __post_init__(self):
        if self.number_density < 0:
            raise ParameterError("number density must be non-negative")
        if self.thermal_energy <= 0 or self.interaction_range <= 0 or self.reduced_planck <= 0:
            raise ParameterError("thermal energy, interaction range and h must be positive")

    @property
    def classical_time(self) -> float:
        """t_c = (R^2 / 2 E_th)^(1/2)"""
        return math.sqrt(self.interaction_range ** 2 / (2.0 * self.thermal_energy))

    @property
    def quantum_time(self) -> float:
        """t_Q = h / E_th"""
        return self.reduced_planck / self.thermal_energy

    @property
    def is_classical(self) -> bool:
        """The closed form neglects (t_Q / t_c)^2"""
        return (self.quantum_time / self.classical_time) ** 2 < 1e-2

    @property
    def cutoff(self) -> float:
        t_c, t_q = self.classical_time, self.quantum_time
        if 4.0 * t_c <= t_q:
            raise ParameterError(f"cut-off undefined: 4 t_c = {4 * t_c:.3g} <= t_Q = {t_q:.3g}")
        return 2.0 / (4.0 * t_c - t_q)

    def with_density(self, number_density: float) -> 'GasMicroParams':
        return GasMicroParams(number_density, self.thermal_energy, self.interaction_range,
                              self.reduced_planck)


PRINTED_MEASURE = 'printed'
RADIAL_MEASURE = 'radial'


def _micro_prefactor(omega: float, gas: GasMicroParams) -> float:
    return gas.number_density * gas.classical_time / gas.interaction_range * math.exp(
        omega * gas.quantum_time)


def gas_micro_integral(omega: float, gas: GasMicroParams, number_density: Optional[float] = None,
                       measure: str = RADIAL_MEASURE, rel_tol: float = 1e-8) -> float:
    """
    Microscopic gas spectral density with a Gaussian form factor |a(q)|^2 = exp(-q^2).

    The printed measure integrates exp(-q^2)/q, the radial measure carries the
    extra q^2 of the three-dimensional volume element.
    """
    if omega < 0:
        raise ParameterError("spectral density is defined for omega >= 0 only")
    if number_density is not None:
        gas = gas.with_density(number_density)
    t_c, t_q = gas.classical_time, gas.quantum_time
    a = 1.0 + (t_q / t_c) ** 2
    b = (omega * t_c) ** 2
    if measure == PRINTED_MEASURE:
        if omega == 0:
            return math.inf if gas.number_density > 0 else 0.0
        power = -1
    elif measure == RADIAL_MEASURE:
        power = 1
    else:
        raise ParameterError(f"unknown measure '{measure}'")

    def integrand(q):
        if q == 0:
            return 0.0
        return q ** power * math.exp(-a * q * q - b / (q * q))

    # the integrand peaks near (b / a)^(1/4)
    split = max((b / a) ** 0.25, 1e-3)
    total, error = 0.0, 0.0
    with warnings.catch_warnings():
        warnings.simplefilter('error', IntegrationWarning)
        try:
            for lo, hi in ((0.0, split), (split, math.inf)):
                value, err = quad(integrand, lo, hi, epsabs=0.0, epsrel=rel_tol, limit=200)
                total += value
                error += err
        except IntegrationWarning as exc:
            raise QuadratureError(f"gas micro integral did not converge at omega={omega}: {exc}")
    if total > 0 and error > 10 * rel_tol * total:
        raise QuadratureError(f"gas micro integral error {error:.3g} exceeds tolerance at omega={omega}")
    return _micro_prefactor(omega, gas) * total


def gas_micro_exact(omega: float, gas: GasMicroParams, measure: str = RADIAL_MEASURE) -> float:
    """Bessel-function evaluation of the same q-integral"""
    t_c, t_q = gas.classical_time, gas.quantum_time
    root_a = math.sqrt(1.0 + (t_q / t_c) ** 2)
    z = 2.0 * omega * t_c * root_a
    if measure == PRINTED_MEASURE:
        core = special.k0(z) if z > 0 else math.inf
    else:
        core = omega * t_c / root_a * special.k1(z) if z > 0 else 0.5 / root_a ** 2
    return _micro_prefactor(omega, gas) * core


def fit_gas_constant(gas: GasMicroParams, measure: str = RADIAL_MEASURE,
                     lower: float = 0.1, upper: float = 5.0, points: int = 40) -> Tuple[float, float]:
    """
    Least-squares constant C in J0 = C rho E_th^(-3/4).

    Returns (C, worst relative deviation over the fit window).
    """
    cutoff = gas.cutoff
    omega = np.linspace(lower * cutoff, upper * cutoff, points)
    micro = np.array([gas_micro_integral(w, gas, measure=measure) for w in omega])
    scale = gas.number_density * gas.thermal_energy ** -0.75
    if scale == 0:
        return 0.0, 0.0
    basis = scale * np.sqrt(omega) * np.exp(-omega / cutoff)
    solution, *_ = np.linalg.lstsq(basis[:, None], micro, rcond=None)
    constant = float(solution[0])
    deviation = float(np.max(np.abs(constant * basis - micro) / micro))
    logger.debug("gas fit: C=%.6g, worst deviation %.3g over [%.2g, %.2g]", constant, deviation,
                 omega[0], omega[-1])
    return constant, deviation


def gas_params_from_micro(gas: GasMicroParams, measure: str = RADIAL_MEASURE) -> Tuple[float, float]:
    """(J0, cutoff) of the sub-ohmic closed form"""
    cutoff = gas.cutoff
    if not gas.is_classical:
        logger.warning("t_Q/t_c = %.3g: the closed form neglects (t_Q/t_c)^2 >= 1e-2",
                       gas.quantum_time / gas.classical_time)
    constant, _ = fit_gas_constant(gas, measure=measure)
    return constant * gas.number_density * gas.thermal_energy ** -0.75, cutoff


def gas_density_from_micro(gas: GasMicroParams, measure: str = RADIAL_MEASURE) -> SpectralDensity:
    constant, deviation = fit_gas_constant(gas, measure=measure)
    coupling = constant * gas.number_density * gas.thermal_energy ** -0.75
    return SpectralDensity.gas(coupling, gas.cutoff, fit_constant=constant, fit_deviation=deviation,
                               measure=measure)


# Condensed phase

@dataclass(frozen=True)
class DebyeSolventParams:
    """Onsager cavity in a Debye solvent"""
    dipole_change: float  # Debye
    onsager_radius: float  # angstrom
    static_dielectric: float
    high_freq_dielectric: float
    debye_time: float  # seconds

    def __post_init__(self):
        if not self.static_dielectric > self.high_freq_dielectric > 1.0:
            raise ParameterError("dielectric constants must satisfy eps_s > eps_inf > 1")
        if self.debye_time <= 0:
            raise ParameterError("Debye time must be positive")
        if self.onsager_radius <= 0:
            raise ParameterError("Onsager radius must be positive")

    @property
    def cutoff_rate(self) -> float:
        """Cut-off frequency in 1/s"""
        eps_s, eps_inf = self.static_dielectric, self.high_freq_dielectric
        return (2 * eps_s + 1) / ((2 * eps_inf + 1) * self.debye_time)

    @classmethod
    def water(cls, dipole_change: float = 0.6, onsager_radius: float = 1.0) -> 'DebyeSolventParams':
        return cls(dipole_change, onsager_radius, 78.3, 4.21, 8.2e-12)


def debye_params(solvent: DebyeSolventParams, units: UnitSystem,
                 rule: str = 'onsager') -> Tuple[float, float]:
    """
    Dimensionless (J0, cutoff) of the ohmic density.

    rule='onsager' uses J0 = 22 (dmu)^2 / a^3 with dmu in Debye and a in angstrom;
    rule='cavity' evaluates the dielectric cavity expression in units of U0.
    """
    tau = units.tau
    if tau <= 0:
        raise ParameterError("time unit must be positive")
    cutoff = solvent.cutoff_rate * tau
    if rule == 'onsager':
        coupling = ONSAGER_RULE * solvent.dipole_change ** 2 / solvent.onsager_radius ** 3
    elif rule == 'cavity':
        eps_s, eps_inf = solvent.static_dielectric, solvent.high_freq_dielectric
        dipole = solvent.dipole_change * DEBYE_UNIT
        radius = solvent.onsager_radius * constants.angstrom
        energy = dipole ** 2 / (4 * math.pi * constants.epsilon_0 * radius ** 3)
        energy /= units.characteristic_energy
        coupling = energy * 6 * (eps_s - eps_inf) / ((2 * eps_s + 1) * (2 * eps_inf + 1) * cutoff)
    else:
        raise ParameterError(f"unknown Debye rule '{rule}'")
    return coupling, cutoff


def debye_density(solvent: DebyeSolventParams, units: UnitSystem, rule: str = 'onsager') -> SpectralDensity:
    coupling, cutoff = debye_params(solvent, units, rule)
    return SpectralDensity.debye(coupling, cutoff, rule=rule)
