"""
Dimensionless double-well model of a chiral molecule and its two-level reduction.

Lengths are measured in R0, energies in U0 and times in tau0. In these units the
commutator is [x, p] = i h with the reduced Planck constant h = hbar / (U0 tau0).
"""

import logging
import math
from dataclasses import dataclass, asdict
from typing import Any, Dict, Union

import numpy as np
from scipy import constants

from .errors import ParameterError

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]

# reference molecule
REFERENCE_MASS = 1e-27
REFERENCE_ENERGY = 1e-19
REFERENCE_LENGTH = 1e-10
REFERENCE_TUNNELING = 1e-3
REFERENCE_HBAR = 0.1
REFERENCE_TAU = 1e-14
REFERENCE_OMEGA = 1e13


@dataclass(frozen=True)
class UnitSystem:
    """Characteristic mass, energy and length of the double well"""
    mass: float
    characteristic_energy: float
    characteristic_length: float

    def __post_init__(self):
        for name in ('mass', 'characteristic_energy', 'characteristic_length'):
            if getattr(self, name) <= 0:
                raise ParameterError(f"{name} must be positive")

    @property
    def tau(self) -> float:
        """Unit of time in seconds"""
        return self.characteristic_length / math.sqrt(self.characteristic_energy / self.mass)

    @property
    def momentum(self) -> float:
        """Unit of momentum in kg m/s"""
        return math.sqrt(self.mass * self.characteristic_energy)

    @property
    def reduced_planck(self) -> float:
        return constants.hbar / (self.characteristic_energy * self.tau)

    def thermal_energy(self, temperature: float) -> float:
        """k_B T in units of U0"""
        if temperature < 0:
            raise ParameterError("temperature must be non-negative")
        return constants.k * temperature / self.characteristic_energy

    @classmethod
    def reference(cls) -> 'UnitSystem':
        return cls(REFERENCE_MASS, REFERENCE_ENERGY, REFERENCE_LENGTH)

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data.update(tau=self.tau, momentum=self.momentum, reduced_planck=self.reduced_planck)
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'UnitSystem':
        return cls(
            mass=data['mass'],
            characteristic_energy=data['characteristic_energy'],
            characteristic_length=data['characteristic_length'],
        )


@dataclass(frozen=True)
class PotentialParams:
    """Asymmetric quartic double well"""
    asymmetry: float
    harmonic_frequency: float  # rad/s
    well_separation: float = REFERENCE_LENGTH


@dataclass(frozen=True)
class MoleculeParams:
    """
    Two-level chiral molecule H_M = -Delta sigma_x - delta sigma_z.

    The energy eigenstates are |1> = cos(theta)|R> + sin(theta)|L> and
    |2> = sin(theta)|R> - cos(theta)|L>, with |1> always the lower level.
    """
    tunneling: float
    localization: float = 0.0
    reduced_planck: float = REFERENCE_HBAR

    def __post_init__(self):
        if not self.tunneling > 0:
            raise ParameterError("tunneling strength must be positive")
        if not self.reduced_planck > 0:
            raise ParameterError("reduced Planck constant must be positive")

    @property
    def mixing_angle(self) -> float:
        if self.localization == 0.0:
            return math.pi / 4
        # atan2 keeps |1> the ground state for either sign of delta
        return 0.5 * math.atan2(self.tunneling, self.localization)

    @property
    def gap(self) -> float:
        """Omega_21, the transition frequency with h absorbed"""
        return math.hypot(self.tunneling, self.localization)

    @property
    def energies(self):
        return (-0.5 * self.gap, 0.5 * self.gap)

    def frequency(self, m: int, n: int) -> float:
        """Omega_mn = E_m - E_n"""
        energies = self.energies
        return energies[m - 1] - energies[n - 1]

    def sigma(self, m: int, n: int) -> float:
        """<m|sigma_z|n> in the energy basis"""
        two_theta = 2.0 * self.mixing_angle
        if m == n:
            return math.cos(two_theta) if m == 1 else -math.cos(two_theta)
        return math.sin(two_theta)

    @property
    def envelope(self) -> float:
        """Peak of the isolated tunneling probability"""
        return self.tunneling ** 2 / (self.tunneling ** 2 + self.localization ** 2)

    def eigenvectors(self) -> np.ndarray:
        """Columns are |1>, |2> in the chiral basis ordered (R, L)"""
        theta = self.mixing_angle
        c, s = math.cos(theta), math.sin(theta)
        return np.array([[c, s], [s, -c]])

    def hamiltonian(self) -> np.ndarray:
        """Energy-basis molecular generator diag(E1, E2)"""
        return np.diag(self.energies)

    def chiral_amplitudes(self, state: str = 'L') -> np.ndarray:
        """Energy-basis components <n|state> of a chiral state"""
        vectors = self.eigenvectors()
        if state == 'R':
            return vectors[0].copy()
        if state == 'L':
            return vectors[1].copy()
        raise ParameterError(f"unknown chiral state '{state}'")

    def chiral_projector(self, state: str = 'R') -> np.ndarray:
        """Energy-basis projector onto |R> or |L>"""
        amplitudes = self.chiral_amplitudes(state)
        return np.outer(amplitudes, amplitudes)

    def with_localization(self, localization: float) -> 'MoleculeParams':
        return MoleculeParams(self.tunneling, localization, self.reduced_planck)

    @classmethod
    def reference(cls, localization: float = 0.0) -> 'MoleculeParams':
        return cls(REFERENCE_TUNNELING, localization, REFERENCE_HBAR)

    @classmethod
    def from_potential(cls, potential: PotentialParams, units: UnitSystem,
                       temperature: float = 0.0) -> 'MoleculeParams':
        return derive_two_level(potential.harmonic_frequency, potential.asymmetry, units,
                                temperature=temperature)

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data.update(mixing_angle=self.mixing_angle, gap=self.gap)
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'MoleculeParams':
        return cls(
            tunneling=data['tunneling'],
            localization=data.get('localization', 0.0),
            reduced_planck=data.get('reduced_planck', REFERENCE_HBAR),
        )


def potential_value(x: ArrayLike, potential: PotentialParams) -> ArrayLike:
    """U(x)/U0 = (x^2 - 1)^2 - 1 - eta x"""
    x = np.asarray(x, dtype=float)
    value = (x ** 2 - 1.0) ** 2 - 1.0 - potential.asymmetry * x
    return float(value) if value.ndim == 0 else value


def derive_two_level(omega: float, eta: float, units: UnitSystem,
                     temperature: float = 0.0) -> MoleculeParams:
    """Tunneling and localization strengths of the quartic well."""
    if omega <= 0:
        raise ParameterError("harmonic frequency must be positive")
    h = units.reduced_planck
    omega_tau = omega * units.tau
    level_spacing = omega_tau * h
    if level_spacing >= 1.0:
        logger.warning("two-level reduction requires Omega tau0 h << 1 (got %.3g)", level_spacing)
    if temperature > 0 and units.thermal_energy(temperature) >= level_spacing:
        logger.warning("thermal energy %.3g exceeds the level spacing %.3g; "
                       "excited vibrational states are populated",
                       units.thermal_energy(temperature), level_spacing)
    tunneling = h * omega_tau / 4.0
    localization = eta * math.sqrt(h / (2.0 * omega_tau))
    return MoleculeParams(tunneling, localization, h)


def isolated_tunneling_probability(molecule: MoleculeParams, t: ArrayLike) -> ArrayLike:
    """Probability of |L> -> |R> for the isolated molecule"""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ParameterError("time must be non-negative")
    value = molecule.envelope * np.sin(molecule.gap * t / 2.0) ** 2
    return float(value) if value.ndim == 0 else value


def isolated_envelope(molecule: MoleculeParams) -> float:
    """Delta^2 / (Delta^2 + delta^2), the largest reachable |L> -> |R> probability"""
    return molecule.envelope
