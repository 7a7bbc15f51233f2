"""
Second-order perturbative dynamics of the chiral molecule in a zero-temperature bath.

The molecule starts in a chiral state and the bath in its vacuum. The reduced
state is carried by the two bath-conditional vectors chi_1 and chi_2 attached to
the energy eigenstates; P_R follows from their norms and overlap.

Vacuum amplitudes are exponentiated, so populations stay bounded past 1/Gamma_2.
The one-excitation vectors carry the norm lost by the vacuum amplitudes and their
overlap is weighted by |a_1||a_2|, so it satisfies Cauchy-Schwarz exactly and
vanishes once the upper level has decayed.
"""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.integrate import quad
from scipy.signal import find_peaks

from .errors import ParameterError, QuadratureError
from .model import MoleculeParams
from .quadrature import (DEFAULT_REL_TOL, principal_value, sinc_integral, sinc_squared_integral,
                         sine_over_square_integral, versine_integral)
from .spectral import SpectralDensity, TABULATED

logger = logging.getLogger(__name__)

GENERAL_PATH = 'general'
DILUTE_PATH = 'dilute'
WEAK_COUPLING_RATIO = 0.1
CLIP_TOLERANCE = 1e-3


@dataclass(frozen=True)
class ValidityReport:
    """Weak-coupling ratio Gamma_2/Omega_21 and the window 1/Omega << t << 1/Gamma_2"""
    weak_coupling_ratio: float
    lower_time: float
    upper_time: float

    @property
    def is_weak(self) -> bool:
        return self.weak_coupling_ratio < WEAK_COUPLING_RATIO

    def in_window(self, t: float) -> bool:
        return self.lower_time < t < self.upper_time


@dataclass(frozen=True)
class PerturbativeInputs:
    molecule: MoleculeParams
    bath: SpectralDensity
    initial_state: Union[str, Tuple[complex, complex]] = 'L'
    rel_tol: float = DEFAULT_REL_TOL

    def __post_init__(self):
        if isinstance(self.initial_state, str):
            if self.initial_state not in ('L', 'R'):
                raise ParameterError(f"unknown initial state '{self.initial_state}'")
        elif len(self.initial_state) != 2:
            raise ParameterError("initial state vector needs two energy-basis components")

    @property
    def coefficients(self) -> np.ndarray:
        """Normalized energy-basis components c_n of the initial state"""
        if isinstance(self.initial_state, str):
            return self.molecule.chiral_amplitudes(self.initial_state).astype(complex)
        vector = np.asarray(self.initial_state, dtype=complex)
        norm = np.linalg.norm(vector)
        if norm == 0:
            raise ParameterError("initial state vector is zero")
        return vector / norm

    @property
    def transition_weight(self) -> float:
        """sin^2(2 theta) / (pi h), the continuum weight of the 1 <-> 2 coupling"""
        return self.molecule.sigma(1, 2) ** 2 / (math.pi * self.molecule.reduced_planck)

    @cached_property
    def shifts(self) -> Tuple[float, float]:
        return energy_shift(1, self), energy_shift(2, self)

    @cached_property
    def gamma(self) -> float:
        return decay_rate(2, self)

    def validity(self) -> ValidityReport:
        gap = self.molecule.gap
        gamma = self.gamma
        return ValidityReport(gamma / gap, 1.0 / gap, 1.0 / gamma if gamma > 0 else math.inf)

    def with_molecule(self, molecule: MoleculeParams) -> 'PerturbativeInputs':
        return PerturbativeInputs(molecule, self.bath, self.initial_state, self.rel_tol)


@dataclass
class PropagatorElements:
    u_vac_11: complex
    u_vac_22: complex
    decay_rate: float
    shift_1: float
    shift_2: float
    u_alpha: Callable[[int, int, float], complex] = field(repr=False)
    dressing: Optional[float] = None


@dataclass
class ChiOverlaps:
    p1: float
    p2: float
    coherence: complex
    phase_shift: float

    def cauchy_schwarz_gap(self) -> float:
        """P1 P2 - |<chi_1|chi_2>|^2, non-negative up to round-off"""
        return self.p1 * self.p2 - abs(self.coherence) ** 2


@dataclass
class Trajectory:
    """P_R(t) record of one evaluation path"""
    t: np.ndarray
    p_right: np.ndarray
    p1: np.ndarray
    p2: np.ndarray
    coherence: np.ndarray
    path: str = GENERAL_PATH
    clipped: int = 0
    failures: List[Tuple[float, str]] = field(default_factory=list)

    def columns(self, names: Sequence[str] = ('t', 'P_R')) -> np.ndarray:
        lookup = {
            't': self.t, 'P_R': self.p_right, 'P_1': self.p1, 'P_2': self.p2,
            'Re_coherence': self.coherence.real, 'Im_coherence': self.coherence.imag,
        }
        missing = [name for name in names if name not in lookup]
        if missing:
            raise ParameterError(f"unknown trajectory columns {missing}")
        return np.column_stack([lookup[name] for name in names])


def _density_at(bath: SpectralDensity, omega: float) -> float:
    if bath.kind == TABULATED:
        lo, hi = bath.support
        if not lo <= omega <= hi:
            return 0.0
    return float(bath(omega))


def energy_shift(n: int, inputs: PerturbativeInputs) -> float:
    """
    Second-order level shift delta E_n including the counter-term.

    Uses Omega_rn int J/(w (w + Omega_rn)) = int J/w - P.V. int J/(w + Omega_rn).
    """
    if n not in (1, 2):
        raise ParameterError(f"level index must be 1 or 2, got {n}")
    bath, molecule = inputs.bath, inputs.molecule
    if bath.is_zero:
        return 0.0
    shift = 0.0
    for r in (1, 2):
        if r == n:
            continue
        weight = molecule.sigma(r, n) ** 2
        if weight == 0.0:
            continue
        omega_rn = molecule.frequency(r, n)
        shifted = principal_value(bath, -omega_rn, rel_tol=inputs.rel_tol)
        shift += weight * (bath.reorganization_integral() - shifted) / math.pi
    return shift


def decay_rate(n: int, inputs: PerturbativeInputs) -> float:
    """Golden-rule rate (2/h) sum_m sigma_mn^2 J(Omega_nm) over downward transitions"""
    if n not in (1, 2):
        raise ParameterError(f"level index must be 1 or 2, got {n}")
    molecule = inputs.molecule
    rate = 0.0
    for m in (1, 2):
        omega_nm = molecule.frequency(n, m)
        if m == n or omega_nm <= 0:
            continue
        rate += molecule.sigma(m, n) ** 2 * _density_at(inputs.bath, omega_nm)
    return 2.0 * rate / molecule.reduced_planck


def _dissipation(n: int, t: float, inputs: PerturbativeInputs) -> complex:
    """Phi_n(t) in a_n = exp(-i t dE_n/h) exp(-Phi_n)"""
    if t == 0 or inputs.bath.is_zero:
        return 0j
    weight = inputs.transition_weight
    if weight == 0.0:
        return 0j
    m = 2 if n == 1 else 1
    pole = -inputs.molecule.frequency(m, n)
    tol = inputs.rel_tol
    real = sinc_squared_integral(inputs.bath, pole, t, tol)
    imag = sine_over_square_integral(inputs.bath, pole, t, tol)
    return weight * complex(real, imag)


def u_vac_diagonal(n: int, t: float, inputs: PerturbativeInputs, resolved: bool = True) -> complex:
    """
    Vacuum-to-vacuum amplitude <n, vac|U(t)|n, vac>.

    With resolved=False the decay enters through the golden-rule rate only:
    exp(-Gamma_2 t/2) for the upper level and no decay for the ground level.
    """
    if n not in (1, 2):
        raise ParameterError(f"level index must be 1 or 2, got {n}")
    if t < 0:
        raise ParameterError("time must be non-negative")
    h = inputs.molecule.reduced_planck
    phase = np.exp(-1j * t * inputs.shifts[n - 1] / h)
    phi = _dissipation(n, t, inputs)
    if not resolved:
        decay = 0.5 * inputs.gamma * t if n == 2 else 0.0
        phi = complex(decay, phi.imag)
    return complex(phase * np.exp(-phi))


def u_alpha_element(m: int, n: int, omega: float, t: float, inputs: PerturbativeInputs) -> complex:
    """
    Interaction-picture one-excitation amplitude density <m, omega|U(t)|n, vac>.

    |element|^2 integrates over omega to the probability of emitting one quantum
    while going from n to m. Diagonal elements are dropped.
    """
    if omega <= 0:
        raise ParameterError("mode frequency must be positive")
    if m == n:
        return 0j
    sigma = inputs.molecule.sigma(m, n)
    if sigma == 0.0 or t == 0:
        return 0j
    y = omega + inputs.molecule.frequency(m, n)
    envelope = t if y == 0 else math.sin(y * t / 2) / (y / 2)
    strength = math.sqrt(_density_at(inputs.bath, omega) / (math.pi * inputs.molecule.reduced_planck))
    return 1j * strength * sigma * envelope * np.exp(0.5j * y * t)


def _dropped_dressing(t: float, inputs: PerturbativeInputs) -> float:
    """Norm of the diagonal one-excitation amplitudes, sigma_nn^2/(pi h) int J (1 - cos wt)/w^2"""
    bath = inputs.bath
    sigma = inputs.molecule.sigma(1, 1)
    if t == 0 or bath.is_zero or sigma == 0.0:
        return 0.0
    lo, hi = bath.support
    hi = min(hi, 40.0 * bath.scale)
    split = min(hi, 1.0 / t)

    def small(w):
        if w * t < 1e-4:
            return _density_at(bath, w) * t * t / 2
        return _density_at(bath, w) * (1 - math.cos(w * t)) / w ** 2

    def base(w):
        return _density_at(bath, w) / w ** 2

    total = quad(small, lo, split, limit=200)[0]
    if hi > split:
        total += quad(base, split, hi, limit=200)[0]
        total -= quad(base, split, hi, weight='cos', wvar=t, limit=500)[0]
    return sigma ** 2 * total / (math.pi * inputs.molecule.reduced_planck)


def propagator_elements(t: float, inputs: PerturbativeInputs, strict: bool = False) -> PropagatorElements:
    """Vacuum amplitudes, rate, shifts and the one-excitation amplitude density at time t"""
    dressing = _dropped_dressing(t, inputs) if strict else None
    return PropagatorElements(
        u_vac_11=u_vac_diagonal(1, t, inputs),
        u_vac_22=u_vac_diagonal(2, t, inputs),
        decay_rate=inputs.gamma,
        shift_1=inputs.shifts[0],
        shift_2=inputs.shifts[1],
        u_alpha=lambda m, n, omega: u_alpha_element(m, n, omega, t, inputs),
        dressing=dressing,
    )


def phase_shift(inputs: PerturbativeInputs) -> float:
    """zeta = (sin^2 2theta / h) (J'(Omega_21) - J(Omega_21)/Omega_21)"""
    molecule, bath = inputs.molecule, inputs.bath
    if bath.is_zero:
        return 0.0
    gap = molecule.gap
    if bath.kind == TABULATED and not bath.support[0] < gap < bath.support[1]:
        return 0.0
    slope = float(bath.derivative(gap))
    return molecule.sigma(1, 2) ** 2 / molecule.reduced_planck * (slope - float(bath(gap)) / gap)


def _cross_overlap(t: float, inputs: PerturbativeInputs) -> float:
    """
    Linear-order overlap of the two one-excitation vectors per unit c_1 c_2*:

        (sin^2 2theta/(pi h)) * 2 int J (cos(Omega t) - cos(w t)) / (w^2 - Omega^2) dw
    """
    gap = inputs.molecule.gap
    tol = inputs.rel_tol
    bath = inputs.bath
    upper = versine_integral(bath, gap, t, tol) - versine_integral(bath, -gap, t, tol)
    lower = sinc_integral(bath, gap, t, tol) + sinc_integral(bath, -gap, t, tol)
    return inputs.transition_weight * (math.cos(gap * t) * upper + math.sin(gap * t) * lower) / gap


def chi_overlaps(t: float, inputs: PerturbativeInputs) -> ChiOverlaps:
    """Norms and overlap of the bath-conditional vectors at time t"""
    if t < 0:
        raise ParameterError("time must be non-negative")
    c1, c2 = inputs.coefficients
    molecule = inputs.molecule
    zeta = phase_shift(inputs)
    a1 = u_vac_diagonal(1, t, inputs)
    a2 = u_vac_diagonal(2, t, inputs)
    w1, w2 = abs(c1) ** 2, abs(c2) ** 2
    lost_1 = 1.0 - abs(a1) ** 2
    lost_2 = 1.0 - abs(a2) ** 2
    p1 = w1 * abs(a1) ** 2 + w2 * lost_2
    p2 = w2 * abs(a2) ** 2 + w1 * lost_1
    coherence = np.conj(c1) * c2 * np.conj(a1) * a2 * np.exp(-1j * molecule.gap * t)
    if t > 0 and not inputs.bath.is_zero and inputs.transition_weight > 0:
        # n e^-n <= 1 - e^-n for either linear norm n, so the weighted cross term
        # stays inside the Cauchy-Schwarz bound and dies out with the upper level
        scale = abs(a1) * abs(a2)
        coherence += c1 * np.conj(c2) * scale * _cross_overlap(t, inputs)
    return ChiOverlaps(float(p1), float(p2), complex(coherence), zeta)


def _clip_probability(value: float, t: float) -> Tuple[float, bool]:
    if 0.0 <= value <= 1.0:
        return value, False
    excess = -value if value < 0 else value - 1.0
    level = logging.WARNING if excess > CLIP_TOLERANCE else logging.DEBUG
    logger.log(level, "P_R=%.6g clipped to [0, 1] at t=%.6g", value, t)
    return min(max(value, 0.0), 1.0), True


def _right_projection(overlaps: ChiOverlaps, molecule: MoleculeParams) -> float:
    theta = molecule.mixing_angle
    return (math.cos(theta) ** 2 * overlaps.p1 + math.sin(theta) ** 2 * overlaps.p2
            + math.sin(2 * theta) * overlaps.coherence.real)


def p_right_general(t: float, inputs: PerturbativeInputs) -> float:
    """Probability of the right-handed state from the full second-order overlaps"""
    value = _right_projection(chi_overlaps(t, inputs), inputs.molecule)
    return _clip_probability(value, t)[0]


def dilute_overlaps(t: float, inputs: PerturbativeInputs) -> ChiOverlaps:
    """Closed-form overlaps valid for 1/Omega << t << 1/Gamma_2"""
    molecule = inputs.molecule
    theta = molecule.mixing_angle
    c2, s2 = math.cos(theta) ** 2, math.sin(theta) ** 2
    gamma = inputs.gamma
    zeta = phase_shift(inputs)
    decay = math.exp(-gamma * t)
    frequency = molecule.gap + (inputs.shifts[1] - inputs.shifts[0]) / molecule.reduced_planck
    coherence = -0.5 * math.sin(2 * theta) * math.exp(-gamma * t / 2) * np.exp(-1j * (frequency * t + zeta))
    return ChiOverlaps(s2 + c2 * (1.0 - decay), c2 * decay, complex(coherence), zeta)


def p_right_dilute_closed_form(t: float, inputs: PerturbativeInputs) -> float:
    if t < 0:
        raise ParameterError("time must be non-negative")
    if inputs.initial_state != 'L':
        raise ParameterError("the dilute closed form starts from |L>")
    value = _right_projection(dilute_overlaps(t, inputs), inputs.molecule)
    return _clip_probability(value, t)[0]


def _evaluate_point(t: float, inputs: PerturbativeInputs, path: str):
    try:
        overlaps = (dilute_overlaps if path == DILUTE_PATH else chi_overlaps)(t, inputs)
    except QuadratureError as exc:
        return t, None, str(exc)
    return t, overlaps, None


def evolve_perturbative(t_grid: Sequence[float], inputs: PerturbativeInputs, path: str = GENERAL_PATH,
                        workers: int = 1) -> Trajectory:
    """
    P_R, populations and coherence on a time grid.

    Points whose quadrature fails are recorded in `failures` and filled with NaN;
    the rest of the grid is still evaluated.
    """
    if path not in (GENERAL_PATH, DILUTE_PATH):
        raise ParameterError(f"unknown evaluation path '{path}'")
    if path == DILUTE_PATH and inputs.initial_state != 'L':
        raise ParameterError("the dilute closed form starts from |L>")
    t_grid = np.asarray(t_grid, dtype=float)
    if np.any(t_grid < 0):
        raise ParameterError("time grid must be non-negative")
    report = inputs.validity()
    if not report.is_weak:
        logger.warning("Gamma_2/Omega_21 = %.3g: outside the weak-coupling regime",
                       report.weak_coupling_ratio)
    # fill the cached shifts before the inputs are copied to workers
    logger.debug("level shifts %.6g, %.6g; Gamma_2 = %.6g", *inputs.shifts, inputs.gamma)

    if workers > 1 and len(t_grid) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            points = list(pool.map(_evaluate_point, t_grid, [inputs] * len(t_grid),
                                   [path] * len(t_grid), chunksize=max(1, len(t_grid) // (4 * workers))))
    else:
        points = [_evaluate_point(t, inputs, path) for t in t_grid]

    size = len(t_grid)
    p_right, p1, p2 = np.full(size, np.nan), np.full(size, np.nan), np.full(size, np.nan)
    coherence = np.full(size, np.nan, dtype=complex)
    clipped, failures = 0, []
    for index, (t, overlaps, error) in enumerate(points):
        if overlaps is None:
            logger.error("t=%.6g: %s", t, error)
            failures.append((t, error))
            continue
        value, was_clipped = _clip_probability(_right_projection(overlaps, inputs.molecule), t)
        clipped += was_clipped
        p_right[index], p1[index], p2[index] = value, overlaps.p1, overlaps.p2
        coherence[index] = overlaps.coherence
    if clipped:
        logger.info("%d of %d points clipped to [0, 1]", clipped, size)
    return Trajectory(t_grid, p_right, p1, p2, coherence, path, clipped, failures)


def _log_linear_rate(t: np.ndarray, magnitude: np.ndarray) -> float:
    slope, _ = np.polyfit(t, np.log(magnitude), 1)
    return float(-slope)


def _extremum_amplitudes(t: np.ndarray, p_right: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Oscillation amplitude at each interior extremum: its distance from the mean of
    the two neighbouring opposite extrema. P_R(inf) and a slow drift of it cancel.
    """
    maxima, _ = find_peaks(p_right)
    minima, _ = find_peaks(-p_right)
    extrema = np.sort(np.concatenate([maxima, minima]))
    if len(extrema) < 3:
        return t[:0], p_right[:0]
    values = p_right[extrema]
    amplitude = np.abs(values[1:-1] - 0.5 * (values[:-2] + values[2:]))
    return t[extrema[1:-1]], amplitude


def equilibration_rate(trajectory: Trajectory, floor: float = 1e-12) -> float:
    """
    Rate r of |P_R(t) - P_R(inf)| ~ A exp(-r t), fitted on the envelope extrema.

    The amplitudes are taken between neighbouring maxima and minima, so P_R(inf)
    need not be reached inside the window. With fewer than three extrema above
    the floor the coherence envelope |<chi_1|chi_2>| is fitted instead.
    """
    finite = np.isfinite(trajectory.p_right)
    t, p_right = trajectory.t[finite], trajectory.p_right[finite]
    if len(t) < 3:
        raise ParameterError("not enough resolved points to fit an envelope")
    times, amplitude = _extremum_amplitudes(t, p_right)
    keep = amplitude > floor
    if keep.sum() >= 3:
        return _log_linear_rate(times[keep], amplitude[keep])

    logger.debug("%d envelope extrema; fitting the coherence envelope", int(keep.sum()))
    magnitude = np.abs(trajectory.coherence)
    mask = np.isfinite(magnitude) & (magnitude > floor) & (trajectory.t > 0)
    if mask.sum() < 2:
        raise ParameterError("not enough resolved points to fit an envelope")
    return _log_linear_rate(trajectory.t[mask], magnitude[mask])


def time_averaged(trajectory: Trajectory, start: float, stop: float) -> float:
    """Mean of P_R over points with start <= t <= stop"""
    mask = (trajectory.t >= start) & (trajectory.t <= stop) & np.isfinite(trajectory.p_right)
    if not mask.any():
        raise ParameterError(f"no points in [{start}, {stop}]")
    return float(np.mean(trajectory.p_right[mask]))
