"""
Discrete-bath reference evolution.

The bath is replaced by N modes and the molecule + bath state is evolved exactly
inside the space of at most two bath excitations. The perturbative results are
compared against this evolution at weak coupling.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import expm_multiply

from .dynamics import PerturbativeInputs, evolve_perturbative
from .errors import OracleError, ParameterError, TruncationInvalidError
from .model import MoleculeParams
from .spectral import SpectralDensity

logger = logging.getLogger(__name__)

DEFAULT_MODES = 200
LOWEST_MODE_FRACTION = 1.0 / 500.0
NORM_DRIFT_LIMIT = 1e-6
TRUNCATION_BOUND = 1e-3
AGREEMENT_THRESHOLD = 0.01
MAX_DIMENSION = 500_000

LINEAR = 'linear'
LOG = 'log'


@dataclass(frozen=True)
class DiscreteBath:
    """N harmonic modes with couplings gamma_a^2 = (2/pi) J(w_a) dw_a / w_a^3"""
    frequencies: np.ndarray
    couplings: np.ndarray
    widths: np.ndarray
    scheme: str = LINEAR
    omega_max: float = 0.0
    residual: float = 0.0

    @property
    def size(self) -> int:
        return len(self.frequencies)

    def spectral_weights(self) -> np.ndarray:
        """(pi/2) gamma^2 w^3 / dw, the reconstructed J at the mode frequencies"""
        return 0.5 * math.pi * self.couplings ** 2 * self.frequencies ** 3 / self.widths

    def coupling_constants(self, reduced_planck: float) -> np.ndarray:
        """g_a in the frequency-unit generator, g_a sigma_z (a + a^dagger)"""
        return -self.frequencies ** 1.5 * self.couplings / math.sqrt(2.0 * reduced_planck)

    def spacing_near(self, omega: float) -> float:
        return float(self.widths[np.argmin(np.abs(self.frequencies - omega))])


def _bin_edges(scheme: str, lower: float, upper: float, count: int) -> np.ndarray:
    if scheme == LINEAR:
        return np.linspace(lower, upper, count + 1)
    if scheme == LOG:
        return np.geomspace(lower, upper, count + 1)
    raise ParameterError(f"unknown sampling scheme '{scheme}'")


def discretize(density: SpectralDensity, n_modes: int = DEFAULT_MODES, omega_max: Optional[float] = None,
               scheme: str = LINEAR, omega_min: Optional[float] = None) -> DiscreteBath:
    """
    Sample the spectral density on N bins of [omega_min, omega_max].

    The residual is the largest deviation between J at a bin centre and the bin
    average of J, relative to the peak of J.
    """
    if n_modes < 2:
        raise ParameterError("need at least two modes")
    if omega_max is None:
        omega_max = 10.0 * density.scale
    if omega_min is None:
        omega_min = omega_max * LOWEST_MODE_FRACTION
    if omega_max <= 0 or omega_min <= 0:
        raise ParameterError("mode grid must exclude omega = 0")
    if omega_min >= omega_max:
        raise ParameterError("omega_min must be below omega_max")

    edges = _bin_edges(scheme, omega_min, omega_max, n_modes)
    widths = np.diff(edges)
    if scheme == LINEAR:
        centres = 0.5 * (edges[:-1] + edges[1:])
    else:
        centres = np.sqrt(edges[:-1] * edges[1:])
    values = np.asarray(density(centres), dtype=float)
    couplings = np.sqrt(2.0 / math.pi * values * widths / centres ** 3)

    # five-point Gauss-Legendre bin averages
    nodes, weights = np.polynomial.legendre.leggauss(5)
    samples = 0.5 * (edges[:-1, None] + edges[1:, None]) + 0.5 * widths[:, None] * nodes[None, :]
    averages = 0.5 * np.asarray(density(samples), dtype=float) @ weights
    peak = float(np.max(values)) if np.any(values > 0) else 1.0
    residual = float(np.max(np.abs(values - averages))) / peak
    logger.debug("discretized %d %s modes on [%.4g, %.4g], residual %.3g", n_modes, scheme,
                 omega_min, omega_max, residual)
    return DiscreteBath(centres, couplings, widths, scheme, omega_max, residual)


def sector_sizes(n_modes: int) -> Tuple[int, int, int]:
    """Number of bath configurations with zero, one and two excitations"""
    return 1, n_modes, n_modes * (n_modes + 1) // 2


@dataclass
class TruncatedState:
    """Amplitudes over level (1, 2) x bath configuration (vac, one, two excitations)"""
    amplitudes: np.ndarray
    n_modes: int

    @property
    def block(self) -> int:
        return sum(sector_sizes(self.n_modes))

    @classmethod
    def vacuum(cls, molecular: Sequence[complex], n_modes: int) -> 'TruncatedState':
        block = sum(sector_sizes(n_modes))
        amplitudes = np.zeros(2 * block, dtype=complex)
        amplitudes[0], amplitudes[block] = molecular
        return cls(amplitudes, n_modes)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def two_excitation_weight(self) -> float:
        start = 1 + self.n_modes
        levels = self.amplitudes.reshape(2, self.block)
        return float(np.sum(np.abs(levels[:, start:]) ** 2))

    def right_probability(self, molecule: MoleculeParams) -> float:
        """<R| projection summed over all bath configurations"""
        levels = self.amplitudes.reshape(2, self.block)
        right = molecule.chiral_amplitudes('R') @ levels
        return float(np.sum(np.abs(right) ** 2))


def build_hamiltonian(molecule: MoleculeParams, bath: DiscreteBath,
                      max_dimension: int = MAX_DIMENSION) -> sparse.csr_matrix:
    """
    Frequency-unit generator K = K_M + sum w a^dag a + sum g sigma_z (a + a^dag) + counter-term,
    restricted to at most two bath excitations.
    """
    n = bath.size
    _, singles, doubles = sector_sizes(n)
    block = 1 + singles + doubles
    if 2 * block > max_dimension:
        raise OracleError(f"truncated space of dimension {2 * block} exceeds the bound {max_dimension}")

    omega = bath.frequencies
    g = bath.coupling_constants(molecule.reduced_planck)
    first, second = np.triu_indices(n)
    double_index = 1 + n + np.arange(doubles)

    energies = np.concatenate([[0.0], omega, omega[first] + omega[second]])
    counter_term = 0.5 * float(np.sum(omega ** 2 * bath.couplings ** 2)) / molecule.reduced_planck

    # (a + a^dag) weighted by g, upper triangle only
    rows = [np.zeros(n, dtype=int), 1 + first]
    cols = [1 + np.arange(n), double_index]
    vals = [g, np.where(first == second, math.sqrt(2.0), 1.0) * g[second]]
    distinct = first != second
    rows.append(1 + second[distinct])
    cols.append(double_index[distinct])
    vals.append(g[first[distinct]])
    upper = sparse.coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                              shape=(block, block))
    displacement = (upper + upper.T).tocsr()

    two_theta = 2.0 * molecule.mixing_angle
    sigma_z = np.array([[math.cos(two_theta), math.sin(two_theta)],
                        [math.sin(two_theta), -math.cos(two_theta)]])
    generator = (sparse.kron(molecule.hamiltonian() + counter_term * np.eye(2), sparse.identity(block))
                 + sparse.kron(sparse.identity(2), sparse.diags(energies))
                 + sparse.kron(sigma_z, displacement))
    logger.debug("assembled truncated generator: dimension %d, %d non-zeros", 2 * block, generator.nnz)
    return generator.tocsr()


@dataclass
class OracleRun:
    t: np.ndarray
    p_right: np.ndarray
    norm: np.ndarray
    two_excitation: np.ndarray
    dimension: int

    @property
    def max_two_excitation(self) -> float:
        return float(np.max(self.two_excitation)) if len(self.two_excitation) else 0.0

    def is_valid(self, bound: float = TRUNCATION_BOUND) -> bool:
        return self.max_two_excitation <= bound


def evolve(molecule: MoleculeParams, bath: DiscreteBath, t_grid: Sequence[float],
           initial: Optional[TruncatedState] = None, generator: Optional[sparse.csr_matrix] = None,
           norm_limit: float = NORM_DRIFT_LIMIT) -> OracleRun:
    """
    Exact evolution on an ascending time grid, starting from |L> x |vac> by default.

    Raises:
        OracleError: the state norm drifted by more than norm_limit
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if np.any(t_grid < 0) or np.any(np.diff(t_grid) < 0):
        raise ParameterError("time grid must be non-negative and ascending")
    if generator is None:
        generator = build_hamiltonian(molecule, bath)
    if initial is None:
        initial = TruncatedState.vacuum(molecule.chiral_amplitudes('L'), bath.size)
    state = TruncatedState(initial.amplitudes / initial.norm(), bath.size)
    operator = -1j * generator

    size = len(t_grid)
    p_right, norms, weights = np.empty(size), np.empty(size), np.empty(size)
    previous = 0.0
    for index, t in enumerate(t_grid):
        if t > previous:
            state.amplitudes = expm_multiply(operator * (t - previous), state.amplitudes)
            previous = t
        norms[index] = state.norm()
        if abs(norms[index] - 1.0) > norm_limit:
            raise OracleError(f"norm drifted to {norms[index]:.12f} at t={t:.6g}")
        weights[index] = state.two_excitation_weight()
        p_right[index] = state.right_probability(molecule)
    return OracleRun(t_grid, p_right, norms, weights, generator.shape[0])


def golden_rule_discrete(molecule: MoleculeParams, bath: DiscreteBath,
                         broadening: Optional[float] = None) -> float:
    """
    Gamma_2 from the mode sum with each delta function replaced by a Lorentzian.

    The sum runs over the modes inside the largest band window centred on Omega_21
    and is divided by the Lorentzian mass of that window, so the slope of J cancels
    and the band edges do not bias the estimate.
    """
    gap = molecule.gap
    spacing = bath.spacing_near(gap)
    if broadening is None:
        broadening = 2.0 * spacing
    if broadening < 2.0 * spacing:
        logger.warning("broadening %.3g is below twice the mode spacing %.3g", broadening, spacing)
    lower = bath.frequencies[0] - 0.5 * bath.widths[0]
    upper = bath.frequencies[-1] + 0.5 * bath.widths[-1]
    offsets = bath.frequencies - gap
    window = np.abs(offsets) <= min(gap - lower, upper - gap)
    if not bath.frequencies[0] < gap < bath.frequencies[-1] or window.sum() < 2:
        logger.warning("transition frequency %.3g is not resolved by the sampled band", gap)
        window = np.ones(bath.size, dtype=bool)
    lorentzian = broadening / math.pi / (offsets[window] ** 2 + broadening ** 2)
    weights = 0.5 * math.pi * bath.couplings[window] ** 2 * bath.frequencies[window] ** 3
    density = float(np.sum(weights * lorentzian) / np.sum(lorentzian * bath.widths[window]))
    return 2.0 / molecule.reduced_planck * molecule.sigma(1, 2) ** 2 * density


@dataclass
class OracleComparison:
    t: np.ndarray
    perturbative: np.ndarray
    oracle: np.ndarray
    run: OracleRun
    threshold: float = AGREEMENT_THRESHOLD
    notes: List[str] = field(default_factory=list)

    @property
    def deviation(self) -> np.ndarray:
        return np.abs(self.perturbative - self.oracle)

    @property
    def max_deviation(self) -> float:
        return float(np.nanmax(self.deviation))

    @property
    def passed(self) -> bool:
        return self.max_deviation <= self.threshold

    def report(self) -> str:
        lines = ["t, P_R_perturbative, P_R_oracle, abs_diff"]
        for row in zip(self.t, self.perturbative, self.oracle, self.deviation):
            lines.append(", ".join(f"{value:.12e}" for value in row))
        verdict = "PASS" if self.passed else "FAIL"
        lines.append(f"# max deviation = {self.max_deviation:.6e} (threshold {self.threshold:g}) {verdict}")
        lines.append(f"# max two-excitation weight = {self.run.max_two_excitation:.6e}")
        lines.extend(f"# {note}" for note in self.notes)
        return "\n".join(lines) + "\n"


def compare(inputs: PerturbativeInputs, t_grid: Sequence[float], n_modes: int = DEFAULT_MODES,
            omega_max: Optional[float] = None, scheme: str = LINEAR,
            threshold: float = AGREEMENT_THRESHOLD, truncation_bound: float = TRUNCATION_BOUND,
            workers: int = 1) -> OracleComparison:
    """
    Run the discrete-bath evolution and the perturbative path on the same grid.

    Raises:
        TruncationInvalidError: the two-excitation weight exceeded truncation_bound
    """
    if not isinstance(inputs.initial_state, str):
        initial = TruncatedState.vacuum(inputs.coefficients, n_modes)
    else:
        initial = TruncatedState.vacuum(inputs.molecule.chiral_amplitudes(inputs.initial_state), n_modes)
    bath = discretize(inputs.bath, n_modes, omega_max, scheme)
    run = evolve(inputs.molecule, bath, t_grid, initial=initial)
    if not run.is_valid(truncation_bound):
        raise TruncationInvalidError(
            f"two-excitation weight {run.max_two_excitation:.3g} exceeds {truncation_bound:g}",
            run.max_two_excitation)
    trajectory = evolve_perturbative(t_grid, inputs, workers=workers)
    notes = [f"modes = {n_modes}, scheme = {scheme}, omega_max = {bath.omega_max:.6g}",
             f"reconstruction residual = {bath.residual:.3e}"]
    recurrence = 2.0 * math.pi / bath.spacing_near(inputs.molecule.gap)
    if run.t[-1] > recurrence / 2:
        notes.append(f"grid extends past half the recurrence time {recurrence:.4g}")
    comparison = OracleComparison(run.t, trajectory.p_right, run.p_right, run, threshold, notes)
    logger.info("oracle comparison: max deviation %.3e over %d points", comparison.max_deviation,
                len(run.t))
    return comparison
