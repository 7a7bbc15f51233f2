"""
High-level interface: scenario runs, parameter sweeps, figure reproduction and oracle comparisons.

Every operation returns `Dataset` objects; `SimulationAPI` adds the file handling
and `SimulationContext` owns the worker pool shared by curves and sweep points.
"""

import logging
import math
import os
from concurrent.futures import Executor, ProcessPoolExecutor
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from tqdm import tqdm

from src.core.dynamics import (DILUTE_PATH, GENERAL_PATH, PerturbativeInputs, Trajectory,
                               equilibration_rate, evolve_perturbative, time_averaged)
from src.core.errors import ChiralSimError, ParameterError, QuadratureError
from src.core.model import MoleculeParams, isolated_tunneling_probability
from src.core.oracle import OracleComparison, TruncatedState, compare, discretize, evolve
from src.core.spectral import SpectralDensity, TABULATED
from .config import ScenarioConfig, SweepSpec
from .output import Dataset, write_atomic

logger = logging.getLogger(__name__)

TAIL_FRACTION = 0.2


def scenario_inputs(config: ScenarioConfig, bath: Optional[SpectralDensity] = None) -> PerturbativeInputs:
    return PerturbativeInputs(config.molecule, bath or config.bath, config.initial_state, config.tolerance)


def _scenario_metadata(config: ScenarioConfig, inputs: PerturbativeInputs) -> Dict[str, Any]:
    metadata = config.to_dict()
    if config.path != 'isolated':
        report = inputs.validity()
        metadata.update({
            'derived.gamma_2': inputs.gamma,
            'derived.delta_E_1': inputs.shifts[0],
            'derived.delta_E_2': inputs.shifts[1],
            'derived.weak_coupling_ratio': report.weak_coupling_ratio,
        })
    return metadata


def isolated_trajectory(molecule: MoleculeParams, t_grid: Sequence[float], initial_state: str = 'L') -> Trajectory:
    """Closed-system trajectory; P_R is the exact two-level tunneling probability"""
    inputs = PerturbativeInputs(molecule, SpectralDensity.zero(), initial_state)
    trajectory = evolve_perturbative(t_grid, inputs)
    if initial_state == 'L':
        trajectory.p_right = np.asarray(isolated_tunneling_probability(molecule, trajectory.t))
    trajectory.path = 'isolated'
    return trajectory


def _oracle_dataset(config: ScenarioConfig, name: str, metadata: Dict[str, Any]) -> Dataset:
    settings = config.oracle
    bath = discretize(config.bath, settings.modes, settings.omega_max, settings.scheme)
    initial = TruncatedState.vacuum(config.molecule.chiral_amplitudes(config.initial_state), bath.size)
    run = evolve(config.molecule, bath, config.times.values(), initial=initial)
    metadata.update({'oracle.dimension': run.dimension,
                     'oracle.max_two_excitation': run.max_two_excitation,
                     'oracle.residual': bath.residual})
    data = np.column_stack([run.t, run.p_right, run.norm, run.two_excitation])
    return Dataset(name, ['t', 'P_R', 'norm', 'two_excitation'], data, metadata)


def run_scenario(config: ScenarioConfig, workers: int = 1, name: Optional[str] = None) -> Dataset:
    """
    Evaluate P_R on the configured grid along the configured path.

    Raises:
        QuadratureError: some time points failed; the message lists them
    """
    name = name or config.output or f"run_{config.path}"
    t_grid = config.times.values()
    if config.path == 'isolated':
        trajectory = isolated_trajectory(config.molecule, t_grid, config.initial_state)
        return Dataset(name, list(config.columns), trajectory.columns(config.columns), config.to_dict())

    inputs = scenario_inputs(config)
    metadata = _scenario_metadata(config, inputs)
    if config.path == 'oracle':
        return _oracle_dataset(config, name, metadata)

    path = DILUTE_PATH if config.path == 'dilute' else GENERAL_PATH
    trajectory = evolve_perturbative(t_grid, inputs, path=path, workers=workers)
    if trajectory.failures:
        times = ", ".join(f"{t:.6g}" for t, _ in trajectory.failures)
        raise QuadratureError(f"P_R failed at t = {times}: {trajectory.failures[0][1]}")
    metadata['derived.clipped_points'] = trajectory.clipped
    return Dataset(name, list(config.columns), trajectory.columns(config.columns), metadata)


# Figures

DILUTE_BASE = {
    'bath.kind': 'subohmic', 'bath.j0': 1e-3, 'bath.cutoff': 0.5, 'molecule.delta_local': 1e-5,
    'run.path': 'dilute', 'time.t_max': 2e4, 'time.points': 1000,
}
CONDENSED_BASE = {
    'bath.kind': 'ohmic', 'bath.j0': 10.0, 'bath.cutoff': 0.01, 'molecule.delta_local': 1e-5,
    'run.path': 'general', 'time.t_max': 2e3, 'time.points': 1000,
}
ISOLATED_BASE = {'bath.kind': 'none', 'run.path': 'isolated', 'time.t_max': 1e4, 'time.points': 1000}


@dataclass(frozen=True)
class FigureSpec:
    description: str
    base: Dict[str, Any]
    key: str
    values: Tuple[float, ...]

    def configs(self) -> List[Tuple[str, ScenarioConfig]]:
        curves = []
        for value in self.values:
            document = dict(self.base)
            document.pop(self.key, None)
            if self.key == 'molecule.eta':
                document.pop('molecule.delta_local', None)
            document[self.key] = value
            document['run.columns'] = ','.join(('t', 'P_R', 'P_1', 'P_2', 'Re_coherence', 'Im_coherence'))
            label = f"{self.key.split('.')[-1]}_{value:g}"
            curves.append((label, ScenarioConfig.from_dict(document)))
        return curves


FIGURES = {
    'fig1a': FigureSpec("isolated tunneling for several asymmetries", ISOLATED_BASE,
                        'molecule.eta', (1e-4, 1e-3, 1e-2)),
    'fig1b': FigureSpec("isolated P_R at t = 1000 against the asymmetry", ISOLATED_BASE,
                        'molecule.eta', tuple(np.geomspace(1e-5, 1e-1, 41))),
    'fig2a': FigureSpec("dilute gas, both signs of delta", DILUTE_BASE,
                        'molecule.delta_local', (1e-5, -1e-5)),
    'fig2b': FigureSpec("condensed phase, several delta", CONDENSED_BASE,
                        'molecule.delta_local', (1e-5, -1e-5, 1e-4, -1e-4, 1e-3, -1e-3)),
    'fig3a': FigureSpec("dilute gas, coupling strength", DILUTE_BASE, 'bath.j0', (1e-4, 1e-3, 1e-2)),
    'fig3b': FigureSpec("condensed phase, coupling strength", CONDENSED_BASE, 'bath.j0', (10.0, 20.0, 30.0)),
    'fig4a': FigureSpec("dilute gas, cut-off frequency", DILUTE_BASE, 'bath.cutoff', (1e-1, 1e-2, 1e-3)),
    'fig4b': FigureSpec("condensed phase, cut-off frequency", CONDENSED_BASE, 'bath.cutoff', (1e-2, 1e-1, 1.0)),
}
PROBE_TIME = 1000.0


def _run_curve(job: Tuple[str, ScenarioConfig]) -> Dataset:
    name, config = job
    return run_scenario(config, name=name)


def _map(function, jobs: Sequence[Any], executor: Optional[Executor], description: str) -> List[Any]:
    # None lets tqdm switch itself off when stderr is not a terminal
    disable = None if len(jobs) > 1 and logger.isEnabledFor(logging.INFO) else True
    if executor is None or len(jobs) < 2:
        return [function(job) for job in tqdm(jobs, desc=description, disable=disable)]
    return list(tqdm(executor.map(function, jobs), total=len(jobs), desc=description, disable=disable))


def _asymmetry_scan(spec: FigureSpec) -> Dataset:
    rows = []
    curves = spec.configs()
    for label, config in curves:
        probability = isolated_tunneling_probability(config.molecule, PROBE_TIME)
        rows.append((config.molecule.localization, probability, config.molecule.envelope))
    metadata = curves[0][1].to_dict()
    for key in (spec.key, 'molecule.resolved_delta_local'):
        metadata.pop(key, None)
    metadata.update({'figure': 'fig1b', 'description': spec.description, 'probe_time': PROBE_TIME,
                     'scan.key': spec.key})
    return Dataset('fig1b', ['eta', 'P_R', 'envelope'], np.array(rows), metadata)


def reproduce_figure(figure_id: str, executor: Optional[Executor] = None) -> List[Dataset]:
    """One dataset per curve of the figure, parameters baked in"""
    if figure_id not in FIGURES:
        raise ParameterError(f"unknown figure '{figure_id}'; choose from {', '.join(FIGURES)}")
    spec = FIGURES[figure_id]
    if figure_id == 'fig1b':
        return [_asymmetry_scan(spec)]
    jobs = [(f"{figure_id}_{label}", config) for label, config in spec.configs()]
    datasets = _map(_run_curve, jobs, executor, figure_id)
    for dataset in datasets:
        t, p_right = dataset.column('t'), dataset.column('P_R')
        tail = t >= t[0] + (1.0 - TAIL_FRACTION) * (t[-1] - t[0])
        dataset.metadata.update({'figure': figure_id, 'description': spec.description,
                                 'derived.max_P_R': float(np.nanmax(p_right)),
                                 'derived.tail_mean_P_R': float(np.nanmean(p_right[tail]))})
    return datasets


# Sweeps

SWEEP_COLUMNS = ['value', 'mean_P_R', 'fitted_rate', 'gamma_2', 'envelope', 'failed']


def _sweep_point(job: Tuple[float, ScenarioConfig]) -> Tuple[float, ...]:
    value, config = job
    envelope = config.molecule.envelope
    try:
        dataset = run_scenario(config, name='sweep')
    except ChiralSimError as exc:
        logger.error("sweep value %g failed: %s", value, exc)
        return value, math.nan, math.nan, math.nan, envelope, 1.0
    t, p_right = dataset.column('t'), dataset.column('P_R')
    coherence = np.zeros_like(t, dtype=complex)
    if 'Re_coherence' in dataset.columns:
        coherence = dataset.column('Re_coherence') + 1j * dataset.column('Im_coherence')
    trajectory = Trajectory(t, p_right, np.zeros_like(t), np.zeros_like(t), coherence)
    start = t[0] + (1.0 - TAIL_FRACTION) * (t[-1] - t[0])
    mean = time_averaged(trajectory, start, t[-1])
    gamma = float(dataset.metadata.get('derived.gamma_2', 0.0))
    rate = math.nan
    if config.path != 'isolated':
        try:
            rate = equilibration_rate(trajectory)
        except ParameterError as exc:
            logger.warning("sweep value %g: %s", value, exc)
    return value, mean, rate, gamma, envelope, 0.0


def run_sweep(spec: SweepSpec, executor: Optional[Executor] = None) -> Dataset:
    """One row per swept value; failing values are marked and the sweep continues"""
    jobs = []
    for value in spec.values:
        config = spec.config_for(value)
        if 'P_R' not in config.columns:
            config.columns = config.columns + ('P_R',)
        if 't' not in config.columns:
            config.columns = ('t',) + config.columns
        if config.path in ('general', 'dilute'):
            # the rate fit falls back to the coherence envelope
            config.columns = config.columns + tuple(name for name in ('Re_coherence', 'Im_coherence')
                                                    if name not in config.columns)
        jobs.append((value, config))
    rows = _map(_sweep_point, jobs, executor, f"sweep {spec.parameter}")
    metadata = {f'base.{key}': value for key, value in spec.base.items()}
    metadata.update({'sweep.parameter': spec.parameter, 'sweep.key': spec.key,
                     'sweep.tail_fraction': TAIL_FRACTION})
    return Dataset(f"sweep_{spec.parameter}", SWEEP_COLUMNS, np.array(rows, dtype=float), metadata)


def oracle_compare(config: ScenarioConfig, n_modes: Optional[int] = None, omega_max: Optional[float] = None,
                   workers: int = 1) -> OracleComparison:
    """Discrete-bath evolution against the perturbative P_R on the configured grid"""
    inputs = scenario_inputs(config)
    report = inputs.validity()
    if not report.is_weak:
        logger.warning("oracle comparison outside weak coupling (Gamma_2/Omega_21 = %.3g)",
                       report.weak_coupling_ratio)
    settings = config.oracle
    return compare(inputs, config.times.values(), n_modes or settings.modes,
                   omega_max if omega_max is not None else settings.omega_max, settings.scheme,
                   settings.threshold, settings.truncation_bound, workers=workers)


def spectral_grid(density: SpectralDensity, points: int = 1001, omega_max: Optional[float] = None) -> np.ndarray:
    if density.kind == TABULATED:
        return np.array(density.table[0])
    return np.linspace(0.0, omega_max or 10.0 * density.scale, points)


class SimulationAPI:
    """Runs operations and writes their results below one output directory"""

    def __init__(self, out_dir: str = ".", workers: int = 1, executor: Optional[Executor] = None):
        self.out_dir = out_dir
        self.workers = workers
        self.executor = executor
        os.makedirs(out_dir, exist_ok=True)

    def isolated(self, molecule: MoleculeParams, t_grid: Sequence[float], name: str = "isolated") -> str:
        """
        Write the closed-system P_R(t).

        Args:
            molecule: two-level parameters
            t_grid: non-negative times

        Returns:
            str: path of the CSV file
        """
        trajectory = isolated_trajectory(molecule, t_grid)
        metadata = {f'molecule.{key}': value for key, value in molecule.to_dict().items()}
        metadata['molecule.envelope'] = molecule.envelope
        dataset = Dataset(name, ['t', 'P_R'], trajectory.columns(('t', 'P_R')), metadata)
        return dataset.write(self.out_dir)

    def run(self, config: ScenarioConfig) -> str:
        return run_scenario(config, workers=self.workers).write(self.out_dir)

    def figure(self, figure_id: str) -> List[str]:
        """
        Write every curve of a figure.

        Returns:
            list: CSV paths, one per curve
        """
        return [dataset.write(self.out_dir) for dataset in reproduce_figure(figure_id, self.executor)]

    def sweep(self, spec: SweepSpec) -> str:
        return run_sweep(spec, self.executor).write(self.out_dir)

    def oracle_compare(self, config: ScenarioConfig, n_modes: Optional[int] = None,
                       omega_max: Optional[float] = None) -> Tuple[OracleComparison, str]:
        """
        Compare against the discrete bath and write the plain-text report.

        Returns:
            tuple: (comparison, report path)
        """
        comparison = oracle_compare(config, n_modes, omega_max, self.workers)
        path = os.path.join(self.out_dir, (config.output or 'oracle_compare') + '.txt')
        write_atomic(path, comparison.report())
        return comparison, path

    def spectral_dump(self, density: SpectralDensity, points: int = 1001,
                      omega_max: Optional[float] = None, name: str = "spectral_density") -> str:
        path = os.path.join(self.out_dir, name + '.tsv')
        density.to_table(path, spectral_grid(density, points, omega_max))
        logger.info("wrote %s", path)
        return path


class SimulationContext:
    """Context manager owning the process pool used for curves and sweep points"""

    def __init__(self, out_dir: str = ".", workers: int = 1):
        self.out_dir = out_dir
        self.workers = workers
        self.pool = None
        self.api = None

    def __enter__(self) -> SimulationAPI:
        if self.workers > 1:
            self.pool = ProcessPoolExecutor(max_workers=self.workers)
        self.api = SimulationAPI(self.out_dir, self.workers, self.pool)
        return self.api

    def __exit__(self, exc_type, exc_val, exc_tb):
        if self.pool:
            self.pool.shutdown(wait=exc_type is None, cancel_futures=exc_type is not None)
