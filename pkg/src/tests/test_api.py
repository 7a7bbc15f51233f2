#!/usr/bin/env python3
"""
Tests for the simulation API: scenario runs, figures, sweeps and CSV output
"""

import sys
import os
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', '..'))

import numpy as np
import pytest

from src.api.config import parse_config, parse_sweep
from src.api.output import Dataset, fingerprint, read_csv
from src.api.simulation_api import (FIGURES, SWEEP_COLUMNS, SimulationAPI, SimulationContext,
                                    reproduce_figure, run_scenario, run_sweep)
from src.core.dynamics import Trajectory, equilibration_rate
from src.core.errors import ParameterError
from src.core.model import MoleculeParams, isolated_tunneling_probability
from src.core.spectral import SpectralDensity

ISOLATED = """
molecule.delta_local = 3e-4
bath.kind = none
run.path = isolated
time.t_max = 1e4
time.points = 101
"""


def test_isolated_scenario_matches_closed_form():
    config = parse_config(ISOLATED)
    dataset = run_scenario(config)
    expected = isolated_tunneling_probability(config.molecule, dataset.column('t'))
    np.testing.assert_allclose(dataset.column('P_R'), expected, atol=1e-14)
    assert dataset.name == 'run_isolated'


def test_isolated_right_start_is_complement():
    config = parse_config(ISOLATED + "molecule.initial_state = R\n")
    dataset = run_scenario(config)
    expected = 1.0 - isolated_tunneling_probability(config.molecule, dataset.column('t'))
    np.testing.assert_allclose(dataset.column('P_R'), expected, atol=1e-12)


def test_general_path_without_bath_matches_isolated():
    config = parse_config(ISOLATED.replace("run.path = isolated", "run.path = general"))
    dataset = run_scenario(config)
    expected = isolated_tunneling_probability(config.molecule, dataset.column('t'))
    np.testing.assert_allclose(dataset.column('P_R'), expected, atol=1e-10)
    assert dataset.metadata['derived.gamma_2'] == 0.0
    assert dataset.metadata['derived.clipped_points'] == 0


def test_condensed_scenario_metadata():
    config = parse_config("bath.kind = ohmic\nbath.j0 = 1e-3\nbath.cutoff = 0.01\n"
                          "time.t_max = 1000\ntime.points = 5\nrun.columns = t,P_R,P_1,P_2\n")
    dataset = run_scenario(config)
    assert dataset.columns == ['t', 'P_R', 'P_1', 'P_2']
    np.testing.assert_allclose(dataset.column('P_1') + dataset.column('P_2'), 1.0, atol=1e-12)
    assert dataset.metadata['derived.weak_coupling_ratio'] < 0.1
    assert dataset.metadata['bath.resolved.kind'] == 'ohmic-debye'


def test_csv_is_deterministic(tmp_path):
    config = parse_config(ISOLATED)
    first = run_scenario(config).to_csv()
    second = run_scenario(parse_config(ISOLATED)).to_csv()
    assert first == second
    header = [line for line in first.splitlines() if line.startswith('#')]
    assert header[-1].startswith('# fingerprint = ')


def test_written_csv_reads_back(tmp_path):
    dataset = run_scenario(parse_config(ISOLATED))
    path = dataset.write(str(tmp_path))
    assert os.listdir(tmp_path) == ['run_isolated.csv']
    loaded = read_csv(path)
    assert loaded.columns == ['t', 'P_R']
    np.testing.assert_allclose(loaded.data, dataset.data, rtol=1e-11)
    assert loaded.metadata['run.path'] == 'isolated'


def test_dataset_shape_check():
    with pytest.raises(ValueError):
        Dataset('bad', ['t', 'P_R'], np.zeros((3, 3)))


def test_fingerprint_ignores_key_order():
    assert fingerprint({'a': 1, 'b': 2.5}) == fingerprint({'b': 2.5, 'a': 1})
    assert fingerprint({'a': 1}) != fingerprint({'a': 2})


def test_figure_catalogue():
    assert sorted(FIGURES) == ['fig1a', 'fig1b', 'fig2a', 'fig2b', 'fig3a', 'fig3b', 'fig4a', 'fig4b']
    curves = FIGURES['fig2a'].configs()
    assert [config.molecule.localization for _, config in curves] == [1e-5, -1e-5]
    assert all(config.path == 'dilute' for _, config in curves)
    assert FIGURES['fig3b'].configs()[2][1].bath.coupling == 30.0
    with pytest.raises(ParameterError):
        reproduce_figure('fig9')


def test_asymmetry_scan_figure():
    (dataset,) = reproduce_figure('fig1b')
    assert dataset.columns == ['eta', 'P_R', 'envelope']
    assert dataset.data.shape == (41, 3)
    assert np.all(dataset.column('P_R') <= dataset.column('envelope') + 1e-15)
    # strong asymmetry suppresses tunneling
    assert dataset.column('envelope')[-1] < 1e-3


def test_isolated_figure_curves():
    datasets = reproduce_figure('fig1a')
    assert [dataset.name for dataset in datasets] == ['fig1a_eta_0.0001', 'fig1a_eta_0.001', 'fig1a_eta_0.01']
    assert all(dataset.metadata['figure'] == 'fig1a' for dataset in datasets)


def test_sweep_over_localization():
    spec = parse_sweep("bath.kind = none\nrun.path = isolated\ntime.t_max = 1e4\ntime.points = 201\n",
                       'delta', [0.0, 1e-3, 1e-2])
    dataset = run_sweep(spec)
    assert dataset.columns == SWEEP_COLUMNS
    assert dataset.data.shape == (3, len(SWEEP_COLUMNS))
    np.testing.assert_array_equal(dataset.column('failed'), 0.0)
    envelopes = dataset.column('envelope')
    assert envelopes[0] == pytest.approx(1.0)
    assert envelopes[0] > envelopes[1] > envelopes[2]
    assert np.all(np.isnan(dataset.column('fitted_rate')))
    assert dataset.metadata['sweep.key'] == 'molecule.delta_local'


def test_api_writes_files(tmp_path):
    with SimulationContext(str(tmp_path)) as api:
        assert isinstance(api, SimulationAPI)
        path = api.isolated(MoleculeParams(1e-3), np.linspace(0.0, 100.0, 11))
        assert os.path.basename(path) == 'isolated.csv'
        table = api.spectral_dump(SpectralDensity.gas(1e-3, 0.5), points=101)
        loaded = SpectralDensity.from_table(table)
        assert loaded.support[1] == pytest.approx(5.0)
        assert api.run(parse_config(ISOLATED + "run.output = custom\n")).endswith('custom.csv')
    assert not [name for name in os.listdir(tmp_path) if name.endswith('.tmp')]


def test_asymmetry_scan_echoes_base_config():
    (dataset,) = reproduce_figure('fig1b')
    assert dataset.metadata['run.path'] == 'isolated'
    assert dataset.metadata['bath.kind'] == 'none'
    assert dataset.metadata['bath.resolved.coupling'] == 0.0
    assert dataset.metadata['scan.key'] == 'molecule.eta'
    assert 'molecule.eta' not in dataset.metadata


def as_trajectory(dataset):
    t = dataset.column('t')
    coherence = dataset.column('Re_coherence') + 1j * dataset.column('Im_coherence')
    return Trajectory(t, dataset.column('P_R'), dataset.column('P_1'), dataset.column('P_2'), coherence)


def test_dilute_racemization_ignores_sign_of_asymmetry():
    means = [dataset.metadata['derived.tail_mean_P_R'] for dataset in reproduce_figure('fig2a')]
    assert all(0.48 <= mean <= 0.52 for mean in means)
    assert abs(means[0] - means[1]) < 0.02


def test_dilute_rate_proportional_to_coupling():
    datasets = reproduce_figure('fig3a')
    rates = [equilibration_rate(as_trajectory(dataset)) for dataset in datasets]
    assert rates[0] < rates[1] < rates[2]
    assert rates[1] / rates[0] == pytest.approx(10.0, rel=0.1)
    assert rates[2] / rates[1] == pytest.approx(10.0, rel=0.1)
    gamma = datasets[1].metadata['derived.gamma_2']
    assert rates[1] == pytest.approx(gamma / 2, rel=0.1)


def test_dilute_sweep_fits_rate():
    spec = parse_sweep("bath.kind = subohmic\nbath.cutoff = 0.5\nmolecule.delta_local = 1e-5\n"
                       "run.path = dilute\ntime.t_max = 2e4\ntime.points = 1000\n",
                       'j0', [1e-4, 1e-3, 1e-2])
    dataset = run_sweep(spec)
    rates, gammas = dataset.column('fitted_rate'), dataset.column('gamma_2')
    np.testing.assert_allclose(rates, gammas / 2, rtol=0.1)


@pytest.mark.slow
def test_condensed_equilibrium_for_all_couplings():
    # the approach to equilibrium speeds up with J0 here; only the equilibrium value is shared
    datasets = reproduce_figure('fig3b')
    means = [dataset.metadata['derived.tail_mean_P_R'] for dataset in datasets]
    np.testing.assert_allclose(means, 0.5, atol=0.05)
    rates = [equilibration_rate(as_trajectory(dataset)) for dataset in datasets]
    assert all(rate > 0 for rate in rates)


@pytest.mark.slow
def test_condensed_asymmetry_curves_record_extremes():
    datasets = {dataset.name: dataset for dataset in reproduce_figure('fig2b')}
    for name in ('fig2b_delta_local_1e-05', 'fig2b_delta_local_-1e-05'):
        assert datasets[name].metadata['derived.tail_mean_P_R'] == pytest.approx(0.5, abs=0.05)
    for name in ('fig2b_delta_local_0.001', 'fig2b_delta_local_-0.001'):
        metadata = datasets[name].metadata
        assert metadata['derived.tail_mean_P_R'] == pytest.approx(0.75, abs=0.02)
        assert metadata['derived.max_P_R'] >= metadata['derived.tail_mean_P_R']
