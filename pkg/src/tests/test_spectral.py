#!/usr/bin/env python3
"""
Tests for the bath spectral densities and their microscopic parameterizations
"""

import math
import sys
import os
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', '..'))

import numpy as np
import pytest
from scipy.integrate import quad

from src.core.errors import ParameterError
from src.core.model import UnitSystem
from src.core.spectral import (DebyeSolventParams, GasMicroParams, SpectralDensity, debye_closed_form,
                               debye_params, gas_closed_form, gas_micro_exact, gas_micro_integral,
                               fit_gas_constant, gas_density_from_micro, gas_params_from_micro)


def test_closed_forms():
    assert gas_closed_form(4.0, 2.0, 1.0) == pytest.approx(2.0 * 2.0 * math.exp(-4.0))
    assert debye_closed_form(0.5, 3.0, 0.25) == pytest.approx(3.0 * 0.5 * math.exp(-2.0))
    assert SpectralDensity.gas(1.0, 1.0)(0.0) == 0.0


def test_negative_frequency_rejected():
    with pytest.raises(ParameterError):
        SpectralDensity.debye(1.0, 1.0)(-0.1)


def test_zero_density():
    density = SpectralDensity.zero()
    assert density.is_zero
    assert density(1.0) == 0.0
    assert density.reorganization_integral() == 0.0


@pytest.mark.parametrize("density", [SpectralDensity.gas(1e-3, 0.5), SpectralDensity.debye(10.0, 0.01)])
def test_reorganization_integral(density):
    expected, _ = quad(lambda w: density(w) / w, 0.0, math.inf, limit=200)
    assert density.reorganization_integral() == pytest.approx(expected, rel=1e-6)


@pytest.mark.parametrize("density", [SpectralDensity.gas(1e-3, 0.5), SpectralDensity.debye(10.0, 0.01)])
def test_analytic_derivatives(density):
    omega = 0.7 * density.cutoff
    step = 1e-6 * density.cutoff
    slope = (density(omega + step) - density(omega - step)) / (2 * step)
    step = 1e-4 * density.cutoff
    curvature = (density(omega + step) - 2 * density(omega) + density(omega - step)) / step ** 2
    assert density.derivative(omega) == pytest.approx(slope, rel=1e-6)
    assert density.second_derivative(omega) == pytest.approx(curvature, rel=1e-3)


def test_gas_derivative_diverges_at_origin():
    with pytest.raises(ParameterError):
        SpectralDensity.gas(1.0, 1.0).derivative(0.0)


def test_peak_frequency():
    assert SpectralDensity.gas(1.0, 0.5).peak_frequency == pytest.approx(0.25)
    assert SpectralDensity.debye(1.0, 0.01).peak_frequency == pytest.approx(0.01)


def test_tabulated_interpolates_closed_form():
    reference = SpectralDensity.debye(2.0, 1.0)
    omega = np.linspace(0.0, 20.0, 2001)
    table = SpectralDensity.tabulated(omega, reference(omega))
    points = np.array([0.33, 1.0, 4.2])
    np.testing.assert_allclose(table(points), reference(points), rtol=1e-4)
    assert table.reorganization_integral() == pytest.approx(reference.reorganization_integral(), rel=2e-2)
    with pytest.raises(ParameterError):
        table(25.0)


def test_tabulated_rejects_unsorted():
    with pytest.raises(ParameterError):
        SpectralDensity.tabulated([0.0, 2.0, 1.0], [0.0, 1.0, 1.0])


def test_table_file(tmp_path):
    density = SpectralDensity.gas(1e-3, 0.5)
    path = str(tmp_path / "gas.tsv")
    density.to_table(path)
    loaded = SpectralDensity.from_table(path)
    assert loaded.support[1] == pytest.approx(5.0)
    assert loaded(0.5) == pytest.approx(density(0.5), rel=1e-4)


def classical_gas():
    # t_Q / t_c = 1e-2
    return GasMicroParams(number_density=1.0, thermal_energy=1.0, interaction_range=math.sqrt(2) * 10.0,
                          reduced_planck=0.1)


@pytest.mark.parametrize("measure", ["printed", "radial"])
def test_micro_integral_matches_bessel_form(measure):
    gas = classical_gas()
    for omega in (0.01, 0.05, 0.2):
        assert gas_micro_integral(omega, gas, measure=measure) == pytest.approx(
            gas_micro_exact(omega, gas, measure=measure), rel=1e-6)


def test_micro_integral_scales_with_density():
    gas = classical_gas()
    single = gas_micro_integral(0.05, gas)
    assert gas_micro_integral(0.05, gas, number_density=3.0) == pytest.approx(3.0 * single, rel=1e-10)
    assert gas_micro_integral(0.0, gas.with_density(0.0)) == 0.0


def test_gas_cutoff():
    gas = classical_gas()
    assert gas.is_classical
    assert gas.cutoff == pytest.approx(2.0 / (4 * 10.0 - 0.1))


def test_gas_params_scale_linearly_with_density():
    gas = classical_gas()
    j_one, cutoff = gas_params_from_micro(gas)
    j_two, _ = gas_params_from_micro(gas.with_density(2.0))
    assert cutoff == pytest.approx(gas.cutoff)
    assert j_one > 0
    assert j_two == pytest.approx(2.0 * j_one, rel=1e-8)


def test_radial_density_has_subohmic_tail():
    gas = classical_gas()
    omega = gas.cutoff * np.geomspace(20.0, 160.0, 12)
    micro = np.array([gas_micro_integral(w, gas) for w in omega])
    design = np.column_stack([np.log(omega), -omega, np.ones_like(omega)])
    solution, *_ = np.linalg.lstsq(design, np.log(micro), rcond=None)
    assert solution[0] == pytest.approx(0.5, abs=0.05)


def test_closed_form_fit_near_cutoff():
    # the radial density is flat below the cut-off, so the square-root closed form
    # misses it by roughly half there; the printed measure diverges at omega -> 0
    gas = classical_gas()
    constant, deviation = fit_gas_constant(gas)
    assert constant > 0
    assert 0.4 < deviation < 0.5
    assert fit_gas_constant(gas, measure='printed')[1] > 1.0
    density = gas_density_from_micro(gas)
    assert density.metadata['measure'] == 'radial'
    assert density.metadata['fit_deviation'] == pytest.approx(deviation)


def test_debye_water_cutoff():
    units = UnitSystem.reference()
    coupling, cutoff = debye_params(DebyeSolventParams.water(), units)
    assert cutoff == pytest.approx((2 * 78.3 + 1) / ((2 * 4.21 + 1) * 8.2e-12) * 1e-14, rel=1e-3)
    assert coupling == pytest.approx(22.0 * 0.36)


def test_debye_rejects_bad_dielectric():
    with pytest.raises(ParameterError):
        DebyeSolventParams(1.0, 1.0, 2.0, 3.0, 1e-12)
