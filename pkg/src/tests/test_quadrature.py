#!/usr/bin/env python3
"""
Tests for the principal-value and oscillatory quadrature
"""

import math
import sys
import os
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', '..'))

import pytest
from scipy import special
from scipy.integrate import quad

from src.core.errors import ParameterError
from src.core.quadrature import (PVIntegralSpec, pv_integrate, principal_value, sinc_integral,
                                 sinc_squared_integral, sine_over_square_integral, versine_integral)
from src.core.spectral import SpectralDensity


def exponential(w):
    return math.exp(-w)


def test_principal_value_exponential_integral():
    expected = -math.exp(-1.0) * special.expi(1.0)
    assert principal_value(exponential, 1.0, scale=1.0) == pytest.approx(expected, rel=1e-7)


def test_principal_value_pole_outside_domain():
    expected = math.e * special.exp1(1.0)
    assert principal_value(exponential, -1.0, scale=1.0) == pytest.approx(expected, rel=1e-7)


def test_principal_value_debye():
    density = SpectralDensity.debye(1.0, 1.0)
    pole = 0.5
    expected = 1.0 - pole * math.exp(-pole) * special.expi(pole)
    assert principal_value(density, pole) == pytest.approx(expected, rel=1e-7)


def test_symmetric_weight_has_zero_principal_value():
    pole = 5.0

    def bump(w):
        return math.exp(-(w - pole) ** 2)

    options = dict(upper=2 * pole, scale=pole / 6)
    assert abs(principal_value(bump, pole, **options)) < 1e-9
    assert abs(sine_over_square_integral(bump, pole, 3.0, **options)) < 1e-9


def direct(density, pole, integrand):
    """Brute-force reference over the shifted variable for regular integrands"""
    upper = 40 * density.cutoff
    value, _ = quad(lambda y: density(pole + y) * integrand(y), -pole, upper - pole,
                    limit=2000, epsabs=0.0, epsrel=1e-9, points=[0.0])
    return value


@pytest.mark.parametrize("density", [SpectralDensity.debye(10.0, 0.01), SpectralDensity.gas(1e-3, 0.5)])
def test_sinc_against_direct_quadrature(density):
    pole = density.cutoff
    t = 20.0 / density.cutoff

    def kernel(y):
        return t * math.sin(y * t) / (y * t) if y != 0 else t

    assert sinc_integral(density, pole, t, rel_tol=1e-8) == pytest.approx(direct(density, pole, kernel),
                                                                          rel=1e-6)


@pytest.mark.parametrize("density", [SpectralDensity.debye(10.0, 0.01), SpectralDensity.gas(1e-3, 0.5)])
def test_sinc_squared_against_direct_quadrature(density):
    pole = 0.8 * density.cutoff
    t = 15.0 / density.cutoff

    def kernel(y):
        if y == 0:
            return 0.5 * t * t
        return 2.0 * math.sin(0.5 * y * t) ** 2 / (y * y)

    value = sinc_squared_integral(density, pole, t, rel_tol=1e-8)
    assert value == pytest.approx(direct(density, pole, kernel), rel=1e-6)


def test_sinc_squared_grows_at_golden_rule_rate():
    density = SpectralDensity.debye(1.0, 1.0)
    pole = 0.3
    t = 2000.0
    slope = (sinc_squared_integral(density, pole, 2 * t) - sinc_squared_integral(density, pole, t)) / t
    assert slope == pytest.approx(math.pi * density(pole), rel=1e-3)


def test_time_derivative_relations():
    density = SpectralDensity.debye(1.0, 1.0)
    pole, t, step = 0.4, 30.0, 1e-2
    # d/dt of the squared kernel is the sinc kernel
    derivative = (sinc_squared_integral(density, pole, t + step, rel_tol=1e-9)
                  - sinc_squared_integral(density, pole, t - step, rel_tol=1e-9)) / (2 * step)
    assert derivative == pytest.approx(sinc_integral(density, pole, t, rel_tol=1e-9), rel=1e-5)
    # d/dt of the versine kernel over y is a plain sine transform
    derivative = (versine_integral(density, pole, t + step, rel_tol=1e-9)
                  - versine_integral(density, pole, t - step, rel_tol=1e-9)) / (2 * step)
    upper = 40 * density.cutoff
    sine, _ = quad(density, 0.0, upper, weight='sin', wvar=t)
    cosine, _ = quad(density, 0.0, upper, weight='cos', wvar=t)
    expected = sine * math.cos(pole * t) - cosine * math.sin(pole * t)
    assert derivative == pytest.approx(expected, rel=1e-5, abs=1e-8)


def test_zero_time_and_zero_density():
    density = SpectralDensity.debye(1.0, 1.0)
    assert sinc_squared_integral(density, 0.5, 0.0) == 0.0
    assert pv_integrate(PVIntegralSpec(SpectralDensity.zero(), 'rational', 0.5, 0.0)).value == 0.0


def test_result_reports_diagnostics():
    result = pv_integrate(PVIntegralSpec(SpectralDensity.debye(1.0, 1.0), 'sinc', 0.5, 10.0))
    assert result.converged
    assert result.subdivisions > 0
    assert result.error_estimate >= 0.0


def test_pole_on_boundary_rejected():
    with pytest.raises(ParameterError):
        principal_value(SpectralDensity.debye(1.0, 1.0), 0.0)


@pytest.mark.parametrize("rel_tol", [0.0, 1e-13, 0.5])
def test_tolerance_range(rel_tol):
    with pytest.raises(ParameterError):
        principal_value(SpectralDensity.debye(1.0, 1.0), 0.5, rel_tol=rel_tol)


def test_spec_validation():
    with pytest.raises(ParameterError):
        PVIntegralSpec(SpectralDensity.debye(1.0, 1.0), 'unknown', 0.5, 1.0)
    with pytest.raises(ParameterError):
        PVIntegralSpec(exponential, 'sinc', 0.5, 1.0)
    with pytest.raises(ParameterError):
        PVIntegralSpec(SpectralDensity.debye(1.0, 1.0), 'sinc', 0.5, -1.0)
