#!/usr/bin/env python3
"""
Tests for the two-level chiral molecule and its unit system
"""

import math
import sys
import os
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', '..'))

import numpy as np
import pytest

from src.core.errors import ParameterError
from src.core.model import (MoleculeParams, PotentialParams, UnitSystem, derive_two_level,
                            isolated_envelope, isolated_tunneling_probability, potential_value)


def test_reference_units():
    units = UnitSystem.reference()
    assert units.tau == pytest.approx(1e-14)
    assert units.reduced_planck == pytest.approx(0.10546, rel=1e-3)
    restored = UnitSystem.from_dict(units.to_dict())
    assert restored == units


def test_units_reject_non_positive():
    with pytest.raises(ParameterError):
        UnitSystem(0.0, 1e-19, 1e-10)


def test_symmetric_mixing_angle():
    molecule = MoleculeParams(1e-3)
    assert molecule.mixing_angle == pytest.approx(math.pi / 4)
    assert molecule.gap == pytest.approx(1e-3)
    assert molecule.envelope == pytest.approx(1.0)
    assert molecule.sigma(1, 1) == pytest.approx(0.0, abs=1e-15)
    assert molecule.sigma(1, 2) == pytest.approx(1.0)


@pytest.mark.parametrize("localization", [2e-3, -2e-3, 1e-5])
def test_ground_state_is_first_column(localization):
    molecule = MoleculeParams(1e-3, localization)
    delta, local = molecule.tunneling, molecule.localization
    # -Delta sigma_x - delta sigma_z in the (R, L) basis
    matrix = np.array([[-local, -delta], [-delta, local]])
    vectors = molecule.eigenvectors()
    np.testing.assert_allclose(matrix @ vectors[:, 0], -molecule.gap * vectors[:, 0], atol=1e-15)
    np.testing.assert_allclose(matrix @ vectors[:, 1], molecule.gap * vectors[:, 1], atol=1e-15)
    np.testing.assert_allclose(vectors.T @ vectors, np.eye(2), atol=1e-15)


def test_positive_localization_favours_right():
    molecule = MoleculeParams(1e-3, 5e-3)
    right = molecule.chiral_amplitudes('R')
    assert abs(right[0]) > abs(right[1])
    projector = molecule.chiral_projector('R') + molecule.chiral_projector('L')
    np.testing.assert_allclose(projector, np.eye(2), atol=1e-15)


def test_unknown_chiral_state():
    with pytest.raises(ParameterError):
        MoleculeParams(1e-3).chiral_amplitudes('X')


def test_isolated_probability_full_flip():
    molecule = MoleculeParams(1e-3)
    assert isolated_tunneling_probability(molecule, 0.0) == pytest.approx(0.0)
    assert isolated_tunneling_probability(molecule, math.pi / molecule.gap) == pytest.approx(1.0)


def test_isolated_probability_bounded_by_envelope():
    molecule = MoleculeParams(1e-3, 3e-3)
    t = np.linspace(0.0, 2e4, 2001)
    probability = isolated_tunneling_probability(molecule, t)
    envelope = isolated_envelope(molecule)
    assert envelope == pytest.approx(0.1)
    assert np.all(probability <= envelope + 1e-15)
    assert probability.max() == pytest.approx(envelope, rel=1e-3)


def test_isolated_probability_rejects_negative_time():
    with pytest.raises(ParameterError):
        isolated_tunneling_probability(MoleculeParams(1e-3), -1.0)


def test_derive_two_level():
    units = UnitSystem.reference()
    molecule = derive_two_level(1e13, 0.01, units)
    h = units.reduced_planck
    assert molecule.tunneling == pytest.approx(h * 0.1 / 4)
    assert molecule.localization == pytest.approx(0.01 * math.sqrt(h / 0.2))
    assert molecule.reduced_planck == pytest.approx(h)


def test_from_potential_matches_derivation():
    units = UnitSystem.reference()
    potential = PotentialParams(asymmetry=0.0, harmonic_frequency=1e13)
    molecule = MoleculeParams.from_potential(potential, units)
    assert molecule.localization == 0.0
    assert potential_value(1.0, potential) == pytest.approx(-1.0)


def test_molecule_round_trip_dict():
    molecule = MoleculeParams(1e-3, 2e-4, 0.1)
    data = molecule.to_dict()
    assert data['gap'] == pytest.approx(math.hypot(1e-3, 2e-4))
    assert MoleculeParams.from_dict(data) == molecule


def test_molecule_rejects_non_positive_tunneling():
    with pytest.raises(ParameterError):
        MoleculeParams(0.0)
