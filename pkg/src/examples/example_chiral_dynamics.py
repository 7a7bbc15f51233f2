#!/usr/bin/env python3
"""
Example usage of ChiralSim

This example demonstrates:
1. Deriving the two-level molecule from a double well
2. Building gas and solvent spectral densities from microscopic parameters
3. Evaluating P_R(t) along the general and the dilute paths
4. Checking a weak-coupling run against the discrete bath
5. Writing the results as CSV datasets
"""

import sys
import os
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', '..'))

import logging
import math

import numpy as np

from src.api.config import parse_config
from src.api.simulation_api import SimulationContext
from src.core.dynamics import DILUTE_PATH, PerturbativeInputs, equilibration_rate, evolve_perturbative
from src.core.model import MoleculeParams, UnitSystem, derive_two_level
from src.core.oracle import compare
from src.core.spectral import (DebyeSolventParams, GasMicroParams, SpectralDensity, debye_density,
                               gas_density_from_micro)


def main():
    """Main example function"""
    logging.basicConfig(format="[%(module)-12s] %(message)s", level=logging.INFO)
    print("=== ChiralSim Example ===\n")

    # Example 1: two-level reduction of a double well
    print("1. Deriving the two-level molecule...")
    units = UnitSystem.reference()
    molecule = derive_two_level(omega=1e13, eta=1e-3, units=units)
    print(f"   tau0 = {units.tau:.3e} s, h = {units.reduced_planck:.4f}")
    print(f"   Delta = {molecule.tunneling:.4e}, delta = {molecule.localization:.4e}, "
          f"envelope = {molecule.envelope:.4f}")

    # Example 2: spectral densities
    print("\n2. Building spectral densities...")
    gas = GasMicroParams(number_density=1.0, thermal_energy=1.0, interaction_range=math.sqrt(2) * 10.0)
    gas_density = gas_density_from_micro(gas)
    print(f"   gas: J0 = {gas_density.coupling:.4e}, cut-off = {gas_density.cutoff:.4e}, "
          f"fit deviation = {gas_density.metadata['fit_deviation']:.2%}")
    solvent = debye_density(DebyeSolventParams.water(), units)
    print(f"   water: J0 = {solvent.coupling:.4g}, cut-off = {solvent.cutoff:.4e}")

    # Example 3: P_R along both paths
    print("\n3. Evaluating P_R(t)...")
    reference = MoleculeParams.reference(localization=1e-5)
    dilute = PerturbativeInputs(reference, SpectralDensity.gas(1e-3, 0.5))
    t_grid = np.linspace(0.0, 2e4, 401)
    trajectory = evolve_perturbative(t_grid, dilute, path=DILUTE_PATH)
    print(f"   dilute gas: Gamma_2 = {dilute.gamma:.4e}, fitted rate = {equilibration_rate(trajectory):.4e}")
    print(f"   P_R at t = {t_grid[-1]:g}: {trajectory.p_right[-1]:.4f}")

    condensed = PerturbativeInputs(reference, SpectralDensity.debye(1e-3, 0.01))
    trajectory = evolve_perturbative(np.linspace(0.0, 2e3, 21), condensed)
    print(f"   weak solvent: P_R at t = 2000: {trajectory.p_right[-1]:.6f}, "
          f"Gamma_2/Omega_21 = {condensed.validity().weak_coupling_ratio:.3e}")

    # Example 4: discrete-bath check
    print("\n4. Comparing with the discrete bath...")
    weak = PerturbativeInputs(MoleculeParams(0.5, 0.0, 0.1), SpectralDensity.debye(2.5e-4, 1.0))
    comparison = compare(weak, np.linspace(0.0, 50.0, 11), n_modes=60)
    print(f"   max |P_R difference| = {comparison.max_deviation:.3e} "
          f"({'pass' if comparison.passed else 'fail'})")
    print(f"   max two-excitation weight = {comparison.run.max_two_excitation:.3e}")

    # Example 5: scenario documents and CSV output
    print("\n5. Writing a scenario run...")
    config = parse_config("""
        molecule.delta_local = 1e-5
        bath.kind = subohmic
        bath.j0 = 1e-3
        bath.cutoff = 0.5
        run.path = dilute
        run.columns = t,P_R,P_1,P_2
        run.output = example_dilute
        time.t_max = 2e4
        time.points = 201
    """)
    with SimulationContext("example_output") as api:
        print(f"   wrote {api.run(config)}")
        print(f"   wrote {api.spectral_dump(config.bath)}")

    print("\n=== Example completed successfully! ===")


if __name__ == "__main__":
    main()
