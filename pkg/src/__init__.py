"""
ChiralSim - chiral molecules in a harmonic environment

Second-order perturbative dynamics of a two-level chiral molecule coupled to a
dilute gas or a condensed-phase solvent, with a discrete-bath reference evolution.
"""

__version__ = "1.0.0"
__author__ = "ChiralSim Team"
__description__ = "Tunneling, racemization and localization of chiral molecules in a bath"
