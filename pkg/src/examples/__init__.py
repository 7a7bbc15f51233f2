"""
Example usage scripts for ChiralSim.

This package contains example scripts walking through the model, the bath and the dynamics.
"""
