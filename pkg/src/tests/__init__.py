"""
Tests for ChiralSim.

Run with `pytest`; the discrete-bath comparisons are marked `slow` (`pytest -m "not slow"` skips them).
"""
