"""
Scenario configuration, CSV output, the simulation API and the command line.
"""

from .config import ScenarioConfig, SweepSpec, load_config, parse_config, parse_sweep
from .output import Dataset, fingerprint
from .simulation_api import (SimulationAPI, SimulationContext, oracle_compare, reproduce_figure,
                             run_scenario, run_sweep)

__all__ = ['ScenarioConfig', 'SweepSpec', 'load_config', 'parse_config', 'parse_sweep', 'Dataset',
           'fingerprint', 'SimulationAPI', 'SimulationContext', 'oracle_compare', 'reproduce_figure',
           'run_scenario', 'run_sweep']
