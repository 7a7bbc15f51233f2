#!/usr/bin/env python3
"""
Main entry point for ChiralSim.

Runs the command line defined in src/api/cli.py; see `python main.py --help`.
"""

import os
import sys

# Make the src package importable when run from a checkout
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from src.api.cli import main  # noqa: E402

if __name__ == "__main__":
    sys.exit(main())
