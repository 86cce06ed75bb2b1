"""rvsim - cycle-accurate RV32I five-stage pipeline simulator.

Runs RV32I programs on a five-stage pipeline model with gshare/BTB
branch prediction, checks every commit against a functional reference
simulator, and reports IPC and prediction accuracy per configuration.
"""

__version__ = "1.0.0"
__license__ = "MIT"

__all__ = ["__version__"]
