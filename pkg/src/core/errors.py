"""
Exception hierarchy for the chiral dynamics simulator.
"""

from typing import Any, List, Optional


class ChiralSimError(Exception):
    """Base class for every error raised by the simulator"""


class ParameterError(ChiralSimError, ValueError):
    """Invalid physical or numerical parameter"""


class QuadratureError(ChiralSimError):
    """Raised when an integral fails to converge or is ill-posed"""

    def __init__(self, message: str, result: Optional[Any] = None):
        super().__init__(message)
        self.result = result


class OracleError(ChiralSimError):
    """Norm drift or size overflow in the discrete-bath evolution"""


class TruncationInvalidError(OracleError):
    """Two-excitation weight exceeded the bound allowed for a comparison"""

    def __init__(self, message: str, weight: float):
        super().__init__(message)
        self.weight = weight


class ConfigError(ChiralSimError):
    """Configuration document failed validation"""

    def __init__(self, violations: List[str]):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))
