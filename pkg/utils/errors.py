"""
errors.py: Exception hierarchy shared by every package.
InputValidationError subclasses map to CLI exit code 2; NonConvergence and anything else map to 1.
"""

from typing import Optional


class GelsError(Exception):
    """Root of all errors raised by this project."""


class InputValidationError(GelsError, ValueError):
    """Bad user or caller input. Never a bug in the library itself."""


class CycleDetected(InputValidationError):
    def __init__(self, node: int, label: Optional[str] = None):
        self.node = node
        self.label = label
        name = label if label is not None else str(node)
        super().__init__(f"Graph contains a cycle through node {name}")


class IndexOutOfRange(InputValidationError):
    pass


class NonPositiveLevel(InputValidationError):
    pass


class WeightNormalization(InputValidationError):
    pass


class GammaOutOfRange(InputValidationError):
    pass


class EmptyDag(InputValidationError):
    pass


class NonPositiveLambda(InputValidationError):
    pass


class LengthMismatch(InputValidationError):
    pass


class NonMonotoneConstants(InputValidationError):
    pass


class KOutOfRange(InputValidationError):
    pass


class AlphaOutOfRange(InputValidationError):
    pass


class BadLayerWidths(InputValidationError):
    pass


class InvalidPValue(InputValidationError):
    pass


class InvalidWeightFunction(InputValidationError):
    pass


class InvalidReplications(InputValidationError):
    pass


class UnknownProcedure(InputValidationError):
    pass


class UnknownNodeId(InputValidationError):
    pass


class MissingPValue(InputValidationError):
    pass


class ParseError(InputValidationError):
    def __init__(self, path: str, line: int, message: str):
        self.path = path
        self.line = line
        super().__init__(f"{path}:{line}: {message}")


class ConfigError(InputValidationError):
    def __init__(self, json_path: str, message: str):
        self.json_path = json_path
        super().__init__(f"{json_path}: {message}")


class NonConvergence(GelsError, RuntimeError):
    """The GELS descent saw a base procedure that is not alpha-monotone."""
