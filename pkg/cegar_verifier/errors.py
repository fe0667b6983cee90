"""
Exception hierarchy for the verifier.

Every error raised on purpose derives from VerificationError. Errors about
malformed user input also derive from ValueError.
"""

from typing import Optional


class VerificationError(Exception):
    """Base class for all verifier errors."""


class InputShapeError(VerificationError, ValueError):
    """An input vector does not match the network's input layer."""


class NetworkConstructionError(VerificationError, ValueError):
    """Weights and biases do not describe a valid layered network."""


class _LocatedError(VerificationError, ValueError):
    """An error tied to a line of an input file."""

    def __init__(self, message: str, line: Optional[int] = None, path: Optional[str] = None):
        self.message = message
        self.line = line
        self.path = path
        super().__init__(self.__str__())

    def __str__(self) -> str:
        where = self.path or "<input>"
        if self.line is not None:
            return f"{where}:{self.line}: {self.message}"
        return f"{where}: {self.message}"


class NNetParseError(_LocatedError):
    """Malformed NNet text."""


class PropertyError(_LocatedError):
    """Malformed or unsupported property text."""


class EncodingError(VerificationError, ValueError):
    """An output property cannot be folded into the single-output form."""


class InvalidQueryError(VerificationError, ValueError):
    """A generated query is ill-formed (for example i == j)."""


class ClassificationError(VerificationError, ValueError):
    """The network is not in the form a classification step expects."""


class InternalInvariantError(VerificationError, RuntimeError):
    """A structural invariant that construction should guarantee was violated."""


class PartitionError(VerificationError, ValueError):
    """A partition does not match the network it is applied to."""


class MergeError(PartitionError):
    """Two groups cannot be merged (different layer or label)."""


class RefinementError(PartitionError):
    """A split was requested on a singleton group."""


class RefinementExhaustedError(VerificationError, RuntimeError):
    """No abstract neuron is left to split."""


class NumericFailureError(VerificationError, RuntimeError):
    """The simplex core stalled or hit its pivot cap."""


class IndicatorSamplingError(VerificationError, RuntimeError):
    """Not enough sample points satisfying the input predicate were found."""
