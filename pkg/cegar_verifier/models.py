from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Tuple

import numpy as np

from .errors import InvalidQueryError, PropertyError


# =============================================================================
# Neuron labels
# =============================================================================

class Sign(str, Enum):
    POS = "pos"
    NEG = "neg"


class Direction(str, Enum):
    INC = "inc"
    DEC = "dec"


@dataclass(frozen=True)
class NeuronClass:
    sign: Sign
    direction: Direction

    def __str__(self) -> str:
        return f"<{self.sign.value},{self.direction.value}>"


@dataclass(frozen=True)
class NeuronTag:
    """Provenance of a hidden neuron: index in the unclassified layer plus labels."""
    origin: int
    sign: Optional[Sign] = None
    direction: Optional[Direction] = None

    @property
    def neuron_class(self) -> Optional[NeuronClass]:
        if self.sign is None or self.direction is None:
            return None
        return NeuronClass(self.sign, self.direction)

    def label(self) -> str:
        parts = [str(self.origin)]
        if self.sign is not None:
            parts.append("+" if self.sign is Sign.POS else "-")
        if self.direction is not None:
            parts.append("I" if self.direction is Direction.INC else "D")
        return "".join(parts)


# (layer, index) of a neuron; layer 0 is the input layer
NeuronId = Tuple[int, int]


# =============================================================================
# Properties and queries
# =============================================================================

@dataclass(frozen=True, eq=False)
class LinearConstraint:
    """Input conjunct: coefficients . x <= rhs."""
    coefficients: np.ndarray
    rhs: float

    def holds(self, x: np.ndarray, tolerance: float = 0.0) -> bool:
        return float(np.dot(self.coefficients, x)) <= self.rhs + tolerance


@dataclass(frozen=True)
class LinearAtom:
    """Output atom: sum(coefficients[k] * y_k) + constant > 0."""
    coefficients: Dict[int, float]
    constant: float = 0.0

    def value(self, y: np.ndarray) -> float:
        return sum(c * float(y[k]) for k, c in self.coefficients.items()) + self.constant


@dataclass
class RawProperty:
    """A parsed property file: input box, input conjuncts, disjunctive output atoms."""
    input_lower: np.ndarray
    input_upper: np.ndarray
    input_constraints: List[LinearConstraint] = field(default_factory=list)
    output_atoms: List[LinearAtom] = field(default_factory=list)

    def __post_init__(self) -> None:
        if not self.output_atoms:
            raise PropertyError("property has no output atom")
        for atom in self.output_atoms:
            values = list(atom.coefficients.values()) + [atom.constant]
            if not np.all(np.isfinite(values)):
                raise PropertyError("output atom has a non-finite coefficient")

    @property
    def input_size(self) -> int:
        return len(self.input_lower)


@dataclass(frozen=True, eq=False)
class Query:
    """Input predicate P (box plus linear conjuncts) and output predicate y > threshold."""
    lower: np.ndarray
    upper: np.ndarray
    constraints: Tuple[LinearConstraint, ...] = ()
    threshold: float = 0.0

    def __post_init__(self) -> None:
        lower = np.asarray(self.lower, dtype=np.float64)
        upper = np.asarray(self.upper, dtype=np.float64)
        if lower.shape != upper.shape or lower.ndim != 1:
            raise InvalidQueryError("input bounds must be vectors of equal length")
        if not (np.all(np.isfinite(lower)) and np.all(np.isfinite(upper))):
            raise InvalidQueryError("every input variable needs finite bounds")
        if not np.isfinite(self.threshold):
            raise InvalidQueryError("output threshold must be finite")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        object.__setattr__(self, "constraints", tuple(self.constraints))

    @property
    def input_size(self) -> int:
        return len(self.lower)

    @property
    def is_empty(self) -> bool:
        """True when some lower bound exceeds its upper bound."""
        return bool(np.any(self.lower > self.upper))

    def contains(self, x: np.ndarray, tolerance: float = 0.0) -> bool:
        """Whether x satisfies P (box and conjuncts) within tolerance."""
        x = np.asarray(x, dtype=np.float64)
        if np.any(x < self.lower - tolerance) or np.any(x > self.upper + tolerance):
            return False
        return all(c.holds(x, tolerance) for c in self.constraints)


# =============================================================================
# Verdicts and reports
# =============================================================================

class Status(str, Enum):
    UNSAT = "UNSAT"
    SAT = "SAT"
    TIMEOUT = "TIMEOUT"
    INCONCLUSIVE = "INCONCLUSIVE"


@dataclass
class SolverStats:
    nodes: int = 0
    leaves: int = 0
    lp_calls: int = 0
    discarded_witnesses: int = 0


@dataclass
class Verdict:
    """Answer of one backend call."""
    status: Status
    witness: Optional[np.ndarray] = None
    output_value: Optional[float] = None
    stats: SolverStats = field(default_factory=SolverStats)


@dataclass
class RunStats:
    refinement_rounds: int = 0
    solver_calls: int = 0
    initial_abstract_size: int = 0
    final_abstract_size: int = 0
    preprocess_ms: float = 0.0
    solve_ms: float = 0.0
    total_ms: float = 0.0
    original_size: int = 0          # hidden neurons of the encoded network
    classified_size: int = 0        # hidden neurons after classification
    abstraction_fallback: bool = False


@dataclass
class VerdictReport:
    status: Status
    witness: Optional[List[float]] = None
    stats: RunStats = field(default_factory=RunStats)
    message: Optional[str] = None

    def __post_init__(self) -> None:
        if (self.status is Status.SAT) != (self.witness is not None):
            raise ValueError("a witness is present exactly when the status is SAT")
