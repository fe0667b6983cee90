"""
Configuration constants and settings for the verification workflow.
"""

import argparse
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional


# =============================================================================
# Default Settings
# =============================================================================

EPS_STRICT = 1e-6              # margin realizing the strict y > c
EVAL_TOLERANCE = 1e-9          # slack when re-checking witnesses
DEFAULT_TIMEOUT = 600          # seconds per verification run
DEFAULT_INDICATOR_COUNT = 20
INDICATOR_RESAMPLE_FACTOR = 100
LOG_FORMAT = "%(asctime)s - %(levelname)s - %(name)s - %(message)s"

# Simplex settings
PIVOT_TOLERANCE = 1e-9
FEASIBILITY_TOLERANCE = 1e-7
MAX_SIMPLEX_PIVOTS = 50_000

# Exit codes
EXIT_UNSAT = 0
EXIT_SAT = 1
EXIT_INCONCLUSIVE = 2          # timeout or numeric failure
EXIT_USAGE = 3

# Report / CSV layout
REPORT_STATS_KEYS = [
    "refinement_rounds",
    "solver_calls",
    "initial_abstract_size",
    "final_abstract_size",
    "preprocess_ms",
    "solve_ms",
    "total_ms",
]
BENCH_CSV_COLUMNS = [
    "query_id",
    "mode",
    "verdict",
    "rounds",
    "solver_calls",
    "final_abstract_size",
    "wall_ms",
]


# =============================================================================
# Modes
# =============================================================================

class AbstractionMode(str, Enum):
    """How the initial abstraction is produced."""
    SATURATION = "saturation"
    INDICATOR = "indicator"


class RefinementMode(str, Enum):
    """How a spurious counterexample picks the neuron to split out."""
    CEGAR = "cegar"
    RANDOM = "random"


# =============================================================================
# Data Classes
# =============================================================================

@dataclass
class Budget:
    """Resource limits for a verification run."""
    timeout_seconds: Optional[float] = DEFAULT_TIMEOUT
    max_nodes: Optional[int] = None     # branch-and-bound nodes per solver call
    started_at: float = field(default_factory=time.monotonic)

    def remaining(self) -> Optional[float]:
        """Seconds left before the deadline, or None when unlimited."""
        if self.timeout_seconds is None:
            return None
        return self.timeout_seconds - (time.monotonic() - self.started_at)

    def expired(self) -> bool:
        left = self.remaining()
        return left is not None and left <= 0

    def restarted(self) -> "Budget":
        """Same limits, clock starting now."""
        return Budget(timeout_seconds=self.timeout_seconds, max_nodes=self.max_nodes)


@dataclass
class DriverConfig:
    """Parsed form of the CLI options that steer one CEGAR run."""
    abstraction: AbstractionMode = AbstractionMode.SATURATION
    refinement: RefinementMode = RefinementMode.CEGAR
    indicator_count: int = DEFAULT_INDICATOR_COUNT
    pair_sample_cap: Optional[int] = None   # None = score every candidate pair
    seed: int = 0
    eps_strict: float = EPS_STRICT
    use_abstraction: bool = True
    budget: Budget = field(default_factory=Budget)

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "DriverConfig":
        """Create a driver configuration from parsed CLI arguments."""
        return cls(
            abstraction=AbstractionMode(getattr(args, "abstraction", AbstractionMode.SATURATION.value)),
            refinement=RefinementMode(getattr(args, "refine", RefinementMode.CEGAR.value)),
            indicator_count=getattr(args, "indicators", DEFAULT_INDICATOR_COUNT),
            pair_sample_cap=getattr(args, "pair_sample_cap", None),
            seed=getattr(args, "seed", 0),
            eps_strict=getattr(args, "eps_strict", EPS_STRICT),
            use_abstraction=not getattr(args, "no_abstraction", False),
            budget=Budget(timeout_seconds=getattr(args, "timeout", DEFAULT_TIMEOUT)),
        )

    def mode_label(self) -> str:
        """Short label used in bench rows and summaries."""
        if not self.use_abstraction:
            return "no-abstraction"
        return f"{self.abstraction.value}-{self.refinement.value}"
