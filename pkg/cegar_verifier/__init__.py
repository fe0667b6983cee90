"""
Abstraction-refinement verification of feedforward ReLU networks.

A query asks whether some input satisfying a linear input predicate drives
the network's output past a threshold. The network is first rewritten into
an equivalent one whose hidden neurons are labeled pos/neg and inc/dec;
same-label neurons are then merged into a smaller network whose output
over-approximates the original, and split apart again whenever the solver
finds a counterexample that does not hold on the real network.

MODULES:
--------
- network.py      : Network type and evaluation
- nnet.py         : NNet reading, writing and normalization
- properties.py   : Property files, output encoding, robustness queries
- classifier.py   : pos/neg and inc/dec classification
- abstraction.py  : Partitions, merging, refinement
- bounds.py       : Interval bound propagation
- simplex.py      : Two-phase simplex
- solver.py       : Branch-and-bound verifier
- driver.py       : The CEGAR loop
- bench.py        : Benchmarks and generated corpora
- report.py       : JSON reports and CSV rows
- cli.py          : Command-line entry point
"""

__version__ = "1.0.0"

from .config import AbstractionMode, Budget, DriverConfig, RefinementMode
from .driver import run, run_query
from .models import Query, RawProperty, Status, VerdictReport
from .network import Network, evaluate, evaluate_all
from .solver import verify

__all__ = [
    "run",
    "run_query",
    "verify",
    "evaluate",
    "evaluate_all",
    "Network",
    "Query",
    "RawProperty",
    "Status",
    "VerdictReport",
    "AbstractionMode",
    "Budget",
    "DriverConfig",
    "RefinementMode",
]
