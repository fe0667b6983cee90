"""
Complete verifier for single-output ReLU networks.

verify() answers whether some x satisfying the input predicate drives the
output above the threshold. It searches depth-first over the phases of
ReLUs whose bounds straddle zero, prunes with interval bounds, and settles
each leaf with one LP over the inputs. Copies of one neuron are split
together, and a node must also pass an LP feasibility check over those of
its branched phases that are already affine in x. Every SAT witness is
re-checked by direct evaluation before it is returned.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Protocol, Sequence, Tuple

import numpy as np

from .bounds import Bounds, propagate_bounds
from .config import EPS_STRICT, EVAL_TOLERANCE, Budget
from .errors import InvalidQueryError, NumericFailureError
from .models import NeuronId, Query, SolverStats, Status, Verdict
from .network import Network, evaluate
from .simplex import LPStatus, LinearProgram, solve_lp

_LOGGER = logging.getLogger(__name__)


class VerifierBackend(Protocol):
    """Anything the CEGAR loop can hand an abstract network to."""

    def verify(self, net: Network, query: Query, budget: Optional[Budget] = None) -> Verdict:
        ...


@dataclass(frozen=True)
class SearchNode:
    """A set of fixed ReLU phases: True = active, False = inactive."""
    phases: Tuple[Tuple[NeuronId, bool], ...] = ()

    def as_dict(self) -> Dict[NeuronId, bool]:
        return dict(self.phases)

    def fix(self, neurons: Sequence[NeuronId], active: bool) -> "SearchNode":
        return SearchNode(self.phases + tuple((neuron, active) for neuron in neurons))


def check_witness(net: Network, query: Query, x: np.ndarray, eps_strict: float = EPS_STRICT) -> Optional[float]:
    """Output at x when x satisfies P and the output reaches c + eps_strict; None otherwise."""
    if not query.contains(x, EVAL_TOLERANCE):
        return None
    value = float(evaluate(net, x)[0])
    if value < query.threshold + eps_strict - EVAL_TOLERANCE:
        return None
    return value


def twin_groups(net: Network) -> Dict[NeuronId, Tuple[NeuronId, ...]]:
    """
    Hidden neurons whose pre-activations agree on every input.

    Built layer by layer: two neurons are twins when they have the same bias
    and the same total incoming weight from each twin class of the previous
    layer. Classification produces such copies for every neuron it splits,
    so one case split decides the whole class.
    """
    twins: Dict[NeuronId, Tuple[NeuronId, ...]] = {}
    classes = np.arange(net.input_size)
    for layer in net.hidden_layers():
        w, b = net.weights[layer - 1], net.biases[layer - 1]
        membership = np.zeros((len(classes), int(classes.max()) + 1))
        membership[np.arange(len(classes)), classes] = 1.0
        folded = w @ membership
        # a folded sum is exact only with at most one nonzero weight per class
        exact = np.all((w != 0) @ membership <= 1, axis=1)
        buckets: Dict[bytes, List[NeuronId]] = {}
        for index in range(w.shape[0]):
            row = folded[index] if exact[index] else w[index]
            key = (b"f" if exact[index] else b"r") + (np.append(row, b[index]) + 0.0).tobytes()
            buckets.setdefault(key, []).append((layer, index))
        classes = np.empty(w.shape[0], dtype=int)
        for class_id, group in enumerate(buckets.values()):
            for neuron in group:
                twins[neuron] = tuple(group)
                classes[neuron[1]] = class_id
    return twins


def _branch_choice(net: Network, bounds: Bounds, fixed: Dict[NeuronId, bool]) -> Optional[NeuronId]:
    """Undetermined neuron with the widest pre-activation interval; lowest (layer, index) on ties."""
    best = None
    best_width = -1.0
    for layer in net.hidden_layers():
        for index in bounds.undetermined(layer):
            neuron = (layer, int(index))
            if neuron in fixed:
                continue
            width = float(bounds.pre_upper[layer][index] - bounds.pre_lower[layer][index])
            if width > best_width:
                best, best_width = neuron, width
    return best


def _known_depth(net: Network, bounds: Bounds, fixed: Dict[NeuronId, bool]) -> int:
    """Last hidden layer such that it and every layer before it have all ReLU phases known."""
    depth = 0
    for layer in net.hidden_layers():
        if any((layer, int(index)) not in fixed for index in bounds.undetermined(layer)):
            break
        depth = layer
    return depth


def _phase_program(
    net: Network,
    query: Query,
    bounds: Bounds,
    fixed: Dict[NeuronId, bool],
    depth: int,
) -> Tuple[LinearProgram, float]:
    """
    Through hidden layer `depth` every phase is known, so the network is
    affine in x up to there and so are the pre-activations of the next layer.
    Collects P and the branched phase constraints of those layers. When depth
    covers all hidden layers the LP maximizes the output and the second value
    is its constant term; otherwise the objective is zero and only feasibility
    matters.
    """
    n = net.input_size
    matrix = np.eye(n)
    offset = np.zeros(n)
    rows: List[np.ndarray] = []
    rhs: List[float] = []
    for layer in range(1, min(depth + 1, net.output_layer - 1) + 1):
        w, b = net.weights[layer - 1], net.biases[layer - 1]
        matrix, offset = w @ matrix, w @ offset + b
        active = bounds.pre_lower[layer] >= 0
        for (fixed_layer, index), phase in fixed.items():
            if fixed_layer != layer:
                continue
            active[index] = phase
            # active: pre >= 0, inactive: pre <= 0
            sign = -1.0 if phase else 1.0
            rows.append(sign * matrix[index])
            rhs.append(-sign * offset[index])
        matrix = matrix * active[:, None]
        offset = offset * active

    for constraint in query.constraints:
        rows.append(np.asarray(constraint.coefficients, dtype=np.float64))
        rhs.append(constraint.rhs)

    if depth == net.output_layer - 1:
        matrix, offset = net.weights[-1] @ matrix, net.weights[-1] @ offset + net.biases[-1]
        objective, constant = matrix[0], float(offset[0])
    else:
        objective, constant = np.zeros(n), 0.0
    program = LinearProgram(
        c=objective,
        lower=query.lower,
        upper=query.upper,
        A_ub=np.array(rows) if rows else None,
        b_ub=np.array(rhs) if rhs else None,
    )
    return program, constant


class BranchAndBoundBackend:
    """Interval bounds plus ReLU case splitting plus LP leaves."""

    def __init__(self, eps_strict: float = EPS_STRICT, logger: Optional[logging.Logger] = None):
        self.eps_strict = eps_strict
        self.logger = logger or _LOGGER

    def verify(self, net: Network, query: Query, budget: Optional[Budget] = None) -> Verdict:
        if not net.is_query_ready:
            raise InvalidQueryError(f"the verifier needs a single-output network, got {net.output_size} outputs")
        if query.input_size != net.input_size:
            raise InvalidQueryError(f"query has {query.input_size} inputs, network has {net.input_size}")

        stats = SolverStats()
        if query.is_empty:
            return Verdict(Status.UNSAT, stats=stats)

        target = query.threshold + self.eps_strict
        twins = twin_groups(net)
        inconclusive = False
        stack = [SearchNode()]
        while stack:
            if budget is not None and (
                budget.expired() or (budget.max_nodes is not None and stats.nodes >= budget.max_nodes)
            ):
                self.logger.info(f"Solver budget exhausted after {stats.nodes} nodes")
                return Verdict(Status.TIMEOUT, stats=stats)

            node = stack.pop()
            stats.nodes += 1
            fixed = node.as_dict()
            bounds = propagate_bounds(net, query.lower, query.upper, fixed)
            if bounds.infeasible or bounds.output_upper < target:
                continue

            neuron = _branch_choice(net, bounds, fixed)
            if neuron is not None:
                depth = _known_depth(net, bounds, fixed)
                settled = any(layer <= depth + 1 for layer, _ in fixed)
                if settled and not self._feasible(net, query, bounds, fixed, depth, stats):
                    continue
                group = twins[neuron]
                self.logger.debug(f"Branching on neuron {neuron} ({len(group)} copies) at depth {len(node.phases)}")
                stack.append(node.fix(group, False))
                stack.append(node.fix(group, True))
                continue

            stats.leaves += 1
            stats.lp_calls += 1
            program, constant = _phase_program(net, query, bounds, fixed, net.output_layer - 1)
            try:
                result = solve_lp(program)
            except NumericFailureError as e:
                self.logger.warning(f"LP failed at a leaf: {e}")
                inconclusive = True
                continue
            if result.status is not LPStatus.OPTIMAL or result.objective + constant < target:
                continue

            x = np.clip(result.x, query.lower, query.upper)
            value = check_witness(net, query, x, self.eps_strict)
            if value is not None:
                return Verdict(Status.SAT, witness=x, output_value=value, stats=stats)
            stats.discarded_witnesses += 1
            inconclusive = True
            self.logger.warning(
                f"Discarding LP witness: LP value {result.objective + constant:.6g} "
                f"but direct evaluation disagrees"
            )

        return Verdict(Status.INCONCLUSIVE if inconclusive else Status.UNSAT, stats=stats)

    def _feasible(
        self,
        net: Network,
        query: Query,
        bounds: Bounds,
        fixed: Dict[NeuronId, bool],
        depth: int,
        stats: SolverStats,
    ) -> bool:
        """Whether P and the phases fixed through layer `depth` + 1 admit some x."""
        stats.lp_calls += 1
        program, _ = _phase_program(net, query, bounds, fixed, depth)
        try:
            result = solve_lp(program)
        except NumericFailureError as e:
            # keep the node; its leaves decide
            self.logger.debug(f"Feasibility LP failed: {e}")
            return True
        return result.status is not LPStatus.INFEASIBLE


class StubBackend:
    """Answers a fixed status; used to exercise the loop without solving."""

    def __init__(self, status: Status = Status.UNSAT):
        self.status = status
        self.calls: List[Network] = []

    def verify(self, net: Network, query: Query, budget: Optional[Budget] = None) -> Verdict:
        self.calls.append(net)
        witness = query.lower.copy() if self.status is Status.SAT else None
        return Verdict(self.status, witness=witness)


def verify(
    net: Network,
    query: Query,
    budget: Optional[Budget] = None,
    eps_strict: float = EPS_STRICT,
    logger: Optional[logging.Logger] = None,
) -> Verdict:
    """Decide whether some x satisfying the query's input predicate has output > threshold."""
    return BranchAndBoundBackend(eps_strict, logger).verify(net, query, budget)
