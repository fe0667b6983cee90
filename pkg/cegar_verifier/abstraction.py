"""
Partition-based abstraction of a classified network.

A Partition groups the concrete hidden neurons of each layer; members of a
group share layer, sign and direction. The abstract network is a function
of the partition alone:

  incoming  w(u_bar, v_bar) = sum over u in u_bar of AGG over v in v_bar of w(u, v)
  bias      b(v_bar)        = AGG over v in v_bar of b(v)

with AGG = max for INC groups and min for DEC groups. This is the network
produced by pairwise `abstract` steps applied to the deepest hidden layer
first. Sources in the input layer and the output neuron are never grouped.
The abstract output over-approximates the concrete output for non-negative
inputs, and splitting one neuron out of a group never raises it.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .config import EPS_STRICT
from .errors import (
    MergeError,
    PartitionError,
    RefinementError,
    RefinementExhaustedError,
)
from .models import Direction, NeuronClass, NeuronId, NeuronTag, Query
from .network import Network, evaluate_all, evaluate_batch

_LOGGER = logging.getLogger(__name__)

# (layer, smallest member) identifies a group
GroupId = Tuple[int, int]
Group = Tuple[int, ...]


# =============================================================================
# Partition
# =============================================================================

@dataclass(frozen=True)
class Partition:
    """Groups per hidden layer; groups sorted by smallest member, members sorted."""
    groups: Tuple[Tuple[Group, ...], ...]
    labels: Tuple[Tuple[NeuronClass, ...], ...]

    @classmethod
    def identity(cls, net: Network) -> "Partition":
        if net.tags is None:
            raise PartitionError("partitions need a classified network")
        labels = []
        for layer in net.hidden_layers():
            layer_labels = tuple(tag.neuron_class for tag in net.tags[layer - 1])
            if any(label is None for label in layer_labels):
                raise PartitionError(f"layer {layer} has neurons without a full pos/neg and inc/dec label")
            labels.append(layer_labels)
        groups = tuple(tuple((j,) for j in range(len(layer))) for layer in labels)
        return cls(groups, tuple(labels))

    @property
    def num_hidden_layers(self) -> int:
        return len(self.groups)

    def layer_groups(self, layer: int) -> Tuple[Group, ...]:
        if not 1 <= layer <= len(self.groups):
            raise PartitionError(f"layer {layer} is not a hidden layer")
        return self.groups[layer - 1]

    def group_ids(self, layer: int) -> List[GroupId]:
        return [(layer, g[0]) for g in self.layer_groups(layer)]

    def members(self, group: GroupId) -> Group:
        layer, first = group
        for g in self.layer_groups(layer):
            if g[0] == first:
                return g
        raise PartitionError(f"no group starting at neuron {first} in layer {layer}")

    def group_of(self, neuron: NeuronId) -> GroupId:
        layer, index = neuron
        for g in self.layer_groups(layer):
            if index in g:
                return (layer, g[0])
        raise PartitionError(f"neuron {index} of layer {layer} is not in the partition")

    def label_of(self, group: GroupId) -> NeuronClass:
        layer, first = group
        return self.labels[layer - 1][first]

    def group_count(self) -> int:
        return sum(len(layer) for layer in self.groups)

    def concrete_count(self) -> int:
        return sum(len(layer) for layer in self.labels)

    def is_identity(self) -> bool:
        return self.group_count() == self.concrete_count()

    def splittable_neurons(self) -> List[NeuronId]:
        """Concrete neurons whose group has at least two members."""
        return [
            (layer, j)
            for layer in range(1, len(self.groups) + 1)
            for g in self.layer_groups(layer) if len(g) > 1
            for j in g
        ]

    def _with_layer(self, layer: int, groups: Sequence[Group]) -> "Partition":
        ordered = tuple(sorted(tuple(sorted(g)) for g in groups))
        updated = list(self.groups)
        updated[layer - 1] = ordered
        return Partition(tuple(updated), self.labels)


def identity_partition(net: Network) -> Partition:
    return Partition.identity(net)


def merge(p: Partition, a: GroupId, b: GroupId) -> Partition:
    """The `abstract` step on a partition: union two same-label groups of one layer."""
    if a[0] != b[0]:
        raise MergeError(f"cannot merge groups from layers {a[0]} and {b[0]}")
    if a == b:
        raise MergeError("cannot merge a group with itself")
    if p.label_of(a) != p.label_of(b):
        raise MergeError(f"cannot merge {p.label_of(a)} with {p.label_of(b)}")
    layer = a[0]
    first, second = p.members(a), p.members(b)
    rest = [g for g in p.layer_groups(layer) if g not in (first, second)]
    return p._with_layer(layer, rest + [first + second])


def refine_split(p: Partition, neuron: NeuronId) -> Partition:
    """The `refine` step: move one concrete neuron into a group of its own."""
    layer, index = neuron
    group = p.members(p.group_of(neuron))
    if len(group) < 2:
        raise RefinementError(f"neuron {index} of layer {layer} is already alone in its group")
    rest = [g for g in p.layer_groups(layer) if g != group]
    remaining = tuple(j for j in group if j != index)
    return p._with_layer(layer, rest + [remaining, (index,)])


def saturate(p0: Partition) -> Partition:
    """Merge to exhaustion: one group per label class in every hidden layer."""
    groups = []
    for layer_labels in p0.labels:
        by_label: Dict[NeuronClass, List[int]] = {}
        for j, label in enumerate(layer_labels):
            by_label.setdefault(label, []).append(j)
        groups.append(tuple(sorted(tuple(members) for members in by_label.values())))
    return Partition(tuple(groups), p0.labels)


# =============================================================================
# Materialization
# =============================================================================

@dataclass(frozen=True, eq=False)
class AbstractNetwork:
    network: Network
    partition: Partition
    concrete: Network

    def abstract_index(self, neuron: NeuronId) -> int:
        """Position of the neuron's group in the abstract layer (identity outside hidden layers)."""
        layer, index = neuron
        if layer == 0 or layer == self.concrete.output_layer:
            return index
        first = self.partition.group_of(neuron)[1]
        return [g[0] for g in self.partition.layer_groups(layer)].index(first)

    @property
    def size(self) -> int:
        return self.network.hidden_size()


def _validate(concrete: Network, p: Partition) -> None:
    if concrete.tags is None:
        raise PartitionError("materialization needs a classified network")
    if p.num_hidden_layers != concrete.num_layers - 2:
        raise PartitionError("partition and network have different numbers of hidden layers")
    for layer in concrete.hidden_layers():
        size = concrete.layer_sizes[layer]
        groups = p.layer_groups(layer)
        members = sorted(j for g in groups for j in g)
        if members != list(range(size)):
            raise PartitionError(f"layer {layer}: groups do not cover each neuron exactly once")
        labels = tuple(tag.neuron_class for tag in concrete.tags[layer - 1])
        if labels != p.labels[layer - 1]:
            raise PartitionError(f"layer {layer}: partition labels disagree with the network")
        for g in groups:
            if len({labels[j] for j in g}) != 1:
                raise PartitionError(f"layer {layer}: group {g} mixes labels")


def _aggregate(values: np.ndarray, direction: Direction) -> np.ndarray:
    return values.max(axis=0) if direction is Direction.INC else values.min(axis=0)


def materialize(concrete: Network, p: Partition) -> AbstractNetwork:
    """Build the abstract network determined by the partition."""
    _validate(concrete, p)
    weights = []
    biases = []
    tags = []
    last = concrete.output_layer
    for layer in range(1, last + 1):
        w = concrete.weights[layer - 1]
        b = concrete.biases[layer - 1]
        if layer < last:
            groups = p.layer_groups(layer)
            rows = []
            bias = []
            layer_tags = []
            for g in groups:
                label = p.labels[layer - 1][g[0]]
                rows.append(_aggregate(w[list(g), :], label.direction))
                bias.append(_aggregate(b[list(g)], label.direction))
                layer_tags.append(NeuronTag(concrete.tags[layer - 1][g[0]].origin, label.sign, label.direction))
            w = np.array(rows)
            b = np.array(bias)
            tags.append(layer_tags)
        if layer > 1:
            sources = p.layer_groups(layer - 1)
            w = np.stack([w[:, list(g)].sum(axis=1) for g in sources], axis=1)
        weights.append(w)
        biases.append(b)
    return AbstractNetwork(Network(tuple(weights), tuple(biases), tags), p, concrete)


def abstract_pair(net: Network, layer: int, j: int, k: int) -> Network:
    """
    The pairwise `abstract` operator applied directly to a labeled network.

    Neurons j and k of a hidden layer become one neuron at position min(j, k):
    incoming weights and bias take the max (INC) or min (DEC), outgoing
    weights are summed.
    """
    if not 1 <= layer < net.output_layer:
        raise MergeError(f"layer {layer} is not hidden")
    if j == k:
        raise MergeError("cannot merge a neuron with itself")
    label_j, label_k = net.neuron_class(layer, j), net.neuron_class(layer, k)
    if label_j is None or label_j != label_k:
        raise MergeError(f"cannot merge {label_j} with {label_k}")
    keep, drop = min(j, k), max(j, k)

    weights = list(net.weights)
    biases = list(net.biases)
    w_in = weights[layer - 1].copy()
    b_in = biases[layer - 1].copy()
    w_in[keep] = _aggregate(w_in[[j, k], :], label_j.direction)
    b_in[keep] = _aggregate(b_in[[j, k]], label_j.direction)
    weights[layer - 1] = np.delete(w_in, drop, axis=0)
    biases[layer - 1] = np.delete(b_in, drop)

    w_out = weights[layer].copy()
    w_out[:, keep] = w_out[:, j] + w_out[:, k]
    weights[layer] = np.delete(w_out, drop, axis=1)

    tags = [list(t) for t in net.tags]
    del tags[layer - 1][drop]
    return Network(tuple(weights), tuple(biases), tags)


# =============================================================================
# Indicator-guided abstraction
# =============================================================================

def _incoming_rows(abstract: Network, layer: int) -> np.ndarray:
    """Incoming weights of each abstract neuron with the bias as a last column."""
    return np.column_stack([abstract.weights[layer - 1], abstract.biases[layer - 1]])


def pair_scores(abstract: AbstractNetwork) -> List[Tuple[float, GroupId, GroupId]]:
    """
    Candidate merges with their score: the largest |a - b| over pairs of
    incoming weights (bias included). Sorted by score, then by position.
    """
    p = abstract.partition
    candidates = []
    for layer in range(1, p.num_hidden_layers + 1):
        ids = p.group_ids(layer)
        rows = _incoming_rows(abstract.network, layer)
        labels = [p.label_of(g) for g in ids]
        for a in range(len(ids)):
            for b in range(a + 1, len(ids)):
                if labels[a] != labels[b]:
                    continue
                score = float(np.max(np.abs(rows[a] - rows[b])))
                candidates.append((score, ids[a], ids[b]))
    candidates.sort(key=lambda c: (c[0], c[1], c[2]))
    return candidates


def violating_indicators(net: Network, query: Query, indicators: np.ndarray, eps_strict: float = EPS_STRICT) -> np.ndarray:
    """Mask of indicator points whose output satisfies y > c (with the strict margin)."""
    if len(indicators) == 0:
        return np.zeros(0, dtype=bool)
    outputs = evaluate_batch(net, indicators)[:, 0]
    return outputs >= query.threshold + eps_strict


def indicator_guided_abstraction(
    concrete: Network,
    query: Query,
    indicators: np.ndarray,
    eps_strict: float = EPS_STRICT,
    pair_sample_cap: Optional[int] = None,
    rng: Optional[np.random.Generator] = None,
    logger: Optional[logging.Logger] = None,
) -> Partition:
    """
    Greedy merging watched by indicator points.

    Repeatedly merges the same-label pair whose incoming weights differ the
    least, as long as no indicator becomes a counterexample on the abstract
    network. The merge that would create one is undone and the loop stops.
    An empty indicator set gives the saturation partition.
    """
    logger = logger or _LOGGER
    p = Partition.identity(concrete)
    indicators = np.atleast_2d(np.asarray(indicators, dtype=np.float64)) if len(indicators) else np.zeros((0, concrete.input_size))
    if len(indicators) == 0:
        logger.info("No indicator points; falling back to saturation")
        return saturate(p)
    if np.any(violating_indicators(concrete, query, indicators, eps_strict)):
        logger.info("An indicator already violates the property on the concrete network")
        return p

    rng = rng or np.random.default_rng(0)
    merges = 0
    while True:
        abstract = materialize(concrete, p)
        candidates = pair_scores(abstract)
        if not candidates:
            break
        if pair_sample_cap is not None and len(candidates) > pair_sample_cap:
            chosen = np.sort(rng.choice(len(candidates), size=pair_sample_cap, replace=False))
            candidates = [candidates[i] for i in chosen]
        _score, a, b = candidates[0]
        merged = merge(p, a, b)
        if np.any(violating_indicators(materialize(concrete, merged).network, query, indicators, eps_strict)):
            logger.debug(f"Merging {a} and {b} exposes an indicator; stopping after {merges} merges")
            break
        p = merged
        merges += 1
    logger.info(f"Indicator-guided abstraction: {merges} merges, {p.group_count()} abstract neurons")
    return p


# =============================================================================
# Refinement
# =============================================================================

def refinement_scores(concrete: Network, abstract: AbstractNetwork, x: Sequence[float]) -> Dict[NeuronId, float]:
    """
    Score of every splittable concrete neuron v for counterexample x:
    max over incoming edges (bias included) of |w - w_bar| * |v(x) - v_bar(x)|.
    """
    p = abstract.partition
    concrete_values = evaluate_all(concrete, x)
    abstract_values = evaluate_all(abstract.network, x)
    scores: Dict[NeuronId, float] = {}
    for layer, index in p.splittable_neurons():
        a = abstract.abstract_index((layer, index))
        gap = abs(concrete_values.value(layer, index) - abstract_values.value(layer, a))
        row = np.append(concrete.weights[layer - 1][index], concrete.biases[layer - 1][index])
        sources = [abstract.abstract_index((layer - 1, k)) for k in range(concrete.layer_sizes[layer - 1])]
        abstract_row = np.append(
            abstract.network.weights[layer - 1][a, sources],
            abstract.network.biases[layer - 1][a],
        )
        scores[(layer, index)] = float(np.max(np.abs(row - abstract_row))) * gap
    return scores


def cex_guided_refinement(concrete: Network, abstract: AbstractNetwork, x: Sequence[float]) -> NeuronId:
    """Pick the concrete neuron to split out for a spurious counterexample x."""
    scores = refinement_scores(concrete, abstract, x)
    if not scores:
        raise RefinementExhaustedError("the partition is already the identity")
    # lowest (layer, index) wins ties
    return min(scores, key=lambda neuron: (-scores[neuron], neuron))


def choose_random_refinement(p: Partition, rng: np.random.Generator) -> NeuronId:
    """Uniformly random splittable neuron; the baseline for guided refinement."""
    candidates = p.splittable_neurons()
    if not candidates:
        raise RefinementExhaustedError("the partition is already the identity")
    return candidates[int(rng.integers(len(candidates)))]
