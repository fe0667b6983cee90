"""
Classification of hidden neurons into pos/neg and inc/dec.

split_pos_neg gives every hidden neuron outgoing weights of a single sign;
split_inc_dec then walks the layers backwards so that raising an INC
neuron's value can only raise the output and raising a DEC neuron's value
can only lower it. Both steps duplicate incoming edges (bias included) and
partition outgoing edges, so the network computes the same function.
"""

import logging
from dataclasses import dataclass
from typing import Dict, List

import numpy as np

from .errors import ClassificationError, InternalInvariantError
from .models import Direction, NeuronTag, Sign
from .network import Network

_LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class _Copy:
    source: int            # neuron index in the network being split
    tag: NeuronTag
    keep: np.ndarray       # outgoing edges kept, over the next layer's new neurons


def _require_query_ready(net: Network) -> None:
    if not net.is_query_ready:
        raise ClassificationError(f"classification needs a single output neuron, network has {net.output_size}")


def _sources(net: Network, copies: Dict[int, List[_Copy]], layer: int) -> List[int]:
    if layer in copies:
        return [c.source for c in copies[layer]]
    return list(range(net.layer_sizes[layer]))


def _rebuild(net: Network, copies: Dict[int, List[_Copy]]) -> Network:
    """Materialize the copy plan: duplicate incoming rows, mask outgoing columns."""
    weights = []
    biases = []
    for layer in range(1, net.output_layer + 1):
        rows = _sources(net, copies, layer)
        cols = _sources(net, copies, layer - 1)
        w = net.weights[layer - 1][np.ix_(rows, cols)]
        if layer - 1 in copies:
            keep = np.array([c.keep for c in copies[layer - 1]], dtype=bool).T
            w = np.where(keep, w, 0.0)
        weights.append(w)
        biases.append(net.biases[layer - 1][rows])
    tags = [[c.tag for c in copies[layer]] for layer in net.hidden_layers()]
    return Network(tuple(weights), tuple(biases), tags)


def _origin(net: Network, layer: int, index: int) -> int:
    return index if net.tags is None else net.tags[layer - 1][index].origin


def split_pos_neg(net: Network) -> Network:
    """N -> N': every hidden neuron becomes a POS copy, a NEG copy, or both."""
    _require_query_ready(net)
    signs: Dict[int, List[_Copy]] = {}
    for layer in net.hidden_layers():
        outgoing = net.weights[layer]
        planned = []
        for j in range(net.layer_sizes[layer]):
            out = outgoing[:, j]
            has_pos = bool(np.any(out > 0))
            has_neg = bool(np.any(out < 0))
            origin = _origin(net, layer, j)
            # zero weights count as non-negative; an all-zero neuron keeps its POS copy
            if has_pos or not has_neg:
                planned.append(_Copy(j, NeuronTag(origin, Sign.POS), np.empty(0, dtype=bool)))
            if has_neg:
                planned.append(_Copy(j, NeuronTag(origin, Sign.NEG), np.empty(0, dtype=bool)))
        signs[layer] = planned

    copies: Dict[int, List[_Copy]] = {}
    for layer in net.hidden_layers():
        next_sources = _sources(net, signs, layer + 1)
        masked = []
        for copy in signs[layer]:
            out = net.weights[layer][next_sources, copy.source]
            keep = out >= 0 if copy.tag.sign is Sign.POS else out < 0
            masked.append(_Copy(copy.source, copy.tag, keep))
        copies[layer] = masked
    return _rebuild(net, copies)


def split_inc_dec(net: Network) -> Network:
    """N' -> N'': split each signed neuron by the direction of its successors."""
    _require_query_ready(net)
    if net.tags is None or any(t.sign is None for layer in net.tags for t in layer):
        raise InternalInvariantError("split_inc_dec needs every hidden neuron labeled pos or neg")

    copies: Dict[int, List[_Copy]] = {}
    next_sources = list(range(net.output_size))
    next_dirs = [Direction.INC] * net.output_size
    for layer in reversed(net.hidden_layers()):
        to_inc = np.array([d is Direction.INC for d in next_dirs], dtype=bool)
        planned = []
        for j in range(net.layer_sizes[layer]):
            tag = net.tags[layer - 1][j]
            out = net.weights[layer][next_sources, j]
            # POS feeding INC is INC; NEG feeding INC is DEC
            inc_keep = to_inc if tag.sign is Sign.POS else ~to_inc
            dec_keep = ~inc_keep
            inc_exists = bool(np.any(out[inc_keep] != 0))
            dec_exists = bool(np.any(out[dec_keep] != 0))
            if not (inc_exists or dec_exists):
                inc_exists = True
            if inc_exists:
                planned.append(_Copy(j, NeuronTag(tag.origin, tag.sign, Direction.INC), inc_keep))
            if dec_exists:
                planned.append(_Copy(j, NeuronTag(tag.origin, tag.sign, Direction.DEC), dec_keep))
        copies[layer] = planned
        next_sources = [c.source for c in planned]
        next_dirs = [c.tag.direction for c in planned]
    return _rebuild(net, copies)


def classify(net: Network) -> Network:
    """N -> N'': equivalent network with at most 4x the hidden neurons, all labeled."""
    classified = split_inc_dec(split_pos_neg(net))
    _LOGGER.debug(f"Classified network: {net.hidden_size()} -> {classified.hidden_size()} hidden neurons")
    return classified


def label_violations(net: Network) -> List[str]:
    """
    Structural check of the labels; returns human-readable violations.

    POS neurons have non-negative outgoing weights, NEG non-positive. An INC
    neuron reaches INC successors only through non-negative weights and DEC
    successors only through non-positive ones; DEC is the mirror image.
    """
    problems: List[str] = []
    if net.tags is None:
        return ["network is unlabeled"]
    for layer in net.hidden_layers():
        outgoing = net.weights[layer]
        for j, tag in enumerate(net.tags[layer - 1]):
            out = outgoing[:, j]
            if tag.sign is Sign.POS and np.any(out < 0):
                problems.append(f"layer {layer} neuron {j}: POS with a negative outgoing weight")
            if tag.sign is Sign.NEG and np.any(out > 0):
                problems.append(f"layer {layer} neuron {j}: NEG with a positive outgoing weight")
            for k, w in enumerate(out):
                if w == 0:
                    continue
                succ = Direction.INC if layer + 1 == net.output_layer else net.tags[layer][k].direction
                same = succ is tag.direction
                if (same and w < 0) or (not same and w > 0):
                    problems.append(f"layer {layer} neuron {j}: edge {w} to {succ.value} successor {k}")
    return problems
