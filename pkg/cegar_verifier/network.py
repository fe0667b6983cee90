"""
Feedforward ReLU networks.

Layers are numbered from 0 (input) to L (output). weights[i - 1] maps layer
i - 1 to layer i and has shape (s_i, s_{i-1}). Hidden layers apply ReLU; the
output layer is affine only.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .errors import InputShapeError, NetworkConstructionError
from .models import NeuronClass, NeuronTag


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, dtype=np.float64, copy=True)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class Network:
    """
    Immutable layered network.

    tags holds one NeuronTag per hidden neuron (layers 1..L-1) once the
    network has been through classification; None before that.
    """
    weights: Tuple[np.ndarray, ...]
    biases: Tuple[np.ndarray, ...]
    tags: Optional[Tuple[Tuple[NeuronTag, ...], ...]] = None

    def __post_init__(self) -> None:
        if len(self.weights) == 0 or len(self.weights) != len(self.biases):
            raise NetworkConstructionError("a network needs at least one weight matrix and one bias per layer")

        weights = tuple(_frozen(w) for w in self.weights)
        biases = tuple(_frozen(b) for b in self.biases)
        previous = None
        for index, (w, b) in enumerate(zip(weights, biases), start=1):
            if w.ndim != 2 or b.ndim != 1:
                raise NetworkConstructionError(f"layer {index}: weights must be 2-D and biases 1-D")
            rows, cols = w.shape
            if rows < 1 or cols < 1:
                raise NetworkConstructionError(f"layer {index}: every layer needs at least one neuron")
            if b.shape[0] != rows:
                raise NetworkConstructionError(f"layer {index}: {rows} neurons but {b.shape[0]} biases")
            if previous is not None and cols != previous:
                raise NetworkConstructionError(f"layer {index}: expects {cols} inputs, previous layer has {previous}")
            if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
                raise NetworkConstructionError(f"layer {index}: weights and biases must be finite")
            previous = rows

        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "biases", biases)

        if self.tags is not None:
            tags = tuple(tuple(layer) for layer in self.tags)
            hidden = [w.shape[0] for w in weights[:-1]]
            if [len(layer) for layer in tags] != hidden:
                raise NetworkConstructionError("neuron tags must cover exactly the hidden neurons")
            object.__setattr__(self, "tags", tags)

    # -------------------------------------------------------------------------
    # Shape
    # -------------------------------------------------------------------------

    @property
    def layer_sizes(self) -> List[int]:
        return [self.weights[0].shape[1]] + [w.shape[0] for w in self.weights]

    @property
    def num_layers(self) -> int:
        """Number of layers including input and output."""
        return len(self.weights) + 1

    @property
    def output_layer(self) -> int:
        return len(self.weights)

    @property
    def input_size(self) -> int:
        return self.weights[0].shape[1]

    @property
    def output_size(self) -> int:
        return self.weights[-1].shape[0]

    @property
    def is_query_ready(self) -> bool:
        return self.output_size == 1

    def hidden_layers(self) -> range:
        return range(1, self.output_layer)

    def hidden_size(self) -> int:
        return sum(self.layer_sizes[1:-1])

    def neuron_class(self, layer: int, index: int) -> Optional[NeuronClass]:
        if self.tags is None or not (1 <= layer < self.output_layer):
            return None
        return self.tags[layer - 1][index].neuron_class

    def with_tags(self, tags: Optional[Sequence[Sequence[NeuronTag]]]) -> "Network":
        return Network(self.weights, self.biases, None if tags is None else tuple(tuple(t) for t in tags))

    def __repr__(self) -> str:
        labeled = "labeled" if self.tags is not None else "unlabeled"
        return f"Network(sizes={self.layer_sizes}, {labeled})"


# =============================================================================
# Evaluation
# =============================================================================

@dataclass(frozen=True)
class Assignment:
    """Per-layer values for one input; post[0] is the input itself."""
    pre: Tuple[np.ndarray, ...]     # pre[0] is the input as well
    post: Tuple[np.ndarray, ...]

    def value(self, layer: int, index: int) -> float:
        return float(self.post[layer][index])

    @property
    def output(self) -> np.ndarray:
        return self.post[-1]


def _check_input(net: Network, x: Sequence[float]) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (net.input_size,):
        raise InputShapeError(f"expected input of length {net.input_size}, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise InputShapeError("input entries must be finite")
    return x


def evaluate_all(net: Network, x: Sequence[float]) -> Assignment:
    """Evaluate every neuron; hidden post-activation values are ReLU outputs."""
    current = _check_input(net, x)
    pre = [current]
    post = [current]
    last = net.output_layer
    for layer, (w, b) in enumerate(zip(net.weights, net.biases), start=1):
        z = w @ current + b
        current = z if layer == last else np.maximum(z, 0.0)
        pre.append(z)
        post.append(current)
    return Assignment(tuple(pre), tuple(post))


def evaluate(net: Network, x: Sequence[float]) -> np.ndarray:
    """Output vector V_n for input x."""
    return evaluate_all(net, x).output


def evaluate_to_layer(net: Network, x: Sequence[float], layer: int) -> np.ndarray:
    """Post-activation values of the given layer."""
    if not 0 <= layer <= net.output_layer:
        raise IndexError(f"layer {layer} out of range 0..{net.output_layer}")
    return evaluate_all(net, x).post[layer]


def evaluate_batch(net: Network, xs: np.ndarray) -> np.ndarray:
    """Outputs for a batch of inputs, one per row."""
    xs = np.atleast_2d(np.asarray(xs, dtype=np.float64))
    if xs.shape[1] != net.input_size:
        raise InputShapeError(f"expected rows of length {net.input_size}, got {xs.shape[1]}")
    current = xs
    last = net.output_layer
    for layer, (w, b) in enumerate(zip(net.weights, net.biases), start=1):
        z = current @ w.T + b
        current = z if layer == last else np.maximum(z, 0.0)
    return current


def suffix(net: Network, layer: int) -> Network:
    """The network made of layers layer..L, with `layer` as its input layer."""
    if not 1 <= layer < net.output_layer:
        raise IndexError(f"suffix layer must be hidden (1..{net.output_layer - 1}), got {layer}")
    tags = None if net.tags is None else net.tags[layer:]
    return Network(net.weights[layer:], net.biases[layer:], tags)


def random_network(
    layer_sizes: Sequence[int],
    rng: np.random.Generator,
    weight_range: float = 2.0,
    bias_range: float = 1.0,
) -> Network:
    """Uniformly random weights in [-weight_range, weight_range], biases likewise."""
    weights = []
    biases = []
    for fan_in, fan_out in zip(layer_sizes[:-1], layer_sizes[1:]):
        weights.append(rng.uniform(-weight_range, weight_range, size=(fan_out, fan_in)))
        biases.append(rng.uniform(-bias_range, bias_range, size=fan_out))
    return Network(tuple(weights), tuple(biases))
