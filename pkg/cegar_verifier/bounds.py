"""
Interval bound propagation with optional fixed ReLU phases.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

from .config import EVAL_TOLERANCE
from .models import NeuronId
from .network import Network


@dataclass
class Bounds:
    """
    Interval bounds per layer; index 0 is the input layer.

    pre_* for the input layer equal post_*. When infeasible is set the
    lists stop at the layer where a fixed phase contradicted the bounds.
    """
    pre_lower: List[np.ndarray] = field(default_factory=list)
    pre_upper: List[np.ndarray] = field(default_factory=list)
    post_lower: List[np.ndarray] = field(default_factory=list)
    post_upper: List[np.ndarray] = field(default_factory=list)
    infeasible: bool = False

    @property
    def output_lower(self) -> float:
        return float(self.post_lower[-1][0])

    @property
    def output_upper(self) -> float:
        return float(self.post_upper[-1][0])

    def undetermined(self, layer: int) -> np.ndarray:
        """Indices whose pre-activation interval straddles zero."""
        return np.flatnonzero((self.pre_lower[layer] < 0) & (self.pre_upper[layer] > 0))


def propagate_bounds(
    net: Network,
    lower: Sequence[float],
    upper: Sequence[float],
    phases: Optional[Dict[NeuronId, bool]] = None,
) -> Bounds:
    """
    Sound interval bounds for every neuron over the box [lower, upper].

    phases maps (layer, index) to True (active, pre >= 0) or False
    (inactive, pre <= 0). A phase that its own interval rules out makes the
    result infeasible.
    """
    phases = phases or {}
    low = np.asarray(lower, dtype=np.float64)
    high = np.asarray(upper, dtype=np.float64)
    bounds = Bounds([low], [high], [low], [high])
    if np.any(low > high):
        bounds.infeasible = True
        return bounds

    last = net.output_layer
    for layer, (w, b) in enumerate(zip(net.weights, net.biases), start=1):
        positive = np.maximum(w, 0.0)
        negative = np.minimum(w, 0.0)
        pre_low = positive @ low + negative @ high + b
        pre_high = positive @ high + negative @ low + b

        if layer == last:
            low, high = pre_low, pre_high
        else:
            for (phase_layer, index), active in phases.items():
                if phase_layer != layer:
                    continue
                if active:
                    if pre_high[index] < -EVAL_TOLERANCE:
                        bounds.infeasible = True
                    pre_low[index] = max(pre_low[index], 0.0)
                else:
                    if pre_low[index] > EVAL_TOLERANCE:
                        bounds.infeasible = True
                    pre_high[index] = min(pre_high[index], 0.0)
            low = np.maximum(pre_low, 0.0)
            high = np.maximum(pre_high, 0.0)

        bounds.pre_lower.append(pre_low)
        bounds.pre_upper.append(pre_high)
        bounds.post_lower.append(low)
        bounds.post_upper.append(high)
        if bounds.infeasible:
            break
    return bounds
