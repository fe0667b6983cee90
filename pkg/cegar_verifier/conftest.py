"""
Shared helpers for the cegar_verifier tests.

Random networks come from seeded numpy generators so every run sees the
same corpus. The `slow` marker tags the benchmark-sized tests; deselect
them with `-m "not slow"`.
"""

import numpy as np
from hypothesis import strategies as st

from cegar_verifier.abstraction import Partition
from cegar_verifier.network import Network, random_network


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: benchmark-sized test, minutes rather than seconds")


def make_net(seed: int, hidden_layers: int = 2, width: int = 4, inputs: int = 2, outputs: int = 1) -> Network:
    rng = np.random.default_rng(seed)
    sizes = [inputs] + [width] * hidden_layers + [outputs]
    return random_network(sizes, rng)


def random_partition(p0, rng: np.random.Generator):
    """A random coarsening of p0: every layer's label classes split into random blocks."""
    groups = []
    for layer_labels in p0.labels:
        blocks = []
        by_label = {}
        for j, label in enumerate(layer_labels):
            by_label.setdefault(label, []).append(j)
        for members in by_label.values():
            cuts = rng.integers(1, len(members) + 1)
            assignment = rng.integers(0, cuts, size=len(members))
            for block in range(cuts):
                chosen = tuple(m for m, a in zip(members, assignment) if a == block)
                if chosen:
                    blocks.append(chosen)
        groups.append(tuple(sorted(blocks)))
    return Partition(tuple(groups), p0.labels)


# hypothesis: (seed, hidden layer sizes) for small random networks
network_shapes = st.tuples(
    st.integers(min_value=0, max_value=2**31 - 1),
    st.lists(st.integers(min_value=2, max_value=8), min_size=2, max_size=4),
)


def build_net(shape, inputs: int = 3, outputs: int = 1) -> Network:
    seed, hidden = shape
    rng = np.random.default_rng(seed)
    return random_network([inputs] + list(hidden) + [outputs], rng)

