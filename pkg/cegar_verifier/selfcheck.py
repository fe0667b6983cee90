from __future__ import annotations

import json

import numpy as np

from .abstraction import (
    Partition,
    cex_guided_refinement,
    materialize,
    merge,
    pair_scores,
    refinement_scores,
    saturate,
)
from .classifier import classify
from .config import Budget, DriverConfig
from .driver import run_query
from .models import Direction, Query, Sign, Status
from .network import Network
from .solver import verify


# =============================================================================
# Worked examples
# =============================================================================

# three POS/INC neurons over two inputs; y = 5 v1 + 3 v2 + 4 v3
THREE_NEURON_NET = Network(
    weights=(
        np.array([[1.0, -2.0], [4.0, -1.0], [2.0, -3.0]]),
        np.array([[5.0, 3.0, 4.0]]),
    ),
    biases=(np.zeros(3), np.zeros(1)),
)

# one neuron feeding a POS/INC, a NEG/DEC and a POS/INC successor
SPLIT_NET = Network(
    weights=(
        np.array([[1.0, -2.0]]),
        np.array([[2.0], [1.0], [-3.0]]),
        np.array([[1.0, -1.0, 1.0]]),
    ),
    biases=(np.zeros(1), np.zeros(3), np.zeros(1)),
)


def run_selfcheck() -> int:
    classified = classify(THREE_NEURON_NET)
    identity = Partition.identity(classified)

    first = merge(identity, (1, 0), (1, 1))
    merged = materialize(classified, first).network
    assert merged.weights[0][0].tolist() == [4.0, -1.0]
    assert merged.weights[1][0, 0] == 8.0
    full = materialize(classified, merge(first, (1, 0), (1, 2))).network
    assert full.weights[0].tolist() == [[4.0, -1.0]]
    assert full.weights[1].tolist() == [[12.0]]

    scores = {(a[1], b[1]): s for s, a, b in pair_scores(materialize(classified, identity))}
    assert scores == {(0, 1): 3.0, (0, 2): 1.0, (1, 2): 2.0}
    assert pair_scores(materialize(classified, identity))[0][1:] == ((1, 0), (1, 2))

    saturated = materialize(classified, saturate(identity))
    x = np.array([1.0, 0.0])
    refine = refinement_scores(classified, saturated, x)
    assert refine == {(1, 0): 9.0, (1, 1): 0.0, (1, 2): 4.0}
    assert cex_guided_refinement(classified, saturated, x) == (1, 0)

    split = classify(SPLIT_NET)
    first_layer = [(t.sign, t.direction) for t in split.tags[0]]
    assert len(first_layer) == 3
    assert set(first_layer) == {(Sign.POS, Direction.INC), (Sign.POS, Direction.DEC), (Sign.NEG, Direction.DEC)}

    query = Query(lower=np.zeros(2), upper=np.ones(2), threshold=13.0)
    report = run_query(THREE_NEURON_NET, query, DriverConfig(budget=Budget(timeout_seconds=60)))
    direct = verify(classified, query)
    assert report.status is direct.status is Status.SAT

    payload = {
        "merged_incoming": full.weights[0].tolist(),
        "merged_outgoing": full.weights[1].tolist(),
        "pair_scores": {f"{a},{b}": s for (a, b), s in scores.items()},
        "refinement_scores": {f"{layer},{index}": s for (layer, index), s in refine.items()},
        "cegar_verdict": report.status.value,
    }
    print(json.dumps(payload, indent=2))
    print("SELF-CHECK PASSED")
    return 0


if __name__ == "__main__":
    raise SystemExit(run_selfcheck())
