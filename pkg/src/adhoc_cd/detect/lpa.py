from __future__ import annotations

from typing import Mapping, Sequence

import numpy as np

from ..graph import Partition, Snapshot


def propagate(
    nodes: Sequence[int],
    layers: Sequence[Mapping[int, Mapping[int, float]]],
    seed: int,
    max_iterations: int,
) -> dict[int, int]:
    """Asynchronous weighted label propagation over one or more adjacency maps.

    A node's score for a label is the sum over layers of its incident weight
    to neighbours carrying that label. Per-layer totals are formed first and
    then added, so L identical layers score exactly L times one layer.
    """
    nodes = sorted(nodes)
    labels = {n: i for i, n in enumerate(nodes)}
    rng = np.random.default_rng(seed)
    for _ in range(max_iterations):
        changed = False
        for pos in rng.permutation(len(nodes)).tolist():
            n = nodes[pos]
            score: dict[int, float] = {}
            for adj in layers:
                per_layer: dict[int, float] = {}
                for nb, w in adj.get(n, {}).items():
                    lab = labels[nb]
                    per_layer[lab] = per_layer.get(lab, 0.0) + w
                for lab, s in per_layer.items():
                    score[lab] = score.get(lab, 0.0) + s
            if not score:
                continue
            top = max(score.values())
            new = min(lab for lab, s in score.items() if s == top)
            if new != labels[n]:
                labels[n] = new
                changed = True
        if not changed:
            break
    return labels


def lpa(graph: Snapshot, config) -> Partition:
    """Label propagation: each node takes the label with the largest incident
    weight (smallest label on ties), visiting nodes in seeded random order
    until a sweep changes nothing."""
    return Partition(propagate(graph.nodes, [graph.adjacency], config.seed, config.max_iterations))
