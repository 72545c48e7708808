from __future__ import annotations

import numpy as np

from ..graph import Partition, Snapshot
from ._levels import LevelGraph, dense_labels


def _one_level(g: LevelGraph, m2: float, rng: np.random.Generator, config) -> tuple[list[int], float]:
    """Local moving phase. Returns (community per node, total modularity gain)."""
    k = [g.strength(i) for i in range(g.n)]
    comm = list(range(g.n))
    tot = list(k)
    gained = 0.0
    for _ in range(config.max_iterations):
        pass_gain = 0.0
        for i in rng.permutation(g.n).tolist():
            ci = comm[i]
            links: dict[int, float] = {}
            for j, w in g.adj[i].items():
                links[comm[j]] = links.get(comm[j], 0.0) + w
            tot[ci] -= k[i]
            stay = links.get(ci, 0.0) - tot[ci] * k[i] / m2
            best, best_gain = ci, stay
            for c in sorted(links):
                gain = links[c] - tot[c] * k[i] / m2
                if gain > best_gain:
                    best, best_gain = c, gain
            tot[best] += k[i]
            if best != ci:
                comm[i] = best
                pass_gain += 2 * (best_gain - stay) / m2
        gained += pass_gain
        if pass_gain < config.tolerance:
            break
    return dense_labels(comm), gained


def louvain(graph: Snapshot, config) -> Partition:
    """Weighted-modularity Louvain: local moves in seeded random order, then
    aggregation, until a level gains less than ``config.tolerance``."""
    g, order = LevelGraph.from_snapshot(graph)
    m2 = 2 * graph.total_weight
    if m2 <= 0:
        return Partition.singletons(order)
    rng = np.random.default_rng(config.seed)
    membership = list(range(len(order)))
    while True:
        comm, gain = _one_level(g, m2, rng, config)
        if gain < config.tolerance or max(comm) + 1 == g.n:
            break
        membership = [comm[c] for c in membership]
        g = g.aggregate(comm)
    return Partition(dict(zip(order, membership)))
