"""Two-level map equation for undirected weighted graphs.

Visit rates of the random walk are strength / total strength, and a module's
exit rate is the weight on its boundary over total strength, so every term
of the codelength follows from per-module (total strength, internal
strength) sums.
"""
from __future__ import annotations

import math
from typing import Mapping

import numpy as np

from ..graph import Partition, Snapshot
from ._levels import LevelGraph, dense_labels


def _plogp(x: float) -> float:
    return x * math.log2(x) if x > 0 else 0.0


def _entropy(ps) -> float:
    s = sum(ps)
    return -sum(_plogp(p / s) for p in ps if p > 0) if s > 0 else 0.0


def codelength(graph: Snapshot, partition: Partition | Mapping[int, int]) -> float:
    """L(M) = q H(Q) + sum_i p_i H(P_i), evaluated from the definitions."""
    lab = partition.assignment if isinstance(partition, Partition) else partition
    m2 = 2 * graph.total_weight
    if m2 <= 0:
        return 0.0
    strength = {n: 0.0 for n in graph.nodes}
    exit_w: dict[int, float] = {lab[n]: 0.0 for n in graph.nodes}
    for (u, v), e in graph.edges.items():
        strength[u] += e.weight
        strength[v] += e.weight
        if lab[u] != lab[v]:
            exit_w[lab[u]] += e.weight
            exit_w[lab[v]] += e.weight
    exits = {c: w / m2 for c, w in exit_w.items()}
    q = sum(exits.values())
    total = q * _entropy(list(exits.values())) if q > 0 else 0.0
    members: dict[int, list[float]] = {c: [] for c in exits}
    for n in graph.nodes:
        members[lab[n]].append(strength[n] / m2)
    for c, ps in members.items():
        codebook = [exits[c]] + ps
        total += sum(codebook) * _entropy(codebook)
    return total


class _State:
    def __init__(self, tot: list[float], inner: list[float], m2: float):
        self.tot = tot  # summed strength per module
        self.inner = inner  # strength from internal edges (each counted twice)
        self.m2 = m2
        self.exit_sum = sum((t - i) / m2 for t, i in zip(tot, inner))

    def term(self, c: int, tot: float, inner: float) -> float:
        ex = (tot - inner) / self.m2
        return -2 * _plogp(ex) + _plogp(ex + tot / self.m2)

    def delta(self, a, b, k_i, loop2, w_a, w_b) -> tuple[float, float]:
        """Codelength change (excluding the constant node-entropy term) when
        a node leaves module a for module b. Returns (delta, new exit sum)."""
        ta, ia, tb, ib = self.tot[a], self.inner[a], self.tot[b], self.inner[b]
        ta2, ia2 = ta - k_i, ia - 2 * w_a - loop2
        tb2, ib2 = tb + k_i, ib + 2 * w_b + loop2
        m2 = self.m2
        ex_sum = self.exit_sum - (ta - ia) / m2 - (tb - ib) / m2 + (ta2 - ia2) / m2 + (tb2 - ib2) / m2
        old = _plogp(self.exit_sum) + self.term(a, ta, ia) + self.term(b, tb, ib)
        new = _plogp(ex_sum) + self.term(a, ta2, ia2) + self.term(b, tb2, ib2)
        return new - old, ex_sum


def _one_level(g: LevelGraph, m2: float, rng, config) -> tuple[list[int], float]:
    k = [g.strength(i) for i in range(g.n)]
    comm = list(range(g.n))
    st = _State(list(k), [2 * lp for lp in g.loops], m2)
    saved = 0.0
    for _ in range(config.max_iterations):
        pass_saved = 0.0
        for i in rng.permutation(g.n).tolist():
            a = comm[i]
            links: dict[int, float] = {}
            for j, w in g.adj[i].items():
                links[comm[j]] = links.get(comm[j], 0.0) + w
            w_a = links.get(a, 0.0)
            loop2 = 2 * g.loops[i]
            best, best_delta, best_exit = a, 0.0, st.exit_sum
            for b in sorted(links):
                if b == a:
                    continue
                d, ex = st.delta(a, b, k[i], loop2, w_a, links[b])
                if d < best_delta:
                    best, best_delta, best_exit = b, d, ex
            if best != a:
                st.tot[a] -= k[i]
                st.inner[a] -= 2 * w_a + loop2
                st.tot[best] += k[i]
                st.inner[best] += 2 * links[best] + loop2
                st.exit_sum = best_exit
                comm[i] = best
                pass_saved -= best_delta
        saved += pass_saved
        if pass_saved < config.tolerance:
            break
    return dense_labels(comm), saved


def infomap_two_level(graph: Snapshot, config) -> Partition:
    """Minimize the two-level map equation with Louvain-style local moves and
    aggregation. Graphs without edges come back as all singletons."""
    g, order = LevelGraph.from_snapshot(graph)
    m2 = 2 * graph.total_weight
    if m2 <= 0:
        return Partition.singletons(order)
    rng = np.random.default_rng(config.seed)
    membership = list(range(len(order)))
    while True:
        comm, saved = _one_level(g, m2, rng, config)
        if saved < config.tolerance or max(comm) + 1 == g.n:
            break
        membership = [comm[c] for c in membership]
        g = g.aggregate(comm)
    return Partition(dict(zip(order, membership)))
