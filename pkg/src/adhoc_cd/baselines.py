"""Conventional cluster-head election schemes used for comparison.

Centralized, deterministic re-implementations of weighted clustering (WCA),
a greedy weakly-connected dominating set (WCDS) and k-hop connectivity/id
clustering (k-CONID). Sensors are static, so mobility and battery terms of
the original protocols are not modelled.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .graph import Partition, Snapshot

BASELINES = ("wca", "wcds", "kconid")


@dataclass(frozen=True)
class WcaWeights:
    w_degree: float = 0.7
    w_distance: float = 0.3
    ideal_degree: int = 4

    def __post_init__(self):
        if self.w_degree < 0 or self.w_distance < 0:
            raise ValueError("WCA weights must be non-negative")
        if abs(self.w_degree + self.w_distance - 1.0) > 1e-12:
            raise ValueError("WCA weights must sum to 1")


def _ber_adjacency(snap: Snapshot) -> dict[int, dict[int, float]]:
    adj: dict[int, dict[int, float]] = {n: {} for n in sorted(snap.nodes)}
    for (u, v), e in sorted(snap.edges.items()):
        adj[u][v] = e.mean_ber
        adj[v][u] = e.mean_ber
    return adj


def wca_scores(snap: Snapshot, weights: WcaWeights = WcaWeights()) -> dict[int, float]:
    adj = _ber_adjacency(snap)
    return {
        v: weights.w_degree * abs(len(nb) - weights.ideal_degree) + weights.w_distance * sum(nb.values())
        for v, nb in adj.items()
    }


def wca(snap: Snapshot, weights: WcaWeights = WcaWeights()) -> Partition:
    """Elect the unclustered node with the lowest combined score as head; its
    unclustered neighbours join it. Repeat until every node is clustered."""
    adj = _ber_adjacency(snap)
    score = wca_scores(snap, weights)
    label: dict[int, int] = {}
    for head in sorted(adj, key=lambda v: (score[v], v)):
        if head in label:
            continue
        label[head] = head
        for nb in adj[head]:
            if nb not in label:
                label[nb] = head
    return Partition(label)


def wca_heads(snap: Snapshot, weights: WcaWeights = WcaWeights()) -> set[int]:
    p = wca(snap, weights)
    score = wca_scores(snap, weights)
    return {min(members, key=lambda v: (score[v], v)) for members in p.communities()}


def wcds_dominators(snap: Snapshot) -> list[int]:
    """Greedy weakly-connected dominating set.

    Each step picks the node whose closed neighbourhood covers the most
    uncovered nodes (smallest id on ties). While the current component still
    has uncovered nodes, candidates are limited to covered nodes and their
    neighbours, which keeps the chosen set weakly connected.
    """
    adj = _ber_adjacency(snap)
    closed = {v: {v, *nb} for v, nb in adj.items()}
    uncovered = set(adj)
    covered: set[int] = set()
    chosen: list[int] = []
    while uncovered:
        frontier = covered | {nb for c in covered for nb in adj[c]}
        gains = {v: len(closed[v] & uncovered) for v in frontier}
        if not any(gains.values()):
            gains = {v: len(closed[v] & uncovered) for v in adj}
        best = min(gains, key=lambda v: (-gains[v], v))
        chosen.append(best)
        covered |= closed[best]
        uncovered -= closed[best]
    return chosen


def wcds(snap: Snapshot) -> Partition:
    """Dominators head the clusters; every other node joins the adjacent
    dominator with the lowest link BER (smallest id on ties)."""
    adj = _ber_adjacency(snap)
    doms = set(wcds_dominators(snap))
    label = {d: d for d in doms}
    for v in adj:
        if v in doms:
            continue
        label[v] = min((d for d in adj[v] if d in doms), key=lambda d: (adj[v][d], d))
    return Partition(label)


def _hops_within(adj: dict[int, dict[int, float]], src: int, k: int) -> dict[int, int]:
    dist = {src: 0}
    queue = deque([src])
    while queue:
        u = queue.popleft()
        if dist[u] == k:
            continue
        for nb in adj[u]:
            if nb not in dist:
                dist[nb] = dist[u] + 1
                queue.append(nb)
    return dist


def k_conid(snap: Snapshot, k: int = 2) -> Partition:
    """k-hop clustering by (degree, id) priority.

    A node is a head when no node within k hops has a better pair (higher
    degree, then lower id). Other nodes join the best head within k hops;
    a node with no head in range becomes a head itself.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    adj = _ber_adjacency(snap)

    def rank(v):
        return (-len(adj[v]), v)

    reach = {v: _hops_within(adj, v, k) for v in adj}
    heads = {v for v in adj if min(reach[v], key=rank) == v}
    label = {h: h for h in heads}
    for v in sorted(adj, key=rank):
        if v in label:
            continue
        in_range = [h for h in reach[v] if h in heads]
        if in_range:
            label[v] = min(in_range, key=rank)
        else:
            heads.add(v)
            label[v] = v
    return Partition(label)


def run_baseline(snap: Snapshot, algorithm: str, k: int = 2, weights: WcaWeights = WcaWeights()) -> Partition:
    if algorithm == "wca":
        return wca(snap, weights)
    if algorithm == "wcds":
        return wcds(snap)
    if algorithm == "kconid":
        return k_conid(snap, k)
    raise ValueError(f"unknown baseline {algorithm!r}")
