"""Partition quality and stability metrics."""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.sparse.csgraph import csgraph_from_dense, shortest_path

from .graph import Partition, Snapshot, connected_components


class ZeroWeightGraph(ValueError):
    pass


class NoPairs(ValueError):
    pass


@dataclass(frozen=True)
class ModularityTerms:
    e_ii: np.ndarray
    a_i: np.ndarray

    @property
    def Q(self) -> float:
        return float(np.sum(self.e_ii - self.a_i**2))


@dataclass(frozen=True)
class ObjectiveWeights:
    lam: float = 0.0
    gamma: float = 0.0

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError("lambda must be >= 0")


def _labels(partition: Partition | Mapping[int, int]) -> Mapping[int, int]:
    return partition.assignment if isinstance(partition, Partition) else partition


def modularity_terms(graph: Snapshot, partition: Partition | Mapping[int, int]) -> ModularityTerms:
    lab = _labels(partition)
    total = graph.total_weight
    if total <= 0:
        raise ZeroWeightGraph("modularity is undefined on a graph with no edge weight")
    ids = {c: i for i, c in enumerate(sorted(set(lab[n] for n in graph.nodes)))}
    internal = np.zeros(len(ids))
    incident = np.zeros(len(ids))
    for (u, v), e in graph.edges.items():
        cu, cv = ids[lab[u]], ids[lab[v]]
        incident[cu] += e.weight
        incident[cv] += e.weight
        if cu == cv:
            internal[cu] += e.weight
    return ModularityTerms(internal / total, incident / (2 * total))


def modularity(graph: Snapshot, partition: Partition | Mapping[int, int]) -> float:
    """Weighted Newman modularity ``sum_i e_ii - a_i**2``."""
    lab = _labels(partition)
    total = 0.0
    internal: dict[int, float] = {}
    incident: dict[int, float] = {}
    for (u, v), e in graph.edges.items():
        w = e.weight
        total += w
        cu, cv = lab[u], lab[v]
        incident[cu] = incident.get(cu, 0.0) + w
        incident[cv] = incident.get(cv, 0.0) + w
        if cu == cv:
            internal[cu] = internal.get(cu, 0.0) + w
    if total <= 0:
        raise ZeroWeightGraph("modularity is undefined on a graph with no edge weight")
    two_m = 2 * total
    q = sum(internal.values()) / total
    q -= sum((a / two_m) ** 2 for a in incident.values())
    return q


def _per_graph(partitions, graphs):
    if isinstance(partitions, (Partition, Mapping)):
        return [partitions] * len(graphs)
    if len(partitions) != len(graphs):
        raise ValueError("need one partition per graph")
    return list(partitions)


def average_modularity(
    graphs: Sequence[Snapshot], partitions: Partition | Sequence[Partition]
) -> float:
    """Mean modularity over graphs; graphs without edge weight are skipped."""
    vals = [
        modularity(g, p) for g, p in zip(graphs, _per_graph(partitions, graphs)) if g.total_weight > 0
    ]
    if not vals:
        raise ZeroWeightGraph("every graph has zero edge weight")
    return sum(vals) / len(vals)


def contingency(p1: Partition, p2: Partition) -> tuple[np.ndarray, list[int]]:
    shared = sorted(p1.nodes & p2.nodes)
    a = {c: i for i, c in enumerate(sorted({p1[n] for n in shared}))}
    b = {c: i for i, c in enumerate(sorted({p2[n] for n in shared}))}
    table = np.zeros((len(a), len(b)), dtype=np.int64)
    for n in shared:
        table[a[p1[n]], b[p2[n]]] += 1
    return table, shared


def variation(p1: Partition, p2: Partition) -> tuple[int, float]:
    """Minimum number of shared nodes that must change community to turn p1
    into p2, under the best one-to-one matching of communities.

    Returns ``(count, count / n_shared)``.
    """
    table, shared = contingency(p1, p2)
    if not shared:
        return 0, 0.0
    rows, cols = linear_sum_assignment(table, maximize=True)
    count = len(shared) - int(table[rows, cols].sum())
    return count, count / len(shared)


def _component_pair_distances(graph: Snapshot, partition: Partition) -> list[float]:
    lab = _labels(partition)
    order = sorted(graph.nodes)
    idx = {n: i for i, n in enumerate(order)}
    dense = np.full((len(order), len(order)), np.inf)
    for (u, v), e in graph.edges.items():
        if lab[u] == lab[v]:
            dense[idx[u], idx[v]] = dense[idx[v], idx[u]] = e.mean_ber
    # null_value=inf keeps zero-BER links as real edges
    dist = shortest_path(csgraph_from_dense(dense, null_value=np.inf), directed=False)
    iu = np.triu_indices(len(order), k=1)
    d = dist[iu]
    return d[np.isfinite(d)].tolist()


def average_ber(graphs: Sequence[Snapshot], partitions: Partition | Sequence[Partition]) -> float:
    """Mean shortest-path BER between node pairs of the same community.

    Inter-community edges are removed and path cost is the sum of raw edge
    BERs. Each graph contributes the mean over its reachable pairs; graphs
    with no reachable pair are skipped.
    """
    vals = []
    for g, p in zip(graphs, _per_graph(partitions, graphs)):
        d = _component_pair_distances(g, p)
        if d:
            vals.append(math.fsum(d) / len(d))
    if not vals:
        raise NoPairs("no pair of nodes is connected inside a community")
    return sum(vals) / len(vals)


def component_penalty(graphs: Sequence[Snapshot], partitions: Partition | Sequence[Partition]) -> int:
    """Sum over graphs of (components without inter-community edges) minus
    (communities present in that graph)."""
    total = 0
    for g, p in zip(graphs, _per_graph(partitions, graphs)):
        lab = _labels(p)
        n_comm = len({lab[n] for n in g.nodes})
        total += len(connected_components(g, p if isinstance(p, Partition) else Partition(p))) - n_comm
    return total


def objective_terms(
    graphs: Sequence[Snapshot], partitions: Partition | Sequence[Partition]
) -> tuple[float, int, float]:
    return (
        average_modularity(graphs, partitions),
        component_penalty(graphs, partitions),
        average_ber(graphs, partitions),
    )


def objective(
    graphs: Sequence[Snapshot],
    partitions: Partition | Sequence[Partition],
    weights: ObjectiveWeights,
) -> float:
    q, penalty, ber = objective_terms(graphs, partitions)
    return q + weights.lam * penalty + weights.gamma * ber


def _entropy(counts) -> float:
    n = sum(counts)
    return -sum(c / n * math.log(c / n) for c in counts if c)


def nmi(p1: Partition, p2: Partition) -> float:
    """Normalized mutual information over shared nodes (arithmetic-mean
    normalization). Both partitions trivial gives 1; exactly one trivial gives 0."""
    table, shared = contingency(p1, p2)
    if not shared:
        raise ValueError("partitions share no nodes")
    n = len(shared)
    h1 = _entropy(table.sum(axis=1))
    h2 = _entropy(table.sum(axis=0))
    if h1 == 0 and h2 == 0:
        return 1.0
    if h1 == 0 or h2 == 0:
        return 0.0
    nz = table > 0
    if (nz.sum(axis=0) == 1).all() and (nz.sum(axis=1) == 1).all():
        return 1.0
    rows = table.sum(axis=1)
    cols = table.sum(axis=0)
    mi = 0.0
    for i, j in zip(*np.nonzero(table)):
        nij = table[i, j]
        mi += nij / n * math.log(nij * n / (rows[i] * cols[j]))
    return float(min(max(mi / ((h1 + h2) / 2), 0.0), 1.0))


def community_sizes(partition: Partition) -> list[int]:
    counts = Counter(partition.assignment.values())
    return [counts[c] for c in range(partition.n_communities)]
