from __future__ import annotations

import numpy as np
from scipy.sparse.csgraph import csgraph_from_dense, shortest_path

from ..graph import Partition, Snapshot, connected_components
from ..metrics import modularity

_RTOL = 1e-10


def _fixpoint(step, start: np.ndarray, limit: int) -> np.ndarray:
    cur = start
    for _ in range(limit + 1):
        nxt = step(cur)
        if np.array_equal(nxt, cur):
            return nxt
        cur = nxt
    return cur


def _betweenness_matrix(length: np.ndarray) -> np.ndarray:
    """Edge betweenness for a dense length matrix (``inf`` = no edge).

    All sources are handled at once: ``pred[s, u, v]`` marks edge u->v lying
    on a shortest path from s, path counts and dependencies are the
    fixpoints of the usual Brandes recursions over that DAG.
    """
    n = length.shape[0]
    if n == 0:
        return np.zeros((0, 0))
    dist = shortest_path(csgraph_from_dense(length, null_value=np.inf), directed=False)
    has_edge = np.isfinite(length)
    through = dist[:, :, None] + np.where(has_edge, length, 0.0)[None, :, :]
    target = dist[:, None, :]
    with np.errstate(invalid="ignore"):
        on_path = np.abs(through - target) <= _RTOL * np.maximum(np.abs(target), 1.0)
    pred = has_edge[None] & np.isfinite(dist)[:, :, None] & on_path
    predf = pred.astype(float)
    eye = np.eye(n)
    sigma = _fixpoint(lambda s: eye + np.einsum("su,suv->sv", s, predf), eye, n)
    ratio = np.divide(sigma[:, :, None], sigma[:, None, :], out=np.zeros((n, n, n)), where=pred)
    delta = _fixpoint(
        lambda d: np.einsum("suv,sv->su", ratio, 1.0 + d), np.zeros((n, n)), n
    )
    credit = np.einsum("suv,sv->uv", ratio, 1.0 + delta)
    # each unordered pair is counted once from either endpoint as source
    return (credit + credit.T) / 2.0


def edge_betweenness(graph: Snapshot) -> dict[tuple[int, int], float]:
    """Weighted edge betweenness with path length 1/weight."""
    order = sorted(graph.nodes)
    idx = {v: i for i, v in enumerate(order)}
    length = np.full((len(order), len(order)), np.inf)
    for (u, v), e in graph.edges.items():
        length[idx[u], idx[v]] = length[idx[v], idx[u]] = 1.0 / e.weight
    b = _betweenness_matrix(length)
    return {(u, v): float(b[idx[u], idx[v]]) for (u, v) in graph.edges}


def girvan_newman(graph: Snapshot, config=None) -> Partition:
    """Divisive clustering by repeated removal of the highest-betweenness edge.

    Every time a removal splits a component the partition into components is
    recorded; the recorded partition with the highest modularity on the
    original graph wins (the earliest one on ties).
    """
    comps = connected_components(graph)
    best = Partition.from_communities(comps)
    if graph.total_weight <= 0:
        return best
    best_q = modularity(graph, best)
    edges = dict(graph.edges)
    n_comp = len(comps)
    scores: dict[tuple[int, int], float] = {}
    dirty: set[int] = set(graph.nodes)
    while edges:
        if dirty:
            sub = Snapshot(0, frozenset(dirty), {k: e for k, e in edges.items() if k[0] in dirty})
            scores.update(edge_betweenness(sub))
        top = max(scores.values())
        # near-equal scores are ties; the smallest edge key is removed first
        cut = min(k for k, s in scores.items() if s >= top - _RTOL * max(abs(top), 1.0))
        del edges[cut]
        del scores[cut]
        current = Snapshot(0, graph.nodes, edges)
        comps = connected_components(current)
        holder = next(c for c in comps if cut[0] in c)
        dirty = holder | next(c for c in comps if cut[1] in c)
        if len(comps) > n_comp:
            n_comp = len(comps)
            p = Partition.from_communities(comps)
            q = modularity(graph, p)
            if q > best_q:
                best, best_q = p, q
    return best
