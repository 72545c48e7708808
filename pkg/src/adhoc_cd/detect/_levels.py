"""Compact weighted graph used by the multi-level optimizers (Louvain, Infomap)."""
from __future__ import annotations

from dataclasses import dataclass

from ..graph import Snapshot


@dataclass
class LevelGraph:
    adj: list[dict[int, float]]  # neighbour -> weight, no self entries
    loops: list[float]  # self-loop weight, each internal edge counted once

    @property
    def n(self) -> int:
        return len(self.adj)

    def strength(self, i: int) -> float:
        return sum(self.adj[i].values()) + 2 * self.loops[i]

    @classmethod
    def from_snapshot(cls, graph: Snapshot) -> tuple[LevelGraph, list[int]]:
        order = sorted(graph.nodes)
        idx = {n: i for i, n in enumerate(order)}
        adj: list[dict[int, float]] = [{} for _ in order]
        for (u, v), e in sorted(graph.edges.items()):
            iu, iv = idx[u], idx[v]
            adj[iu][iv] = adj[iu].get(iv, 0.0) + e.weight
            adj[iv][iu] = adj[iv].get(iu, 0.0) + e.weight
        return cls(adj, [0.0] * len(order)), order

    def aggregate(self, comm: list[int]) -> LevelGraph:
        k = max(comm) + 1
        adj: list[dict[int, float]] = [{} for _ in range(k)]
        loops = [0.0] * k
        for i in range(self.n):
            ci = comm[i]
            loops[ci] += self.loops[i]
            for j, w in self.adj[i].items():
                cj = comm[j]
                if ci == cj:
                    if i < j:
                        loops[ci] += w
                else:
                    adj[ci][cj] = adj[ci].get(cj, 0.0) + w
        return LevelGraph(adj, loops)


def dense_labels(comm: list[int]) -> list[int]:
    seen: dict[int, int] = {}
    return [seen.setdefault(c, len(seen)) for c in comm]
