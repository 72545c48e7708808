"""Single-layer community detection on weighted snapshots.

Every detector is a pure function of ``(graph, config)``: node visit orders
come from a generator seeded with ``config.seed`` and applied to the sorted
node list, so results do not depend on how the input graph was assembled.
"""
from __future__ import annotations

from dataclasses import dataclass

from ..graph import Partition, Snapshot

ALGORITHMS = ("louvain", "girvan_newman", "lpa", "infomap")


@dataclass(frozen=True)
class DetectorConfig:
    algorithm: str = "louvain"
    seed: int = 0
    max_iterations: int = 100
    tolerance: float = 1e-9

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}; expected one of {ALGORITHMS}")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be > 0")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


from .girvan_newman import edge_betweenness, girvan_newman  # noqa: E402
from .infomap import codelength, infomap_two_level  # noqa: E402
from .louvain import louvain  # noqa: E402
from .lpa import lpa  # noqa: E402


def detect(graph: Snapshot, config: DetectorConfig) -> Partition:
    if config.algorithm == "louvain":
        return louvain(graph, config)
    if config.algorithm == "girvan_newman":
        return girvan_newman(graph, config)
    if config.algorithm == "lpa":
        return lpa(graph, config)
    return infomap_two_level(graph, config)


__all__ = [
    "ALGORITHMS",
    "DetectorConfig",
    "codelength",
    "detect",
    "edge_betweenness",
    "girvan_newman",
    "infomap_two_level",
    "louvain",
    "lpa",
]
