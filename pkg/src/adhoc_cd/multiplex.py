"""Multi-channel clustering: multiplex community detection and channel allocation."""
from __future__ import annotations

import math
from dataclasses import dataclass

from .detect import DetectorConfig, louvain
from .detect.lpa import propagate
from .graph import Edge, MultiplexGraph, Partition, Snapshot, connected_components
from .metrics import (
    NoPairs,
    ObjectiveWeights,
    ZeroWeightGraph,
    average_ber,
    average_modularity,
    community_sizes,
    component_penalty,
)

MULTIPLEX_ALGORITHMS = ("mnlpa", "flatten_louvain")


class CoverageError(ValueError):
    pass


@dataclass(frozen=True)
class MultiplexDetectorConfig:
    algorithm: str = "mnlpa"
    interlayer_coupling: float = 1.0
    seed: int = 0
    max_iterations: int = 100

    def __post_init__(self):
        if self.algorithm not in MULTIPLEX_ALGORITHMS:
            raise ValueError(f"unknown multiplex algorithm {self.algorithm!r}")
        if self.interlayer_coupling < 0:
            raise ValueError("interlayer coupling must be >= 0")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")


@dataclass(frozen=True)
class ChannelAllocation:
    community_channel: dict[int, int]
    sensor_channel: dict[int, int]
    isolated: frozenset[int]


def multiplex_lpa(mgraph: MultiplexGraph, config: MultiplexDetectorConfig) -> Partition:
    """Label propagation with one label per sensor, scored by incident weight
    summed over all layers.

    The coupling between copies of a sensor adds the same amount to every
    candidate label, so it does not enter the argmax.
    """
    layers = [mgraph.layer(i).adjacency for i in range(mgraph.n_layers)]
    return Partition(propagate(mgraph.sensors, layers, config.seed, config.max_iterations))


def flatten(mgraph: MultiplexGraph) -> Snapshot:
    """Single-layer graph whose edge weights are summed over layers; the BER
    of a flattened edge is the mean over the layers carrying it."""
    weights: dict[tuple[int, int], list[Edge]] = {}
    for layer in mgraph.layers:
        for k in sorted(layer):
            weights.setdefault(k, []).append(layer[k])
    edges = {
        k: Edge(sum(e.mean_ber for e in es) / len(es), sum(e.weight for e in es))
        for k, es in sorted(weights.items())
    }
    return Snapshot(0, mgraph.sensors, edges)


def flatten_louvain(mgraph: MultiplexGraph, config: MultiplexDetectorConfig) -> Partition:
    det = DetectorConfig("louvain", seed=config.seed, max_iterations=config.max_iterations)
    return louvain(flatten(mgraph), det)


def detect_multiplex(mgraph: MultiplexGraph, config: MultiplexDetectorConfig) -> Partition:
    if config.algorithm == "mnlpa":
        return multiplex_lpa(mgraph, config)
    return flatten_louvain(mgraph, config)


def _placement_cost(mgraph: MultiplexGraph, members: set[int], channel: int) -> tuple[int, float]:
    """(extra components, mean intra-community BER) for a community on a channel.

    A community with no internal edge on the channel gets BER ``inf``.
    """
    layer = mgraph.layers[channel]
    inner = {k: e for k, e in layer.items() if k[0] in members and k[1] in members}
    sub = Snapshot(channel, frozenset(members), inner)
    increment = len(connected_components(sub)) - 1
    bers = [e.mean_ber for e in sub.edges.values()]
    quality = math.fsum(bers) / len(bers) if bers else math.inf
    return increment, quality


def greedy_channel_allocation(mgraph: MultiplexGraph, partition: Partition) -> ChannelAllocation:
    """Assign each community to one channel, largest community first.

    A community prefers the channel adding the fewest connected components,
    then the lowest mean intra-community BER, then the lowest index. The
    first ``min(L, n_communities)`` communities must use distinct channels.
    """
    missing = mgraph.sensors - partition.nodes
    if missing:
        raise CoverageError(f"partition does not cover sensors {sorted(missing)}")
    comms = partition.communities()
    order = sorted(range(len(comms)), key=lambda c: (-len(comms[c]), c))
    n_distinct = min(mgraph.n_layers, len(comms))
    used: set[int] = set()
    community_channel: dict[int, int] = {}
    for rank, c in enumerate(order):
        members = set(comms[c]) & mgraph.sensors
        options = [ch for ch in range(mgraph.n_layers) if rank >= n_distinct or ch not in used]
        best = min(options, key=lambda ch: (*_placement_cost(mgraph, members, ch), ch))
        community_channel[c] = best
        used.add(best)
    sensor_channel = {n: community_channel[partition[n]] for n in sorted(partition.nodes)}
    connected: set[int] = set()
    for ch, layer in enumerate(mgraph.layers):
        for u, v in layer:
            if sensor_channel[u] == ch == sensor_channel[v] and partition[u] == partition[v]:
                connected.update((u, v))
    isolated = set(sensor_channel) - connected
    return ChannelAllocation(community_channel, sensor_channel, frozenset(isolated))


def allocation_graphs(mgraph: MultiplexGraph, allocation: ChannelAllocation) -> list[Snapshot]:
    """Per channel, the layer restricted to the sensors allocated to it
    (channels with no sensors are omitted)."""
    out = []
    for ch in range(mgraph.n_layers):
        nodes = frozenset(n for n, c in allocation.sensor_channel.items() if c == ch)
        if nodes:
            out.append(mgraph.layer(ch).subgraph(nodes))
    return out


@dataclass(frozen=True)
class AllocationReport:
    Q: float | None
    penalty: int
    ber: float | None
    L: float | None
    n_isolated: int
    community_sizes: list[int]

    def to_json(self) -> dict:
        return {"Q": self.Q, "penalty": self.penalty, "ber": self.ber, "L": self.L}


def allocation_report(
    mgraph: MultiplexGraph,
    partition: Partition,
    allocation: ChannelAllocation,
    weights: ObjectiveWeights,
) -> AllocationReport:
    """Objective ``Q + lambda * (N_cc - N_community) + gamma * BER`` evaluated on
    the allocated layer subgraphs. Undefined terms (no edge weight, no
    reachable pair) are reported as ``None`` and make ``L`` undefined."""
    graphs = allocation_graphs(mgraph, allocation)
    try:
        q = average_modularity(graphs, partition)
    except ZeroWeightGraph:
        q = None
    penalty = component_penalty(graphs, partition)
    try:
        ber = average_ber(graphs, partition)
    except NoPairs:
        ber = None
    total = None
    if q is not None and ber is not None:
        total = q + weights.lam * penalty + weights.gamma * ber
    return AllocationReport(q, penalty, ber, total, len(allocation.isolated), community_sizes(partition))


def allocation_to_json(
    partition: Partition, allocation: ChannelAllocation, report: AllocationReport, names=None
) -> dict:
    def nm(n):
        return str(n) if names is None else names[n]

    return {
        "channels": {nm(n): ch for n, ch in allocation.sensor_channel.items()},
        "communities": partition.to_json(names),
        "isolated": sorted(nm(n) for n in allocation.isolated),
        "objective": report.to_json(),
    }


__all__ = [
    "AllocationReport",
    "ChannelAllocation",
    "CoverageError",
    "MultiplexDetectorConfig",
    "allocation_graphs",
    "allocation_report",
    "allocation_to_json",
    "detect_multiplex",
    "flatten",
    "flatten_louvain",
    "greedy_channel_allocation",
    "multiplex_lpa",
]
