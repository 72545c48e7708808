"""Planted-partition communication logs with known community structure."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .graph import NodeIndex, Partition, TimestampedRecord

PREFERRED_LAYER_SHIFT = 0.2


@dataclass(frozen=True)
class TemporalSynthConfig:
    n_nodes: int = 30
    n_communities: int = 3
    p_in: float = 0.5
    p_out: float = 0.05
    ber_in: tuple[float, float] = (0.05, 0.02)
    ber_out: tuple[float, float] = (0.3, 0.1)
    n_timestamps: int = 40
    churn: float = 0.0
    presence: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.n_nodes < 1 or self.n_timestamps < 1:
            raise ValueError("n_nodes and n_timestamps must be >= 1")
        if not 1 <= self.n_communities <= self.n_nodes:
            raise ValueError("need 1 <= n_communities <= n_nodes")
        if not 0 <= self.p_out < self.p_in <= 1:
            raise ValueError("need 0 <= p_out < p_in <= 1")
        for mean, sd in (self.ber_in, self.ber_out):
            if not 0 <= mean <= 1 or sd < 0:
                raise ValueError("BER means must lie in [0, 1] and stddevs be >= 0")
        if not 0 <= self.churn <= 1:
            raise ValueError("churn must lie in [0, 1]")
        if not 0 < self.presence <= 1:
            raise ValueError("presence must lie in (0, 1]")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


def sensor_names(n: int) -> list[str]:
    width = max(3, len(str(n - 1)))
    return [f"s{i:0{width}d}" for i in range(n)]


def _ber(rng, mean_sd) -> float:
    mean, sd = mean_sd
    return float(min(max(rng.normal(mean, sd) if sd > 0 else mean, 0.0), 1.0))


def _initial_labels(cfg: TemporalSynthConfig) -> np.ndarray:
    # balanced blocks of consecutive sensors
    return np.arange(cfg.n_nodes) * cfg.n_communities // cfg.n_nodes


def _churn(rng, labels: np.ndarray, cfg: TemporalSynthConfig) -> None:
    k = math.ceil(cfg.churn * cfg.n_nodes)
    if k:
        movers = rng.choice(cfg.n_nodes, size=k, replace=False)
        labels[movers] = rng.integers(0, cfg.n_communities, size=k)


def generate_temporal(cfg: TemporalSynthConfig) -> tuple[list[TimestampedRecord], list[Partition]]:
    """One record per sampled link per tick, plus the planted partition of all
    sensors at every tick.

    Each tick: churn (from the second tick on) moves ``ceil(churn * n)``
    random sensors to random communities, each sensor is active with
    probability ``presence``, and every active pair links with ``p_in`` or
    ``p_out``. Link direction is random.
    """
    rng = np.random.default_rng(cfg.seed)
    index = NodeIndex(sensor_names(cfg.n_nodes))
    ids = [index.intern(nm) for nm in index.names]
    labels = _initial_labels(cfg)
    records: list[TimestampedRecord] = []
    truth: list[Partition] = []
    for t in range(cfg.n_timestamps):
        if t:
            _churn(rng, labels, cfg)
        active = np.flatnonzero(rng.random(cfg.n_nodes) < cfg.presence)
        truth.append(Partition(dict(enumerate(labels.tolist()))))
        for a_pos, u in enumerate(active):
            for v in active[a_pos + 1 :]:
                same = labels[u] == labels[v]
                if rng.random() < (cfg.p_in if same else cfg.p_out):
                    ber = _ber(rng, cfg.ber_in if same else cfg.ber_out)
                    src, dst = (u, v) if rng.random() < 0.5 else (v, u)
                    records.append(TimestampedRecord(t, ids[src], ids[dst], ber))
    return records, truth


def generate_multiplex(
    cfg: TemporalSynthConfig, n_layers: int, layer_affinity
) -> tuple[list[TimestampedRecord], Partition]:
    """Channel-tagged records over ``cfg.n_timestamps`` ticks for a fixed
    planted partition (churn is ignored).

    An intra-community link goes to layer l with probability proportional to
    ``layer_affinity[c][l]``; its BER follows ``ber_in`` on the community's
    preferred layers (those tied for the highest affinity) and is shifted up
    by 0.2 elsewhere.
    Inter-community links use a uniformly random layer and ``ber_out``.
    """
    aff = np.asarray(layer_affinity, dtype=float)
    if aff.shape != (cfg.n_communities, n_layers):
        raise ValueError(f"layer_affinity must have shape ({cfg.n_communities}, {n_layers})")
    if (aff < 0).any() or (aff > 1).any() or (aff.sum(axis=1) <= 0).any():
        raise ValueError("affinities must lie in [0, 1] with every row non-zero")
    probs = aff / aff.sum(axis=1, keepdims=True)
    preferred = aff == aff.max(axis=1, keepdims=True)
    rng = np.random.default_rng(cfg.seed)
    index = NodeIndex(sensor_names(cfg.n_nodes))
    ids = [index.intern(nm) for nm in index.names]
    labels = _initial_labels(cfg)
    records: list[TimestampedRecord] = []
    for t in range(cfg.n_timestamps):
        active = np.flatnonzero(rng.random(cfg.n_nodes) < cfg.presence)
        for a_pos, u in enumerate(active):
            for v in active[a_pos + 1 :]:
                c = labels[u]
                same = c == labels[v]
                if rng.random() >= (cfg.p_in if same else cfg.p_out):
                    continue
                if same:
                    layer = int(rng.choice(n_layers, p=probs[c]))
                    mean, sd = cfg.ber_in
                    if not preferred[c, layer]:
                        mean = min(mean + PREFERRED_LAYER_SHIFT, 1.0)
                    ber = _ber(rng, (mean, sd))
                else:
                    layer = int(rng.integers(n_layers))
                    ber = _ber(rng, cfg.ber_out)
                src, dst = (u, v) if rng.random() < 0.5 else (v, u)
                records.append(TimestampedRecord(t, ids[src], ids[dst], ber, layer))
    return records, Partition(dict(enumerate(labels.tolist())))


def dataset_counts(records: list[TimestampedRecord]) -> dict[str, int]:
    """Record, distinct-edge and edge-timestamp counts (the three readings of
    a 'total edge' column)."""
    pairs = {(min(r.src.id, r.dst.id), max(r.src.id, r.dst.id)) for r in records}
    pair_ticks = {(r.timestamp, min(r.src.id, r.dst.id), max(r.src.id, r.dst.id)) for r in records}
    return {"records": len(records), "edges": len(pairs), "edge_timestamps": len(pair_ticks)}


def partitions_to_json(truth: list[Partition], names: list[str]) -> list[dict]:
    return [{"timestamp": t, "communities": p.to_json(names)} for t, p in enumerate(truth)]
