"""Clustering over a time window by co-membership reconstruction.

Pipeline per window: detect communities on every snapshot, turn the
per-timestamp partitions into a pair-similarity graph (co-membership
Jaccard or a learned score), then run label propagation on that graph.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from itertools import combinations
from typing import IO, Sequence

import numpy as np

from .detect import DetectorConfig, detect
from .detect.lpa import propagate
from .graph import Edge, NodeIndex, Partition, Snapshot, TemporalSeries

ELM_RIDGE = 1e-6


class WindowError(ValueError):
    pass


class MissingLabels(ValueError):
    pass


class DegenerateLabels(ValueError):
    pass


@dataclass(frozen=True)
class CoMembershipWindow:
    window_start: int
    window_len: int
    nodes: tuple[int, ...]
    pair_same: dict[tuple[int, int], int]
    pair_seen: dict[tuple[int, int], int]
    bits: dict[tuple[int, int], tuple[int, ...]] = field(repr=False)


def per_timestamp_partitions(series: TemporalSeries, config: DetectorConfig) -> list[Partition]:
    return [detect(snap, config) for snap in series]


def _check_window(n: int, window: tuple[int, int]) -> tuple[int, int]:
    start, length = window
    if length < 1 or start < 0 or start + length > n:
        raise WindowError(f"window (start={start}, len={length}) outside series of length {n}")
    return start, length


def co_membership(partitions: Sequence[Partition], window: tuple[int, int]) -> CoMembershipWindow:
    """Count, for every pair seen in the window, the ticks where either node
    is present and the ticks where both are present in the same community.

    ``bits`` holds the per-tick encoding used by the ELM: 0 when the pair
    shares a community at that tick, 1 otherwise (including absence).
    """
    start, length = _check_window(len(partitions), window)
    parts = partitions[start : start + length]
    nodes = sorted(set().union(*(p.nodes for p in parts)))
    same: dict[tuple[int, int], int] = {}
    seen: dict[tuple[int, int], int] = {}
    bits: dict[tuple[int, int], tuple[int, ...]] = {}
    for u, v in combinations(nodes, 2):
        s = n = 0
        vec = []
        for p in parts:
            cu = p.assignment.get(u)
            cv = p.assignment.get(v)
            if cu is None and cv is None:
                vec.append(1)
                continue
            n += 1
            together = cu is not None and cu == cv
            s += together
            vec.append(0 if together else 1)
        if n:
            seen[(u, v)] = n
            same[(u, v)] = s
            bits[(u, v)] = tuple(vec)
    return CoMembershipWindow(start, length, tuple(nodes), same, seen, bits)


def jaccard_cooccurrence(
    partitions: Sequence[Partition], series: TemporalSeries, window: tuple[int, int]
) -> Snapshot:
    """Reconstructed graph with edge weight J = pair_same / pair_seen.

    Pairs never in the same community get no edge. The stored ``mean_ber`` is
    ``1 - J`` and the snapshot is flagged synthetic.
    """
    if len(partitions) != len(series):
        raise ValueError("need one partition per snapshot")
    cm = co_membership(partitions, window)
    edges = {}
    for pair, seen in cm.pair_seen.items():
        same = cm.pair_same[pair]
        if same:
            j = same / seen
            edges[pair] = Edge(1.0 - j, j)
    nodes = frozenset(cm.nodes)
    return Snapshot(series[cm.window_start].timestamp, nodes, edges, synthetic=True)


@dataclass
class ElmModel:
    """Extreme learning machine: fixed random sigmoid hidden layer, ridge
    least-squares readout."""

    input_dim: int
    n_hidden: int = 32
    seed: int = 0
    ridge: float = ELM_RIDGE
    hidden_weights: np.ndarray = field(init=False, repr=False)
    hidden_bias: np.ndarray = field(init=False, repr=False)
    output_weights: np.ndarray | None = field(default=None, init=False, repr=False)

    def __post_init__(self):
        rng = np.random.default_rng(self.seed)
        self.hidden_weights = rng.uniform(-1.0, 1.0, size=(self.n_hidden, self.input_dim))
        self.hidden_bias = rng.uniform(-1.0, 1.0, size=self.n_hidden)

    def hidden(self, x: np.ndarray) -> np.ndarray:
        return 1.0 / (1.0 + np.exp(-(np.atleast_2d(x) @ self.hidden_weights.T + self.hidden_bias)))

    def fit(self, x: np.ndarray, y: np.ndarray) -> ElmModel:
        h = self.hidden(x)
        a = h.T @ h + self.ridge * np.eye(self.n_hidden)
        self.output_weights = np.linalg.solve(a, h.T @ np.asarray(y, dtype=float))
        return self

    def predict(self, x: np.ndarray) -> np.ndarray:
        if self.output_weights is None:
            raise RuntimeError("model is not fitted")
        return np.clip(self.hidden(x) @ self.output_weights, 0.0, 1.0)


def _label_rows(cm: CoMembershipWindow, labels):
    xs, ys = [], []
    for u, v, bit in labels:
        key = (u, v) if u < v else (v, u)
        vec = cm.bits.get(key, (1,) * cm.window_len)
        xs.append(vec)
        ys.append(int(bit))
    return np.array(xs, dtype=float), np.array(ys, dtype=float)


def fit_elm(
    partitions: Sequence[Partition],
    window: tuple[int, int],
    labels: Sequence[tuple[int, int, int]],
    model_seed: int = 0,
    n_hidden: int = 32,
) -> tuple[ElmModel, float, CoMembershipWindow]:
    """Fit on labelled pairs; returns (model, training accuracy, window counts)."""
    if not labels:
        raise MissingLabels("ELM reconstruction needs at least one labelled pair")
    if len({int(b) for _, _, b in labels}) < 2:
        raise DegenerateLabels("labels must contain both together=0 and together=1")
    cm = co_membership(partitions, window)
    x, y = _label_rows(cm, labels)
    model = ElmModel(cm.window_len, n_hidden=n_hidden, seed=model_seed).fit(x, y)
    acc = float(np.mean((model.predict(x) >= 0.5) == (y == 1)))
    return model, acc, cm


def elm_edge_weights(
    partitions: Sequence[Partition],
    window: tuple[int, int],
    labels: Sequence[tuple[int, int, int]],
    model_seed: int = 0,
    series: TemporalSeries | None = None,
    threshold: float = 0.5,
    n_hidden: int = 32,
) -> Snapshot:
    """Reconstructed graph whose edge weights are ELM togetherness scores.

    Pairs scoring below ``threshold`` (or exactly 0) are dropped.
    """
    model, _, cm = fit_elm(partitions, window, labels, model_seed, n_hidden)
    pairs = sorted(cm.pair_seen)
    edges = {}
    if pairs:
        scores = model.predict(np.array([cm.bits[p] for p in pairs], dtype=float))
        for pair, s in zip(pairs, scores.tolist()):
            if s >= threshold and s > 0:
                edges[pair] = Edge(1.0 - s, s)
    ts = series[cm.window_start].timestamp if series is not None else cm.window_start
    return Snapshot(ts, frozenset(cm.nodes), edges, synthetic=True)


def node_partition(reconstructed: Snapshot, config: DetectorConfig) -> Partition:
    """Final clustering of a window: label propagation on the reconstructed graph."""
    return Partition(
        propagate(reconstructed.nodes, [reconstructed.adjacency], config.seed, config.max_iterations)
    )


@dataclass(frozen=True)
class WindowResult:
    window_start: int
    partition: Partition
    graph: Snapshot


def run_temporal_windows(
    series: TemporalSeries,
    config: DetectorConfig,
    window_len: int,
    reconstruction: str = "jaccard",
    labels: Sequence[tuple[int, int, int]] | None = None,
    partitions: Sequence[Partition] | None = None,
    elm_threshold: float = 0.5,
) -> list[WindowResult]:
    """Slide a window of ``window_len`` snapshots with stride 1 and cluster each.

    Per-timestamp partitions are computed once (or taken from ``partitions``)
    and shared by all overlapping windows.
    """
    if reconstruction not in ("jaccard", "elm"):
        raise ValueError(f"unknown reconstruction {reconstruction!r}")
    if reconstruction == "elm" and not labels:
        raise MissingLabels("labels required for ELM reconstruction")
    if not 1 <= window_len <= len(series):
        raise WindowError(f"window_len must be in [1, {len(series)}], got {window_len}")
    if partitions is None:
        partitions = per_timestamp_partitions(series, config)
    out = []
    for start in range(len(series) - window_len + 1):
        if reconstruction == "jaccard":
            g = jaccard_cooccurrence(partitions, series, (start, window_len))
        else:
            g = elm_edge_weights(
                partitions, (start, window_len), labels, config.seed, series, elm_threshold
            )
        out.append(WindowResult(start, node_partition(g, config), g))
    return out


def run_temporal(
    series: TemporalSeries,
    config: DetectorConfig,
    window_len: int,
    reconstruction: str = "jaccard",
    labels: Sequence[tuple[int, int, int]] | None = None,
    partitions: Sequence[Partition] | None = None,
) -> list[tuple[int, Partition]]:
    return [
        (r.window_start, r.partition)
        for r in run_temporal_windows(series, config, window_len, reconstruction, labels, partitions)
    ]


def parse_labels(stream: IO[str] | str, index: NodeIndex) -> list[tuple[int, int, int]]:
    """Read a ``u,v,together`` CSV; sensor names must already be known."""
    text = stream if isinstance(stream, str) else stream.read()
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None or [h.strip() for h in header] != ["u", "v", "together"]:
        raise ValueError("label file must start with header 'u,v,together'")
    out = []
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != 3 or row[2].strip() not in ("0", "1"):
            raise ValueError(f"line {lineno}: expected u,v,together with together in {{0,1}}")
        u, v = row[0].strip(), row[1].strip()
        if u not in index or v not in index:
            raise ValueError(f"line {lineno}: unknown sensor in label row")
        out.append((index.id(u), index.id(v), int(row[2])))
    return out


def windows_to_json(results: Sequence[WindowResult | tuple[int, Partition]], names=None) -> list[dict]:
    out = []
    for r in results:
        start, part = (r.window_start, r.partition) if isinstance(r, WindowResult) else r
        out.append({"window_start": start, "communities": part.to_json(names)})
    return out
