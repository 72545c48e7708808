"""Domain types, log ingestion and graph construction.

A communication log is a sequence of directed ``(timestamp, src, dst, ber)``
observations, optionally tagged with a channel. Everything downstream works on
undirected weighted graphs built from it: one :class:`Snapshot` per timestamp,
a :class:`TemporalSeries` of snapshots, or a :class:`MultiplexGraph` with one
layer per channel.
"""
from __future__ import annotations

import csv
import io
import json
from collections import defaultdict
from dataclasses import dataclass, field
from functools import cached_property
from typing import IO, Iterable, Iterator, Mapping, NamedTuple, Sequence

MIN_WEIGHT = 1e-9


class RecordError(ValueError):
    """A record in a communication log failed validation."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class MalformedRecordError(RecordError):
    pass


class SelfLoopError(RecordError):
    pass


class BerOutOfRangeError(RecordError):
    pass


class UnknownChannelError(RecordError):
    pass


class MissingChannelError(ValueError):
    pass


@dataclass(frozen=True, order=True)
class NodeId:
    id: int
    name: str = field(compare=False)

    def __int__(self) -> int:
        return self.id


class NodeIndex:
    """Interns external sensor names to dense integer ids 0..N-1."""

    def __init__(self, names: Iterable[str] = ()):
        self._ids: dict[str, int] = {}
        self._names: list[str] = []
        for name in names:
            self.intern(name)

    def intern(self, name: str) -> NodeId:
        idx = self._ids.get(name)
        if idx is None:
            idx = len(self._names)
            self._ids[name] = idx
            self._names.append(name)
        return NodeId(idx, name)

    def name(self, idx: int) -> str:
        return self._names[idx]

    def id(self, name: str) -> int:
        return self._ids[name]

    def __contains__(self, name: str) -> bool:
        return name in self._ids

    def __len__(self) -> int:
        return len(self._names)

    @property
    def names(self) -> list[str]:
        return list(self._names)


@dataclass(frozen=True)
class TimestampedRecord:
    timestamp: int
    src: NodeId
    dst: NodeId
    ber: float
    channel: int | None = None


class Edge(NamedTuple):
    mean_ber: float
    weight: float


def ber_to_weight(ber: float) -> float:
    return max(1.0 - ber, MIN_WEIGHT)


def _key(u: int, v: int) -> tuple[int, int]:
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class Snapshot:
    """Undirected weighted graph over dense node ids.

    ``edges`` maps ``(u, v)`` with ``u < v`` to an :class:`Edge`. Weights are
    affinities (higher is a better link); ``mean_ber`` keeps the raw error
    rate for path-based metrics.
    """

    timestamp: int
    nodes: frozenset[int]
    edges: Mapping[tuple[int, int], Edge]
    synthetic: bool = False

    def __post_init__(self):
        for (u, v), e in self.edges.items():
            if not u < v:
                raise ValueError(f"edge key ({u}, {v}) must satisfy u < v")
            if u not in self.nodes or v not in self.nodes:
                raise ValueError(f"edge ({u}, {v}) has an endpoint outside the node set")
            if not e.weight > 0:
                raise ValueError(f"edge ({u}, {v}) has non-positive weight {e.weight}")

    @classmethod
    def from_weights(
        cls,
        edges: Iterable[tuple[int, int, float]],
        nodes: Iterable[int] = (),
        timestamp: int = 0,
        synthetic: bool = False,
    ) -> Snapshot:
        """Build from ``(u, v, weight)`` triples; ``mean_ber`` is set to ``1 - weight``
        (floored at 0 for weights above 1)."""
        emap: dict[tuple[int, int], Edge] = {}
        ns = set(nodes)
        for u, v, w in edges:
            if u == v:
                raise ValueError("self-loops are not allowed")
            emap[_key(u, v)] = Edge(min(max(1.0 - w, 0.0), 1.0), float(w))
            ns.update((u, v))
        return cls(timestamp, frozenset(ns), emap, synthetic)

    @classmethod
    def from_bers(
        cls, edges: Iterable[tuple[int, int, float]], nodes: Iterable[int] = (), timestamp: int = 0
    ) -> Snapshot:
        emap: dict[tuple[int, int], Edge] = {}
        ns = set(nodes)
        for u, v, b in edges:
            emap[_key(u, v)] = Edge(float(b), ber_to_weight(b))
            ns.update((u, v))
        return cls(timestamp, frozenset(ns), emap)

    @cached_property
    def adjacency(self) -> dict[int, dict[int, float]]:
        """Node -> {neighbour: weight}, with keys in sorted order."""
        adj: dict[int, dict[int, float]] = {n: {} for n in sorted(self.nodes)}
        for (u, v), e in sorted(self.edges.items()):
            adj[u][v] = e.weight
            adj[v][u] = e.weight
        return adj

    @property
    def total_weight(self) -> float:
        return sum(e.weight for e in self.edges.values())

    def subgraph(self, nodes: Iterable[int]) -> Snapshot:
        keep = frozenset(nodes) & self.nodes
        edges = {k: e for k, e in self.edges.items() if k[0] in keep and k[1] in keep}
        return Snapshot(self.timestamp, keep, edges, self.synthetic)

    def to_json(self, names: Sequence[str] | Mapping[int, str] | None = None) -> dict:
        def nm(x: int):
            return x if names is None else names[x]

        out = {
            "timestamp": self.timestamp,
            "edges": [[nm(u), nm(v), e.mean_ber, e.weight] for (u, v), e in sorted(self.edges.items())],
        }
        if self.synthetic:
            out["synthetic"] = True
        return out


@dataclass(frozen=True)
class TemporalSeries:
    snapshots: tuple[Snapshot, ...]

    def __post_init__(self):
        ts = [s.timestamp for s in self.snapshots]
        if any(a >= b for a, b in zip(ts, ts[1:])):
            raise ValueError("snapshot timestamps must be strictly increasing")

    @cached_property
    def global_nodes(self) -> frozenset[int]:
        out: set[int] = set()
        for s in self.snapshots:
            out |= s.nodes
        return frozenset(out)

    @property
    def timestamps(self) -> list[int]:
        return [s.timestamp for s in self.snapshots]

    def __len__(self) -> int:
        return len(self.snapshots)

    def __getitem__(self, i):
        return self.snapshots[i]

    def __iter__(self) -> Iterator[Snapshot]:
        return iter(self.snapshots)


@dataclass(frozen=True)
class MultiplexGraph:
    """One layer per channel over a shared sensor set.

    Interlayer coupling is implicit: only copies of the same sensor are
    coupled, so nothing beyond the per-layer edge sets is stored.
    """

    n_layers: int
    sensors: frozenset[int]
    layers: tuple[Mapping[tuple[int, int], Edge], ...]

    def __post_init__(self):
        if self.n_layers < 1:
            raise ValueError("n_layers must be >= 1")
        if len(self.layers) != self.n_layers:
            raise ValueError("number of layers does not match n_layers")

    def layer(self, idx: int) -> Snapshot:
        return Snapshot(idx, self.sensors, self.layers[idx])

    @classmethod
    def from_weights(
        cls, layers: Sequence[Iterable[tuple[int, int, float]]], sensors: Iterable[int] = ()
    ) -> MultiplexGraph:
        snaps = [Snapshot.from_weights(es) for es in layers]
        ns = set(sensors)
        for s in snaps:
            ns |= s.nodes
        return cls(len(snaps), frozenset(ns), tuple(s.edges for s in snaps))


@dataclass(frozen=True)
class Partition:
    """Assignment of nodes to community labels.

    Construction canonicalizes labels: communities are numbered 0..k-1 in
    order of their smallest member.
    """

    assignment: Mapping[int, int]

    def __post_init__(self):
        first: dict[int, int] = {}
        for node in sorted(self.assignment):
            first.setdefault(self.assignment[node], node)
        relabel = {lab: i for i, lab in enumerate(sorted(first, key=first.__getitem__))}
        canon = {n: relabel[self.assignment[n]] for n in sorted(self.assignment)}
        object.__setattr__(self, "assignment", canon)

    @classmethod
    def from_communities(cls, communities: Iterable[Iterable[int]]) -> Partition:
        assignment = {}
        for lab, members in enumerate(communities):
            for n in members:
                if n in assignment:
                    raise ValueError(f"node {n} appears in more than one community")
                assignment[n] = lab
        return cls(assignment)

    @classmethod
    def singletons(cls, nodes: Iterable[int]) -> Partition:
        return cls({n: i for i, n in enumerate(sorted(nodes))})

    @property
    def n_communities(self) -> int:
        return len(set(self.assignment.values()))

    @property
    def nodes(self) -> frozenset[int]:
        return frozenset(self.assignment)

    def communities(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in range(self.n_communities)]
        for n, lab in self.assignment.items():
            out[lab].append(n)
        return out

    def restrict(self, nodes: Iterable[int]) -> Partition:
        keep = set(nodes)
        return Partition({n: c for n, c in self.assignment.items() if n in keep})

    def __getitem__(self, node: int) -> int:
        return self.assignment[node]

    def __len__(self) -> int:
        return len(self.assignment)

    def to_json(self, names: Sequence[str] | Mapping[int, str] | None = None) -> dict:
        if names is None:
            return {str(n): c for n, c in self.assignment.items()}
        return {names[n]: c for n, c in self.assignment.items()}


# -- parsing -----------------------------------------------------------------

CSV_FIELDS = ("timestamp", "src", "dst", "ber")


def _make_record(line, t, src, dst, ber, ch, index: NodeIndex, n_layers):
    try:
        t = int(t)
        ber = float(ber)
        ch = None if ch is None or ch == "" else int(ch)
    except (TypeError, ValueError) as exc:
        raise MalformedRecordError(line, str(exc)) from None
    if not isinstance(src, str) or not isinstance(dst, str) or not src or not dst:
        raise MalformedRecordError(line, "sensor names must be non-empty strings")
    if src == dst:
        raise SelfLoopError(line, f"self-communication of {src!r}")
    if not 0.0 <= ber <= 1.0:
        raise BerOutOfRangeError(line, f"ber {ber} outside [0, 1]")
    if ch is not None and (ch < 0 or (n_layers is not None and ch >= n_layers)):
        raise UnknownChannelError(line, f"channel {ch} outside [0, {n_layers})")
    return TimestampedRecord(t, index.intern(src), index.intern(dst), ber, ch)


def parse_records(
    stream: IO[bytes] | IO[str] | bytes | str,
    format: str = "csv",
    n_layers: int | None = None,
    index: NodeIndex | None = None,
) -> list[TimestampedRecord]:
    """Parse a CSV or JSONL communication log.

    Sensor names are interned into ``index`` (a fresh one when omitted) in
    order of first appearance. Line numbers in errors are 1-based and count
    the CSV header.
    """
    if isinstance(stream, (bytes, str)):
        data = stream
    else:
        data = stream.read()
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    index = NodeIndex() if index is None else index
    records = []
    if format == "csv":
        lines = data.splitlines()
        if not lines:
            return records
        header = [h.strip() for h in next(csv.reader([lines[0]]))]
        if tuple(header[:4]) != CSV_FIELDS or header[4:] not in ([], ["channel"]):
            raise MalformedRecordError(1, f"unexpected header {lines[0]!r}")
        for lineno, row in enumerate(csv.reader(lines[1:]), start=2):
            if not row:
                continue
            if len(row) not in (4, 5) or len(row) > len(header):
                raise MalformedRecordError(lineno, f"expected {len(header)} fields, got {len(row)}")
            ch = row[4] if len(row) == 5 else None
            records.append(_make_record(lineno, *row[:4], ch, index, n_layers))
    elif format == "jsonl":
        for lineno, line in enumerate(data.splitlines(), start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                args = (obj["t"], obj["src"], obj["dst"], obj["ber"], obj.get("ch"))
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise MalformedRecordError(lineno, f"bad JSON record: {exc}") from None
            if isinstance(args[0], float) or isinstance(args[4], float):
                raise MalformedRecordError(lineno, "timestamp and channel must be integers")
            records.append(_make_record(lineno, *args, index, n_layers))
    else:
        raise ValueError(f"unknown record format {format!r}")
    return records


def write_records(records: Iterable[TimestampedRecord], format: str = "csv") -> str:
    records = list(records)
    with_channel = any(r.channel is not None for r in records)
    buf = io.StringIO()
    if format == "csv":
        buf.write(",".join(CSV_FIELDS + (("channel",) if with_channel else ())) + "\n")
        for r in records:
            row = [str(r.timestamp), r.src.name, r.dst.name, repr(r.ber)]
            if with_channel:
                row.append("" if r.channel is None else str(r.channel))
            buf.write(",".join(row) + "\n")
    elif format == "jsonl":
        for r in records:
            obj = {"t": r.timestamp, "src": r.src.name, "dst": r.dst.name, "ber": r.ber}
            if r.channel is not None:
                obj["ch"] = r.channel
            buf.write(json.dumps(obj) + "\n")
    else:
        raise ValueError(f"unknown record format {format!r}")
    return buf.getvalue()


def node_names(records: Iterable[TimestampedRecord]) -> dict[int, str]:
    out = {}
    for r in records:
        out[r.src.id] = r.src.name
        out[r.dst.id] = r.dst.name
    return out


# -- construction ------------------------------------------------------------


def _aggregate(records: Iterable[TimestampedRecord]) -> tuple[set[int], dict[tuple[int, int], Edge]]:
    sums: dict[tuple[int, int], list[float]] = defaultdict(list)
    nodes: set[int] = set()
    for r in records:
        u, v = r.src.id, r.dst.id
        nodes.update((u, v))
        sums[_key(u, v)].append(r.ber)
    edges = {}
    for k in sorted(sums):
        # sort so the float mean does not depend on record order
        vals = sorted(sums[k])
        mean = sum(vals) / len(vals)
        edges[k] = Edge(mean, ber_to_weight(mean))
    return nodes, edges


def build_snapshot(records: Sequence[TimestampedRecord], timestamp: int) -> Snapshot:
    if any(r.timestamp != timestamp for r in records):
        raise ValueError(f"all records must have timestamp {timestamp}")
    nodes, edges = _aggregate(records)
    return Snapshot(timestamp, frozenset(nodes), edges)


def build_series(records: Iterable[TimestampedRecord]) -> TemporalSeries:
    by_t: dict[int, list[TimestampedRecord]] = defaultdict(list)
    for r in records:
        by_t[r.timestamp].append(r)
    return TemporalSeries(tuple(build_snapshot(by_t[t], t) for t in sorted(by_t)))


def build_multiplex(records: Iterable[TimestampedRecord], n_layers: int) -> MultiplexGraph:
    by_layer: list[list[TimestampedRecord]] = [[] for _ in range(n_layers)]
    sensors: set[int] = set()
    for r in records:
        if r.channel is None:
            raise MissingChannelError(f"record at t={r.timestamp} ({r.src.name}->{r.dst.name}) has no channel")
        if not 0 <= r.channel < n_layers:
            raise UnknownChannelError(0, f"channel {r.channel} outside [0, {n_layers})")
        by_layer[r.channel].append(r)
        sensors.update((r.src.id, r.dst.id))
    layers = tuple(_aggregate(rs)[1] for rs in by_layer)
    return MultiplexGraph(n_layers, frozenset(sensors), layers)


def connected_components(graph: Snapshot, restrict_to: Partition | None = None) -> list[set[int]]:
    """Components by edge reachability, ignoring inter-community edges when a
    partition is given. Returned in order of smallest member."""
    parent = {n: n for n in graph.nodes}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for u, v in graph.edges:
        if restrict_to is not None and restrict_to[u] != restrict_to[v]:
            continue
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[max(ru, rv)] = min(ru, rv)
    comps: dict[int, set[int]] = defaultdict(set)
    for n in graph.nodes:
        comps[find(n)].add(n)
    return [comps[r] for r in sorted(comps)]
