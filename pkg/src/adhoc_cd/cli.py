"""Batch command-line interface.

Exit codes: 0 success, 2 invalid flags, 3 unreadable or invalid input
records, 4 pipeline failure. Log verbosity comes from ``ADHOC_CD_LOG``.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import logging
import os
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .baselines import WcaWeights, run_baseline
from .detect import DetectorConfig
from .graph import (
    MissingChannelError,
    NodeIndex,
    Partition,
    RecordError,
    Snapshot,
    build_multiplex,
    build_series,
    parse_records,
    write_records,
)
from .metrics import (
    NoPairs,
    ObjectiveWeights,
    ZeroWeightGraph,
    average_ber,
    average_modularity,
    component_penalty,
    variation,
)
from .multiplex import (
    MultiplexDetectorConfig,
    allocation_report,
    allocation_to_json,
    detect_multiplex,
    greedy_channel_allocation,
)
from .synth import (
    TemporalSynthConfig,
    dataset_counts,
    generate_multiplex,
    generate_temporal,
    partitions_to_json,
    sensor_names,
)
from .temporal import (
    DegenerateLabels,
    parse_labels,
    per_timestamp_partitions,
    run_temporal_windows,
    windows_to_json,
)

log = logging.getLogger("adhoc_cd")

DETECTORS = {"louvain": "louvain", "gn": "girvan_newman", "lpa": "lpa", "infomap": "infomap"}
MULTIPLEX = {"mnlpa": "mnlpa", "flatten": "flatten_louvain"}


class InputError(Exception):
    pass


class UsageError(Exception):
    pass


# -- helpers -----------------------------------------------------------------


def _digest(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2) + "\n", encoding="utf-8")


def _manifest(out: Path, command: str, config: dict, seed, inputs: Sequence[Path]) -> None:
    _write_json(
        out / "manifest.json",
        {
            "command": command,
            "config": config,
            "seed": seed,
            "inputs": {p.name: _digest(p) for p in inputs},
            "version": __version__,
        },
    )


def _format_for(path: Path, fmt: str | None) -> str:
    if fmt:
        return fmt
    return "jsonl" if path.suffix in (".jsonl", ".json", ".ndjson") else "csv"


def _load(path: Path, fmt: str | None, n_layers: int | None = None):
    if not path.is_file():
        raise InputError(f"input file not found: {path}")
    index = NodeIndex()
    try:
        with path.open("rb") as fh:
            records = parse_records(fh, _format_for(path, fmt), n_layers=n_layers, index=index)
    except (RecordError, UnicodeDecodeError) as exc:
        raise InputError(f"{path}: {exc}") from None
    if not records:
        raise InputError(f"{path}: no records")
    return records, index


def _require_seed(args) -> int:
    if args.seed is None:
        raise UsageError("--seed is required for randomized algorithms")
    return args.seed


def _mean(xs):
    xs = [x for x in xs if x is not None]
    return float(np.mean(xs)) if xs else None


def _series_report(
    windows: Sequence[Sequence[Snapshot]],
    partitions: Sequence[Partition],
    starts: Sequence[int],
    timestamps: Sequence[int],
    weights: ObjectiveWeights,
) -> dict:
    """Metric report for a sequence of (graphs, partition) evaluations."""
    rows = []
    prev = None
    for graphs, part, start, ts in zip(windows, partitions, starts, timestamps):
        try:
            q = average_modularity(graphs, part)
        except ZeroWeightGraph:
            q = None
        try:
            ber = average_ber(graphs, part)
        except NoPairs:
            ber = None
        count, norm = variation(prev, part) if prev is not None else (None, None)
        rows.append(
            {
                "window_start": start,
                "timestamp": ts,
                "Q": q,
                "avg_ber": ber,
                "penalty": component_penalty(graphs, part),
                "n_communities": part.n_communities,
                "variation": count,
                "variation_normalized": norm,
            }
        )
        prev = part
    q_bar = _mean(r["Q"] for r in rows)
    avg_ber = _mean(r["avg_ber"] for r in rows)
    penalty = _mean(r["penalty"] for r in rows)
    obj = None
    if q_bar is not None and avg_ber is not None:
        obj = q_bar + weights.lam * penalty + weights.gamma * avg_ber
    return {
        "Q_bar": q_bar,
        "variation_mean": _mean(r["variation_normalized"] for r in rows),
        "variation_count_mean": _mean(r["variation"] for r in rows),
        "avg_ber": avg_ber,
        "objective": obj,
        "per_timestamp": rows,
    }


def _weights(args) -> ObjectiveWeights:
    if args.lam < 0:
        raise UsageError("--lambda must be >= 0")
    return ObjectiveWeights(args.lam, args.gamma)


# -- commands ----------------------------------------------------------------


def cmd_cluster_temporal(args) -> int:
    if args.window < 1:
        raise UsageError("--window must be >= 1")
    if args.reconstruction == "elm" and not args.labels:
        raise UsageError("labels required for --reconstruction elm (pass --labels)")
    seed = _require_seed(args)
    weights = _weights(args)
    records, index = _load(args.input, args.format)
    labels = None
    inputs = [args.input]
    if args.labels:
        if not args.labels.is_file():
            raise InputError(f"label file not found: {args.labels}")
        try:
            labels = parse_labels(args.labels.read_text(encoding="utf-8"), index)
        except ValueError as exc:
            raise InputError(f"{args.labels}: {exc}") from None
        inputs.append(args.labels)
    series = build_series(records)
    if args.window > len(series):
        raise UsageError(f"--window {args.window} exceeds the {len(series)} timestamps in the input")
    config = DetectorConfig(DETECTORS[args.algorithm], seed=seed)
    results = run_temporal_windows(
        series, config, args.window, args.reconstruction, labels, elm_threshold=args.elm_threshold
    )
    names = index.names
    report = _series_report(
        [series.snapshots[r.window_start : r.window_start + args.window] for r in results],
        [r.partition for r in results],
        [r.window_start for r in results],
        [r.graph.timestamp for r in results],
        weights,
    )
    out = args.out
    out.mkdir(parents=True, exist_ok=True)
    _write_json(out / "partitions.json", windows_to_json(results, names))
    _write_json(out / "metrics.json", report)
    _write_json(out / "reconstructed.json", [r.graph.to_json(names) for r in results])
    _manifest(
        out,
        "cluster-temporal",
        {
            "algorithm": config.algorithm,
            "window": args.window,
            "reconstruction": args.reconstruction,
            "elm_threshold": args.elm_threshold,
            "lambda": weights.lam,
            "gamma": weights.gamma,
            "max_iterations": config.max_iterations,
            "tolerance": config.tolerance,
        },
        seed,
        inputs,
    )
    return 0


def cmd_cluster_multiplex(args) -> int:
    if args.layers < 1:
        raise UsageError("--layers must be >= 1")
    seed = _require_seed(args)
    weights = _weights(args)
    records, index = _load(args.input, args.format, n_layers=args.layers)
    try:
        mgraph = build_multiplex(records, args.layers)
    except MissingChannelError as exc:
        raise InputError(str(exc)) from None
    config = MultiplexDetectorConfig(MULTIPLEX[args.algorithm], seed=seed)
    partition = detect_multiplex(mgraph, config)
    allocation = greedy_channel_allocation(mgraph, partition)
    report = allocation_report(mgraph, partition, allocation, weights)
    names = index.names
    out = args.out
    out.mkdir(parents=True, exist_ok=True)
    _write_json(out / "partition.json", partition.to_json(names))
    _write_json(out / "allocation.json", allocation_to_json(partition, allocation, report, names))
    _write_json(
        out / "objective.json",
        {
            **report.to_json(),
            "lambda": weights.lam,
            "gamma": weights.gamma,
            "n_isolated": report.n_isolated,
            "community_sizes": report.community_sizes,
            "community_channels": {str(c): ch for c, ch in sorted(allocation.community_channel.items())},
        },
    )
    _manifest(
        out,
        "cluster-multiplex",
        {"algorithm": config.algorithm, "layers": args.layers, "lambda": weights.lam, "gamma": weights.gamma},
        seed,
        [args.input],
    )
    return 0


def cmd_baseline(args) -> int:
    k = args.k
    if args.algorithm == "kconid" and k is None:
        log.warning("--k not given for kconid; using k=2")
        k = 2
    k = 2 if k is None else k
    if k < 1:
        raise UsageError("--k must be >= 1")
    wca_weights = WcaWeights(args.w_degree, 1.0 - args.w_degree, args.ideal_degree)
    weights = _weights(args)
    records, index = _load(args.input, args.format)
    series = build_series(records)
    parts = [run_baseline(s, args.algorithm, k, wca_weights) for s in series]
    report = _series_report(
        [[s] for s in series], parts, list(range(len(series))), series.timestamps, weights
    )
    names = index.names
    out = args.out
    out.mkdir(parents=True, exist_ok=True)
    _write_json(
        out / "partitions.json",
        [
            {"window_start": i, "timestamp": s.timestamp, "communities": p.to_json(names)}
            for i, (s, p) in enumerate(zip(series, parts))
        ],
    )
    _write_json(out / "metrics.json", report)
    config = {"algorithm": args.algorithm, "lambda": weights.lam, "gamma": weights.gamma}
    if args.algorithm == "kconid":
        config["k"] = k
    if args.algorithm == "wca":
        config.update(w_degree=wca_weights.w_degree, w_distance=wca_weights.w_distance, ideal_degree=args.ideal_degree)
    _manifest(out, "baseline", config, None, [args.input])
    return 0


def cmd_generate(args) -> int:
    seed = _require_seed(args)
    try:
        cfg = TemporalSynthConfig(
            n_nodes=args.nodes,
            n_communities=args.communities,
            p_in=args.p_in,
            p_out=args.p_out,
            ber_in=tuple(args.ber_in),
            ber_out=tuple(args.ber_out),
            n_timestamps=args.timestamps,
            churn=args.churn,
            presence=args.presence,
            seed=seed,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    names = sensor_names(cfg.n_nodes)
    out = args.out
    if args.layers is not None:
        if args.layers < 1:
            raise UsageError("--layers must be >= 1")
        if args.affinity == "identity":
            if args.layers < cfg.n_communities:
                raise UsageError("identity affinity needs --layers >= --communities")
            aff = np.eye(cfg.n_communities, args.layers)
        else:
            aff = np.ones((cfg.n_communities, args.layers))
        records, truth = generate_multiplex(cfg, args.layers, aff)
        truth_json = {"communities": truth.to_json(names)}
    else:
        records, truth_list = generate_temporal(cfg)
        truth_json = partitions_to_json(truth_list, names)
    out.mkdir(parents=True, exist_ok=True)
    data_path = out / f"records.{args.format}"
    data_path.write_text(write_records(records, args.format), encoding="utf-8")
    _write_json(out / "ground_truth.json", truth_json)
    config = {
        "nodes": cfg.n_nodes,
        "communities": cfg.n_communities,
        "timestamps": cfg.n_timestamps,
        "p_in": cfg.p_in,
        "p_out": cfg.p_out,
        "ber_in": list(cfg.ber_in),
        "ber_out": list(cfg.ber_out),
        "churn": cfg.churn,
        "presence": cfg.presence,
        "layers": args.layers,
        "affinity": args.affinity if args.layers is not None else None,
        "format": args.format,
        "counts": dataset_counts(records),
    }
    _manifest(out, "generate", config, seed, [])
    return 0


def _parse_range(text: str) -> tuple[int, int]:
    try:
        lo, hi = (int(x) for x in text.split(".."))
    except ValueError:
        raise UsageError(f"--windows expects A..B, got {text!r}") from None
    if lo < 1 or hi < lo:
        raise UsageError(f"--windows range {text!r} must satisfy 1 <= A <= B")
    return lo, hi


def cmd_sweep_window(args) -> int:
    lo, hi = _parse_range(args.windows)
    seed = _require_seed(args)
    records, index = _load(args.input, args.format)
    series = build_series(records)
    if hi > len(series):
        raise UsageError(f"window {hi} exceeds the {len(series)} timestamps in the input")
    config = DetectorConfig(DETECTORS[args.algorithm], seed=seed)
    parts = per_timestamp_partitions(series, config)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["window_len", "Q_bar", "variation_mean"])
    for w in range(lo, hi + 1):
        results = run_temporal_windows(series, config, w, partitions=parts)
        report = _series_report(
            [series.snapshots[r.window_start : r.window_start + w] for r in results],
            [r.partition for r in results],
            [r.window_start for r in results],
            [r.graph.timestamp for r in results],
            ObjectiveWeights(),
        )
        writer.writerow([w, report["Q_bar"], "" if report["variation_mean"] is None else report["variation_mean"]])
    out = args.out
    out.mkdir(parents=True, exist_ok=True)
    (out / "sweep.csv").write_text(buf.getvalue(), encoding="utf-8")
    _manifest(out, "sweep-window", {"algorithm": config.algorithm, "windows": [lo, hi]}, seed, [args.input])
    return 0


# -- parser ------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="adhoc-cd", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, seed=True, objective=True):
        p.add_argument("--input", type=Path, required=True)
        p.add_argument("--format", choices=("csv", "jsonl"), default=None, help="default: from file extension")
        p.add_argument("--out", type=Path, required=True)
        if seed:
            p.add_argument("--seed", type=int, default=None)
        if objective:
            p.add_argument("--lambda", dest="lam", type=float, default=0.0)
            p.add_argument("--gamma", type=float, default=0.0)

    p = sub.add_parser("cluster-temporal", help="cluster a time-evolving log over sliding windows")
    common(p)
    p.add_argument("--algorithm", choices=tuple(DETECTORS), default="louvain")
    p.add_argument("--window", type=int, default=2)
    p.add_argument("--reconstruction", choices=("jaccard", "elm"), default="jaccard")
    p.add_argument("--labels", type=Path, default=None, help="u,v,together CSV for --reconstruction elm")
    p.add_argument("--elm-threshold", type=float, default=0.5)
    p.set_defaults(func=cmd_cluster_temporal)

    p = sub.add_parser("cluster-multiplex", help="multiplex detection and channel allocation")
    common(p, objective=False)
    p.add_argument("--layers", type=int, required=True)
    p.add_argument("--algorithm", choices=tuple(MULTIPLEX), default="mnlpa")
    p.add_argument("--lambda", dest="lam", type=float, default=1.0)
    p.add_argument("--gamma", type=float, default=1.0)
    p.set_defaults(func=cmd_cluster_multiplex)

    p = sub.add_parser("baseline", help="per-timestamp conventional clustering")
    common(p, seed=False)
    p.add_argument("--algorithm", choices=("wca", "wcds", "kconid"), required=True)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--w-degree", type=float, default=0.7)
    p.add_argument("--ideal-degree", type=int, default=4)
    p.set_defaults(func=cmd_baseline)

    p = sub.add_parser("generate", help="write a synthetic planted-partition log")
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--nodes", type=int, default=30)
    p.add_argument("--communities", type=int, default=3)
    p.add_argument("--timestamps", type=int, default=40)
    p.add_argument("--p-in", type=float, default=0.5)
    p.add_argument("--p-out", type=float, default=0.05)
    p.add_argument("--ber-in", type=float, nargs=2, default=(0.05, 0.02), metavar=("MEAN", "SD"))
    p.add_argument("--ber-out", type=float, nargs=2, default=(0.3, 0.1), metavar=("MEAN", "SD"))
    p.add_argument("--churn", type=float, default=0.0)
    p.add_argument("--presence", type=float, default=1.0)
    p.add_argument("--layers", type=int, default=None, help="emit a channel-tagged multiplex log")
    p.add_argument("--affinity", choices=("identity", "uniform"), default="identity")
    p.add_argument("--format", choices=("csv", "jsonl"), default="csv")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("sweep-window", help="Q_bar and variation as a function of window length")
    common(p, objective=False)
    p.add_argument("--algorithm", choices=tuple(DETECTORS), default="louvain")
    p.add_argument("--windows", default="1..30")
    p.set_defaults(func=cmd_sweep_window)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    logging.basicConfig(
        level=os.environ.get("ADHOC_CD_LOG", "WARNING").upper(),
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (ValueError, DegenerateLabels, ZeroWeightGraph, NoPairs) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
