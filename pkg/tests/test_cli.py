import csv
import json
import subprocess
import sys

import pytest

from adhoc_cd.cli import main


@pytest.fixture(scope="module")
def data(tmp_path_factory):
    root = tmp_path_factory.mktemp("data")
    assert main(["generate", "--out", str(root / "t"), "--nodes", "12", "--timestamps", "8", "--churn", "0.1", "--seed", "3"]) == 0
    assert main(["generate", "--out", str(root / "m"), "--nodes", "9", "--timestamps", "1", "--layers", "3", "--seed", "3"]) == 0
    return root


def run(*argv):
    return main([str(a) for a in argv])


def test_generate_outputs(data):
    t = data / "t"
    assert {p.name for p in t.iterdir()} == {"records.csv", "ground_truth.json", "manifest.json"}
    manifest = json.loads((t / "manifest.json").read_text())
    assert manifest["command"] == "generate" and manifest["seed"] == 3
    assert set(manifest["config"]["counts"]) == {"records", "edges", "edge_timestamps"}
    assert len(json.loads((t / "ground_truth.json").read_text())) == 8


def test_generate_large_log_shape(tmp_path):
    assert run("generate", "--nodes", 62, "--timestamps", 391, "--p-in", 0.1, "--p-out", 0.01, "--seed", 7, "--out", tmp_path) == 0
    with open(tmp_path / "records.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert len({r["timestamp"] for r in rows}) == 391
    assert len({r["src"] for r in rows} | {r["dst"] for r in rows}) == 62


def test_cluster_temporal_outputs(data, tmp_path):
    rc = run("cluster-temporal", "--input", data / "t/records.csv", "--algorithm", "louvain", "--window", 2, "--seed", 1, "--out", tmp_path)
    assert rc == 0
    for name in ("partitions.json", "metrics.json", "manifest.json", "reconstructed.json"):
        assert (tmp_path / name).is_file()
    parts = json.loads((tmp_path / "partitions.json").read_text())
    assert [p["window_start"] for p in parts] == list(range(7))
    metrics = json.loads((tmp_path / "metrics.json").read_text())
    assert {"Q_bar", "variation_mean", "avg_ber", "per_timestamp"} <= set(metrics)
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert list(manifest["inputs"]) == ["records.csv"]
    assert str(tmp_path) not in json.dumps(manifest)


def test_cluster_temporal_elm(data, tmp_path):
    truth = json.loads((data / "t/ground_truth.json").read_text())[2]["communities"]
    names = sorted(truth)
    labels = tmp_path / "labels.csv"
    rows = ["u,v,together"] + [f"{a},{b},{int(truth[a] == truth[b])}" for i, a in enumerate(names) for b in names[i + 1 :]]
    labels.write_text("\n".join(rows) + "\n")
    rc = run("cluster-temporal", "--input", data / "t/records.csv", "--reconstruction", "elm", "--labels", labels, "--window", 2, "--seed", 0, "--out", tmp_path / "o")
    assert rc == 0
    assert "labels.csv" in json.loads((tmp_path / "o/manifest.json").read_text())["inputs"]


def test_cluster_temporal_usage_errors(data, tmp_path, capsys):
    inp = data / "t/records.csv"
    assert run("cluster-temporal", "--input", inp, "--window", 0, "--seed", 1, "--out", tmp_path) == 2
    assert run("cluster-temporal", "--input", inp, "--reconstruction", "elm", "--seed", 1, "--out", tmp_path) == 2
    assert "labels required" in capsys.readouterr().err
    assert run("cluster-temporal", "--input", inp, "--lambda", -1, "--seed", 1, "--out", tmp_path) == 2
    assert run("cluster-temporal", "--input", inp, "--out", tmp_path) == 2
    assert run("cluster-temporal", "--input", inp, "--algorithm", "spectral", "--seed", 1, "--out", tmp_path) == 2


def test_input_errors(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("timestamp,src,dst,ber\n0,a,a,0.1\n")
    assert run("cluster-temporal", "--input", bad, "--seed", 1, "--out", tmp_path / "o") == 3
    assert run("cluster-temporal", "--input", tmp_path / "missing.csv", "--seed", 1, "--out", tmp_path / "o") == 3
    ch = tmp_path / "ch.csv"
    ch.write_text("timestamp,src,dst,ber,channel\n0,a,b,0.1,5\n")
    assert run("cluster-multiplex", "--input", ch, "--layers", 3, "--seed", 1, "--out", tmp_path / "o") == 3


def test_pipeline_error_exit_4(data, tmp_path):
    labels = tmp_path / "one_class.csv"
    labels.write_text("u,v,together\ns000,s001,1\ns002,s003,1\n")
    rc = run("cluster-temporal", "--input", data / "t/records.csv", "--reconstruction", "elm", "--labels", labels, "--seed", 0, "--out", tmp_path / "o")
    assert rc == 4


def test_cluster_multiplex_outputs(data, tmp_path):
    rc = run("cluster-multiplex", "--input", data / "m/records.csv", "--layers", 3, "--algorithm", "mnlpa", "--seed", 2, "--out", tmp_path)
    assert rc == 0
    alloc = json.loads((tmp_path / "allocation.json").read_text())
    assert set(alloc["channels"]) == set(alloc["communities"])
    with open(data / "m/records.csv") as fh:
        sensors = {n for r in csv.DictReader(fh) for n in (r["src"], r["dst"])}
    assert set(alloc["channels"]) == sensors
    assert all(0 <= c < 3 for c in alloc["channels"].values())
    assert set(alloc["objective"]) == {"Q", "penalty", "ber", "L"}
    assert (tmp_path / "objective.json").is_file() and (tmp_path / "partition.json").is_file()
    assert run("cluster-multiplex", "--input", data / "m/records.csv", "--layers", 3, "--lambda", -1, "--seed", 2, "--out", tmp_path) == 2


def test_baseline(data, tmp_path, caplog):
    inp = data / "t/records.csv"
    assert run("baseline", "--input", inp, "--algorithm", "kconid", "--k", 2, "--out", tmp_path / "a") == 0
    parts = json.loads((tmp_path / "a/partitions.json").read_text())
    assert len(parts) == 8
    with caplog.at_level("WARNING", logger="adhoc_cd"):
        assert run("baseline", "--input", inp, "--algorithm", "kconid", "--out", tmp_path / "b") == 0
    assert "k=2" in caplog.text
    assert json.loads((tmp_path / "b/manifest.json").read_text())["config"]["k"] == 2
    assert run("baseline", "--input", inp, "--algorithm", "leach", "--out", tmp_path / "c") == 2
    for algo in ("wca", "wcds"):
        assert run("baseline", "--input", inp, "--algorithm", algo, "--out", tmp_path / algo) == 0


def test_generate_errors(tmp_path):
    assert run("generate", "--p-out", 0.5, "--p-in", 0.3, "--seed", 1, "--out", tmp_path) == 2
    assert run("generate", "--nodes", 2, "--communities", 3, "--seed", 1, "--out", tmp_path) == 2
    assert run("generate", "--out", tmp_path) == 2


def test_sweep_window(tmp_path):
    assert run("generate", "--nodes", 10, "--timestamps", 30, "--seed", 4, "--out", tmp_path / "d") == 0
    inp = tmp_path / "d/records.csv"
    assert run("sweep-window", "--input", inp, "--windows", "1..30", "--seed", 4, "--out", tmp_path / "s") == 0
    with open(tmp_path / "s/sweep.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert [int(r["window_len"]) for r in rows] == list(range(1, 31))
    assert run("sweep-window", "--input", inp, "--windows", "5..2", "--seed", 4, "--out", tmp_path / "s") == 2
    assert run("sweep-window", "--input", inp, "--windows", "1..31", "--seed", 4, "--out", tmp_path / "s") == 2


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "adhoc_cd", "generate", "--nodes", "5", "--timestamps", "2", "--seed", "1", "--out", str(tmp_path)],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert (tmp_path / "records.csv").is_file()
    bad = subprocess.run([sys.executable, "-m", "adhoc_cd", "nope"], capture_output=True, text=True)
    assert bad.returncode == 2 and bad.stderr.startswith("error:")
