import json

import numpy as np
import pytest

from mnemosim.cli import main
from mnemosim.netcore import read_network
from mnemosim.reach import ModelParams, mnemonic_reachability


@pytest.fixture
def networks(tmp_path):
    paths = {}
    for cond in ("weak-first", "strong-first"):
        p = tmp_path / f"{cond}.txt"
        assert main(["gen-network", "--condition", cond, "--out", str(p)]) == 0
        paths[cond] = p
    return paths


def test_gen_network(networks):
    w = read_network(networks["weak-first"])
    s = read_network(networks["strong-first"])
    assert w.r == 4 and all(len(w.edges(t)) == 8 for t in range(4))
    assert sorted(map(tuple, (w.edges(t) for t in range(4)))) == sorted(map(tuple, (s.edges(t) for t in range(4))))
    assert w.edges(0) == s.edges(3)
    part = json.loads(networks["weak-first"].with_suffix(".partition.json").read_text())
    assert part["assignment"] == [c for c in range(4) for _ in range(4)]


def test_simulate_bundles_and_determinism(tmp_path):
    argv = ["simulate", "--condition", "both", "--reps", "6", "--seed", "42"]
    assert main(argv + ["--out-dir", str(tmp_path / "a")]) == 0
    assert main(argv + ["--out-dir", str(tmp_path / "b")]) == 0
    bundles = sorted((tmp_path / "a" / "runs").glob("*/rep_*"))
    assert len(bundles) == 12
    for b in bundles:
        assert {p.name for p in b.iterdir()} == {"pre.csv", "post.csv", "records.csv", "manifest.json"}
    for csv in (tmp_path / "a").rglob("*.csv"):
        twin = tmp_path / "b" / csv.relative_to(tmp_path / "a")
        assert csv.read_bytes() == twin.read_bytes(), csv
    header = (tmp_path / "a" / "summary.csv").read_text().splitlines()[0].split(",")
    for col in ("convergence_increase_mean", "within_increase_mean", "neighboring_increase_mean",
                "distant_increase_mean", "overlap_r1_mean", "diversity_r4_std"):
        assert col in header
    manifest = json.loads((tmp_path / "a" / "manifest.json").read_text())
    assert manifest["command"] == "simulate"
    assert manifest["effective_config"]["seed"] == 42
    assert "summary.csv" in manifest["outputs"]


def test_simulate_config_file_and_bad_field(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"boost": 0.2, "capacity": 10}))
    assert main(["simulate", "--config", str(cfg), "--condition", "weak-first", "--reps", "1",
                 "--out-dir", str(tmp_path / "o")]) == 0
    manifest = json.loads((tmp_path / "o" / "manifest.json").read_text())
    assert manifest["effective_config"]["capacity"] == 10
    assert str(cfg) in manifest["inputs"]
    cfg.write_text(json.dumps({"capacty": 10}))
    assert main(["simulate", "--config", str(cfg), "--reps", "1", "--out-dir", str(tmp_path / "p")]) == 1
    assert "capacty" in capsys.readouterr().err


def _aggregates(path):
    rows = path.read_text().splitlines()[1:]
    return {k: (float(v) if v else None) for k, v in (r.split(",") for r in rows)}


def test_reach_with_partition(tmp_path, networks):
    net = networks["weak-first"]
    out = tmp_path / "r"
    assert main(["reach", "--network", str(net), "--partition", str(net.with_suffix(".partition.json")),
                 "--out-dir", str(out)]) == 0
    agg = _aggregates(out / "aggregates.csv")
    assert agg["within"] > agg["neighboring"] > agg["distant"]
    C = np.loadtxt(out / "reach.csv", delimiter=",")
    expected = mnemonic_reachability(read_network(net), ModelParams(1.0, 0.5)).C
    np.testing.assert_array_equal(C, expected)


def test_reach_gamma_zero_and_no_partition(tmp_path, networks):
    net = networks["strong-first"]
    out = tmp_path / "r"
    assert main(["reach", "--network", str(net), "--gamma", "0", "--out-dir", str(out)]) == 0
    assert not (out / "aggregates.csv").exists()
    np.testing.assert_array_equal(np.loadtxt(out / "reach.csv", delimiter=","), read_network(net).rounds[-1])


def test_reach_malformed_network(tmp_path, capsys):
    bad = tmp_path / "bad.txt"
    bad.write_text("4 1\n0 0 1\n0 1 oops\n")
    assert main(["reach", "--network", str(bad), "--out-dir", str(tmp_path / "o")]) == 1
    assert "bad.txt:3:" in capsys.readouterr().err


def test_calibrate_noiseless_recovery(tmp_path, networks):
    targets = []
    for cond, net in networks.items():
        C = mnemonic_reachability(read_network(net), ModelParams(1.0, 0.5)).symmetrized()
        p = tmp_path / f"{cond}.target.csv"
        np.savetxt(p, C, delimiter=",", fmt="%.17g")
        targets.append(str(p))
    out = tmp_path / "cal"
    assert main(["calibrate", "--networks", *map(str, networks.values()), "--targets", *targets,
                 "--out-dir", str(out)]) == 0
    best = json.loads((out / "best.json").read_text())
    assert (best["lambda"], best["gamma"]) == (1.0, 0.5)
    lines = (out / "surface.csv").read_text().splitlines()
    assert len(lines) == 12 and all(len(line.split(",")) == 12 for line in lines)


def test_calibrate_from_simulation_bundles(tmp_path, networks):
    sim = tmp_path / "sim"
    assert main(["simulate", "--reps", "2", "--seed", "1", "--out-dir", str(sim)]) == 0
    nets, bundles = [], []
    for cond in ("weak-first", "strong-first"):
        for rep in range(2):
            nets.append(str(networks[cond]))
            bundles.append(str(sim / "runs" / cond / f"rep_{rep:03d}"))
    out = tmp_path / "cal"
    assert main(["calibrate", "--networks", *nets, "--targets", *bundles, "--grid-step", "0.5",
                 "--target-mode", "post", "--out-dir", str(out)]) == 0
    assert json.loads((out / "best.json").read_text())["targets_used"] == 4


def test_calibrate_misaligned(tmp_path, networks, capsys):
    assert main(["calibrate", "--networks", str(networks["weak-first"]), "--targets", "a.csv", "b.csv",
                 "--out-dir", str(tmp_path / "o")]) == 1
    assert "error" in capsys.readouterr().err


def test_pipeline_deterministic(tmp_path):
    edges = tmp_path / "planted.txt"
    assert main(["gen-planted", "--sizes", "15,15,15,15", "--p-in", "0.4", "--p-out", "0.03",
                 "--seed", "2", "--out", str(edges)]) == 0
    for name in ("a", "b"):
        assert main(["pipeline", "--edges", str(edges), "--order", "all", "--seed", "5",
                     "--out-dir", str(tmp_path / name)]) == 0
    pa = (tmp_path / "a" / "predictions.csv").read_text()
    assert pa == (tmp_path / "b" / "predictions.csv").read_text()
    rows = pa.splitlines()
    assert rows[0] == "order,category,value" and len(rows) == 1 + 3 * 4
    manifest = json.loads((tmp_path / "a" / "manifest.json").read_text())
    assert sum(manifest["graph"]["round_sizes"]) == manifest["graph"]["edges"]


def test_pipeline_empty_file(tmp_path):
    edges = tmp_path / "empty.txt"
    edges.write_text("% nothing\n")
    assert main(["pipeline", "--edges", str(edges), "--out-dir", str(tmp_path / "o")]) == 1


def test_threads_env_gives_same_surface(tmp_path, networks, monkeypatch):
    C = mnemonic_reachability(read_network(networks["weak-first"]), ModelParams(0.3, 0.4)).symmetrized()
    target = tmp_path / "t.csv"
    np.savetxt(target, C, delimiter=",", fmt="%.17g")
    argv = ["calibrate", "--networks", str(networks["weak-first"]), "--targets", str(target)]
    assert main(argv + ["--out-dir", str(tmp_path / "one")]) == 0
    monkeypatch.setenv("MNEMOSIM_THREADS", "4")
    assert main(argv + ["--out-dir", str(tmp_path / "four")]) == 0
    assert (tmp_path / "one" / "surface.csv").read_bytes() == (tmp_path / "four" / "surface.csv").read_bytes()
