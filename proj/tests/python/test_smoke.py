import os
import subprocess

import pytest

import hetgnn

SMALL = {"fanouts": [5, 5], "batch_size": 64, "hidden_dim": 16, "epochs": 2, "seed": 3}


@pytest.fixture(scope="module")
def sbm():
    return hetgnn.load("sbm1k")


def test_dataset_shape(sbm):
    assert sbm.num_vertices == 1000
    assert sbm.num_classes == 4
    assert sbm.feat_dim == 32
    assert len(sbm.degrees()) == 1000
    assert sum(sbm.degrees()) == sbm.num_edges


def test_train_is_deterministic(sbm):
    a = hetgnn.train(sbm, SMALL)
    b = hetgnn.train(sbm, SMALL)
    assert [e["mean_loss"] for e in a["epochs"]] == [e["mean_loss"] for e in b["epochs"]]
    assert a["max_gap"] <= a["staleness_bound"]
    assert a["epochs"][-1]["mean_loss"] < a["epochs"][0]["mean_loss"]


def test_pipelined_matches_serial(sbm):
    serial = hetgnn.train(sbm, SMALL)
    piped = hetgnn.train(sbm, dict(SMALL, pipelined=True))
    assert [e["mean_loss"] for e in piped["epochs"]] == [e["mean_loss"] for e in serial["epochs"]]


def test_simulate_all_strategies(sbm):
    for s in hetgnn.STRATEGIES:
        r = hetgnn.simulate(sbm, SMALL, s, cache_fraction=0.1)
        assert r["strategy"] == s
        assert r["pipelined"]["makespan"] > 0
        assert r["pipelined"]["makespan"] <= r["serialized"]["makespan"] + 1e-12


def test_hotness_rank_is_sorted(sbm):
    counts, rank = hetgnn.hotness(sbm, SMALL)
    assert sorted(rank) == list(range(sbm.num_vertices))
    ordered = [counts[v] for v in rank]
    assert ordered == sorted(ordered, reverse=True)


def test_compare_cache_zero_budget(sbm):
    pts = hetgnn.compare_cache(sbm, SMALL, [0.0])
    assert {p["policy"] for p in pts} == {"degree", "presample", "hybrid"}
    static = [p["data_bytes"] for p in pts if p["policy"] != "hybrid"]
    assert static[0] == static[1]


def test_bad_config_raises(sbm):
    with pytest.raises(ValueError):
        hetgnn.train(sbm, {"batch_size": 0})
    with pytest.raises(ValueError):
        hetgnn.train(sbm, {"no_such_key": 1})


@pytest.mark.skipif("HETGNN_CLI" not in os.environ, reason="CLI path not provided")
def test_cli_exit_codes(tmp_path):
    cli = os.environ["HETGNN_CLI"]
    ok = subprocess.run([cli, "--out-dir", str(tmp_path), "hotness", "--dataset", "sbm1k"], capture_output=True)
    assert ok.returncode == 0
    assert (tmp_path / "hotness.csv").exists()
    bad = subprocess.run([cli, "train", "--batch-size", "0"], capture_output=True)
    assert bad.returncode == 2
