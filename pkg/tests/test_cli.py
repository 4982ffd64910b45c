import json
import math

import pytest

from antex.cli import main, parse_area, parse_int_list
from antex.tissue import dumps_genome, load_genome

from conftest import genome, motor

TINY = ["--population", "6", "--scenarios", "2", "--timesteps", "20", "--area", "4x4", "--robots", "2",
        "--workers", "1", "--quiet"]


def test_parsers():
    assert parse_area("8x6") == (8, 6)
    assert parse_int_list("1-3,6") == [1, 2, 3, 6]


def test_train_zero_generations(tmp_path, capsys):
    assert main(["train", "--generations", "0", "--out", str(tmp_path), *TINY]) == 0
    lines = (tmp_path / "metrics.csv").read_text().splitlines()
    assert len(lines) == 2 and lines[0].startswith("generation,best_fitness")
    load_genome(tmp_path / "best_genome.json")


def test_train_same_seed_same_bytes(tmp_path):
    for d in ("a", "b"):
        assert main(["train", "--generations", "2", "--seed", "7", "--out", str(tmp_path / d), *TINY]) == 0
    assert (tmp_path / "a/metrics.csv").read_bytes() == (tmp_path / "b/metrics.csv").read_bytes()


def test_train_config_rerun(tmp_path):
    assert main(["train", "--generations", "2", "--out", str(tmp_path / "a"), *TINY]) == 0
    assert main(["train", "--config", str(tmp_path / "a/config.json"), "--out", str(tmp_path / "b"),
                 "--workers", "1", "--quiet"]) == 0
    assert (tmp_path / "a/metrics.csv").read_bytes() == (tmp_path / "b/metrics.csv").read_bytes()


def test_train_bad_blueprint(tmp_path, capsys):
    bp = tmp_path / "bp.txt"
    bp.write_text("XX?\n")
    assert main(["train", "--blueprint", str(bp), "--out", str(tmp_path / "o"), *TINY]) == 2
    assert "error" in capsys.readouterr().err


def test_train_unwritable_out(tmp_path, capsys):
    f = tmp_path / "file"
    f.write_text("")
    assert main(["train", "--generations", "0", "--out", str(f / "sub"), *TINY]) == 2


def test_eval_null_genome(tmp_path, capsys):
    g = tmp_path / "g.json"
    g.write_text(dumps_genome(genome([motor(0, 0, 0)])))
    assert main(["eval", "--genome", str(g), "--scenarios", "2", "--timesteps", "30",
                 "--out", str(tmp_path / "o")]) == 0
    rep = json.loads((tmp_path / "o/eval.json").read_text())
    assert rep["mean"] == pytest.approx(math.exp(-2))


def test_eval_deterministic(capsys):
    args = ["eval", "--controller", "handcoded", "--scenarios", "1", "--seed", "3", "--timesteps", "60"]
    main(args)
    a = capsys.readouterr().out
    main(args)
    assert capsys.readouterr().out == a


def test_eval_snapshots_and_activity(tmp_path, rng):
    from antex.tissue import random_genome, save_genome
    save_genome(random_genome(rng, 60, decision_ratio=0.3), tmp_path / "g.json")
    assert main(["eval", "--genome", str(tmp_path / "g.json"), "--scenarios", "1", "--timesteps", "10",
                 "--snapshots", str(tmp_path / "snap"), "--activity", str(tmp_path / "act.txt")]) == 0
    assert (tmp_path / "snap/scenario_0.txt").read_text().startswith("# t=10")
    assert (tmp_path / "act.txt").exists()


def test_eval_malformed_genome(tmp_path, capsys):
    doc = json.loads(dumps_genome(genome([motor(0, 0, 0), motor(1, 0, 0)])))
    del doc["genes"][1]["weights"]
    (tmp_path / "g.json").write_text(json.dumps(doc))
    assert main(["eval", "--genome", str(tmp_path / "g.json")]) == 2
    assert "gene record 1" in capsys.readouterr().err


def test_sweep_rows(tmp_path):
    assert main(["sweep", "--controller", "null", "--robots-range", "1-10", "--scenarios", "1",
                 "--timesteps", "5", "--out", str(tmp_path)]) == 0
    assert len((tmp_path / "sweep.csv").read_text().splitlines()) == 11


def test_sweep_empty_range(tmp_path, capsys):
    assert main(["sweep", "--controller", "null", "--robots-range", ",", "--out", str(tmp_path)]) == 2


def test_analyze(tmp_path, capsys):
    for d in ("a", "b"):
        main(["train", "--generations", "1", "--evolve-robots", "--seed", d == "a" and "1" or "2",
              "--out", str(tmp_path / d), *TINY])
    assert main(["analyze", str(tmp_path / "a"), str(tmp_path / "b"), "--out", str(tmp_path / "s.json")]) == 0
    summary = json.loads((tmp_path / "s.json").read_text())
    assert sum(summary["n_histogram"].values()) == 2
    assert main(["analyze", str(tmp_path / "missing")]) == 2
