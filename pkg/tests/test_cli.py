import json
import subprocess
import sys

import numpy as np
import pytest

from domino_growth.cli import run_command
from domino_growth.io import import_grid, read_dump
from domino_growth.weights import PeriodicWeights, save_weights


def run(tmp_path, *argv):
    return run_command(list(argv) + ["--out", str(tmp_path)])


def test_sample_aztec_is_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert run(d, "sample-aztec", "--n", "1", "--uniform", "--N", "8", "--seed", "7") == 0
    fa = (a / "aztec_N8_seed7.txt").read_bytes()
    assert fa == (b / "aztec_N8_seed7.txt").read_bytes()
    config, meta = read_dump(a / "aztec_N8_seed7.txt")
    assert meta["N"] == 8 and config.dimer_count == 72


def test_usage_errors_exit_1(tmp_path, capsys):
    assert run_command(["no-such-command"]) == 1
    assert run_command([]) == 1
    assert run(tmp_path, "sample-aztec", "--uniform", "--N", "4") == 1  # missing seed
    assert "--seed is required" in capsys.readouterr().err
    assert run(tmp_path, "speed", "--uniform", "--random-weights", "3") == 1
    assert run(tmp_path, "speed", "--weights", str(tmp_path / "missing.json")) == 1
    assert run(tmp_path, "ronkin", "--uniform", "--tol", "-1") == 1
    assert run(tmp_path, "render", "--dump", str(tmp_path / "nothing.txt")) == 1


def test_bad_config_exit_1(tmp_path):
    bad = tmp_path / "cfg.json"
    bad.write_text("{not json")
    assert run(tmp_path, "charpoly", "--uniform", "--config", str(bad)) == 1
    bad.write_text(json.dumps({"bogus": 1}))
    assert run(tmp_path, "charpoly", "--uniform", "--config", str(bad)) == 1


def test_numerical_failures_exit_2(tmp_path, capsys):
    # the speed sum is undefined at a smooth slope
    assert run(tmp_path, "speed", "--n", "2", "--random-weights", "2", "--rho", "0", "0", "--kmax", "4") == 2
    assert "numerical failure" in capsys.readouterr().err
    # the stencil around 0.85 leaves the Newton polygon
    assert run(tmp_path, "hessian", "--uniform", "--rho", "0.85", "0") == 2


def test_speed_json_at_origin(tmp_path, capsys):
    assert run(tmp_path, "speed", "--rho", "0", "0", "--uniform", "--kmax", "64", "--stdout") == 0
    out = json.loads((tmp_path / "speed.json").read_text())
    assert abs(out["v"]) < 1e-3
    assert out["method"] == "KasteleynSum" and out["truncation"]["k_max"] == 64
    assert out["error_bar"] >= 0
    assert out["provenance"]["weights_sha256"] == PeriodicWeights.uniform(1).sha256()
    assert "samples" not in out["provenance"]
    assert json.loads(capsys.readouterr().out) == out


def test_config_merge_flags_win(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"kmax": 4, "rho": [0.3, 0.2]}))
    assert run(tmp_path, "speed", "--uniform", "--config", str(cfg)) == 0
    out = json.loads((tmp_path / "speed.json").read_text())
    assert out["truncation"]["k_max"] == 4 and out["rho"] == [0.3, 0.2]
    assert run(tmp_path, "speed", "--uniform", "--config", str(cfg), "--kmax", "6") == 0
    assert json.loads((tmp_path / "speed.json").read_text())["truncation"]["k_max"] == 6


def test_classify_generic_two_periodic_weights(tmp_path):
    w = PeriodicWeights.random(2, np.random.default_rng(2))
    save_weights(w, tmp_path / "w2.json")
    assert run(tmp_path, "classify-slopes", "--weights", str(tmp_path / "w2.json")) == 0
    out = json.loads((tmp_path / "classify.json").read_text())
    assert len(out["smooth"]) == 5 and len(out["rough"]) == 0


def test_classify_uniform_is_all_rough(tmp_path):
    assert run(tmp_path, "classify-slopes", "--uniform") == 0
    out = json.loads((tmp_path / "classify.json").read_text())
    assert out["smooth"] == [] and out["rough"] == [[0, 0]]


def test_small_commands(tmp_path):
    assert run(tmp_path, "charpoly", "--uniform") == 0
    text = (tmp_path / "charpoly.txt").read_text()
    assert "# newton_polygon: [[-1, 0], [0, -1], [1, 0], [0, 1]]" in text
    assert run(tmp_path, "ronkin", "--uniform", "--grid", "1", "2", "-1", "0", "3") == 0
    meta, cols, rows = import_grid(tmp_path / "ronkin.csv")
    assert cols[:3] == ["B1", "B2", "R"] and len(rows) == 9 and meta["command"] == "ronkin"
    assert run(tmp_path, "surface-tension", "--uniform", "--rho", "0", "0", "--rho", "0.2", "0.1") == 0
    assert len(import_grid(tmp_path / "surface_tension.csv")[2]) == 2
    assert run(tmp_path, "edge-prob", "--uniform") == 0
    probs = [e["probability"] for e in json.loads((tmp_path / "edge_prob.json").read_text())["edges"]]
    assert np.allclose(probs, 0.25, atol=1e-4)
    assert run(tmp_path, "evolve-weights", "--n", "2", "--random-weights", "1", "--steps", "3") == 0
    traj = json.loads((tmp_path / "evolve.json").read_text())["trajectory"]
    assert len(traj) == 4 and traj[0]["W1"] == pytest.approx(traj[-1]["W1"], rel=1e-10)


def test_render_from_dump(tmp_path):
    assert run(tmp_path, "sample-aztec", "--uniform", "--N", "6", "--seed", "1", "--name", "t.txt") == 0
    for fmt in ("ppm", "svg"):
        assert run(tmp_path, "render", "--dump", str(tmp_path / "t.txt"), "--format", fmt) == 0
        assert (tmp_path / f"t.{fmt}").stat().st_size > 0
    corrupt = tmp_path / "bad.txt"
    corrupt.write_text("# domino-dump 1\nN 2\n")
    assert run(tmp_path, "render", "--dump", str(corrupt)) == 1


def test_shape_to_hessian_pipeline(tmp_path):
    assert run(tmp_path, "speed", "--uniform", "--method", "limit-shape", "--N", "64", "--samples", "8",
               "--seed", "3", "--rho", "0.2", "0.1") == 0
    out = json.loads((tmp_path / "speed.json").read_text())
    assert out["method"] == "LimitShape" and "x" in out
    assert out["provenance"]["samples"] == 8
    assert run(tmp_path, "hessian", "--uniform", "--shape", str(tmp_path / "shape.csv"), "--rho", "0.2", "0.1") == 0
    h = json.loads((tmp_path / "hessian.json").read_text())
    assert h["source"] == "limit-shape" and len(h["matrix"]) == 2
    # no cell of the shape can have a slope outside the Newton polygon
    assert run(tmp_path, "speed", "--uniform", "--method", "limit-shape", "--shape", str(tmp_path / "shape.csv"),
               "--rho", "0.9", "0.9") == 2


def test_fluctuations_command(tmp_path):
    assert run(tmp_path, "fluctuations", "--uniform", "--N", "16", "--runs", "50", "--seed", "2") == 0
    meta, cols, rows = import_grid(tmp_path / "fluctuations.csv")
    assert cols == ["k", "mean", "variance"] and len(rows) == 17 and rows[0][2] == 0.0
    assert json.loads((tmp_path / "fluctuations.json").read_text())["model"] in ("log", "const")
    assert run(tmp_path, "fluctuations", "--uniform", "--N", "16", "--runs", "50") == 1


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "domino_growth", "charpoly", "--uniform", "--out", str(tmp_path)],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and (tmp_path / "charpoly.txt").exists()
    proc = subprocess.run([sys.executable, "-m", "domino_growth", "bogus"], capture_output=True, text=True)
    assert proc.returncode == 1
