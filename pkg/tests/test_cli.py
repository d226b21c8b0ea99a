import csv
import json
import shutil
import subprocess
import sys

import numpy as np
import pytest

from ammd.cli import main, parse_delta_range
from ammd.dataset import format_sequence
from ammd.geometry import ConfigError
from conftest import right_angle


@pytest.fixture(scope="module")
def synth(tmp_path_factory):
    d = tmp_path_factory.mktemp("synth")
    assert main(["synth", str(d), "--seed", "0"]) == 0
    return d / "manifest.json"


@pytest.fixture(scope="module")
def tiny(tmp_path_factory):
    d = tmp_path_factory.mktemp("tiny")
    assert main(["synth", str(d), "--classes", "3", "--per-class", "3", "--frames", "30", "--seed", "2"]) == 0
    return d / "manifest.json"


def seq_file(tmp_path, X, name="s.txt"):
    p = tmp_path / name
    p.write_text(format_sequence(X))
    return p


def run_json(args, tmp_path, name="out.json"):
    out = tmp_path / name
    assert main(args + ["--out", str(out)]) == 0
    return json.loads(out.read_text())


def test_decompose_collinear(tmp_path):
    p = seq_file(tmp_path, np.outer(np.arange(10.0), np.ones(45)))
    rep = run_json(["decompose", str(p), "--delta", "1.04", "--k", "1"], tmp_path)
    assert len(rep["patches"]) == 1 and rep["frames"] == 10
    assert rep["config"]["delta"] == 1.04


def test_decompose_right_angle(tmp_path):
    p = seq_file(tmp_path, right_angle(4))
    rep = run_json(["decompose", str(p), "--delta", "1.05", "--k", "1"], tmp_path)
    assert [(q["start"], q["end"]) for q in rep["patches"]] == [(1, 3), (4, 4)]
    assert rep["patches"][0]["score"] == pytest.approx((7 + 2 * np.sqrt(2)) / 9, abs=1e-9)
    assert len(rep["patches"][0]["mean"]) == 45


def test_missing_file_exit_code(tmp_path, capsys):
    assert main(["decompose", str(tmp_path / "missing.txt")]) != 0
    assert "missing.txt" in capsys.readouterr().err


def test_bad_delta(tmp_path, capsys):
    p = seq_file(tmp_path, right_angle(4))
    assert main(["decompose", str(p), "--delta", "1.0"]) == 2
    assert "delta" in capsys.readouterr().err


def test_distance_command(tmp_path):
    a = seq_file(tmp_path, right_angle(4), "a.txt")
    rep = run_json(["distance", str(a), str(a), "--k", "1", "--measure", "mpd-dtw"], tmp_path)
    assert rep["distance"] == 0.0 and rep["measure"] == "mpd-dtw"


def test_bad_measure_rejected(tmp_path):
    a = seq_file(tmp_path, right_angle(4))
    with pytest.raises(SystemExit):
        main(["distance", str(a), str(a), "--measure", "cosine-ammd"])


def test_classify_train_equals_test(tiny, tmp_path):
    rep = run_json(["classify", "--train-manifest", str(tiny), "--test-manifest", str(tiny)], tmp_path)
    assert rep["accuracy"] == 1.0
    assert rep["config"]["measure"] == "combined-ammd"


def test_classify_synthetic(synth, tmp_path):
    rep = run_json(["classify", "--manifest", str(synth), "--protocol", "loo"], tmp_path)
    assert rep["accuracy"] >= 0.95
    assert len(rep["split_accuracies"]) == 50


def test_classify_needs_protocol(tiny, capsys):
    assert main(["classify", "--manifest", str(tiny)]) == 2
    assert "--protocol" in capsys.readouterr().err


def test_classify_reproducible(tiny, tmp_path):
    args = ["classify", "--manifest", str(tiny), "--protocol", "setupA", "--reps", "3", "--seed", "9"]
    run_json(args, tmp_path, "a.json")
    run_json(args, tmp_path, "b.json")
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()
    rep = json.loads((tmp_path / "a.json").read_text())
    assert rep["config"]["seed"] == 9 and len(rep["splits"]) == 3


def test_sweep_rows(tiny, tmp_path):
    out = tmp_path / "sweep.csv"
    assert main(["sweep", "--manifest", str(tiny), "--protocol", "new-person",
                 "--delta-range", "1.02:1.06:0.02", "--out", str(out)]) == 0
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 9
    for m in ("mpd-ammd", "mdd-ammd", "combined-ammd"):
        assert [float(r["delta"]) for r in rows if r["measure"] == m] == [1.02, 1.04, 1.06]
    out2 = tmp_path / "sweep2.csv"
    main(["sweep", "--manifest", str(tiny), "--protocol", "new-person",
          "--delta-range", "1.02:1.06:0.02", "--out", str(out2)])
    assert out.read_bytes() == out2.read_bytes()


def test_sweep_k_range_and_measure(tiny, tmp_path):
    out = tmp_path / "k.csv"
    assert main(["sweep", "--manifest", str(tiny), "--protocol", "new-person", "--k-range", "1:3",
                 "--measure", "combined-dtw", "--out", str(out)]) == 0
    rows = list(csv.DictReader(out.open()))
    assert [(r["k"], r["measure"]) for r in rows] == [(str(k), "combined-dtw") for k in (1, 2, 3)]


@pytest.mark.parametrize("grid", ["1:1.5:0.1", "0.9:1.5:0.1", "1.1:1.5:0", "nonsense"])
def test_sweep_bad_grid(tiny, grid, capsys):
    assert main(["sweep", "--manifest", str(tiny), "--protocol", "new-person", "--delta-range", grid]) == 2
    assert "error" in capsys.readouterr().err


def test_delta_range_parsing():
    assert parse_delta_range("1.01:2.1:0.01")[-1] == 2.1
    assert len(parse_delta_range("1.01:2.1:0.01")) == 110
    with pytest.raises(ConfigError):
        parse_delta_range("1:2:0.1")


def test_backend_flag(tmp_path):
    p = seq_file(tmp_path, right_angle(4))
    a = run_json(["--backend", "python", "decompose", str(p), "--k", "1", "--delta", "1.05"], tmp_path, "a.json")
    b = run_json(["decompose", str(p), "--k", "1", "--delta", "1.05"], tmp_path, "b.json")
    assert a["patches"] == b["patches"]


def test_console_script(tmp_path):
    exe = shutil.which("ammd")
    cmd = [exe] if exe else [sys.executable, "-m", "ammd.cli"]
    res = subprocess.run(cmd + ["decompose", str(tmp_path / "nope.txt")], capture_output=True, text=True)
    assert res.returncode == 2 and "error" in res.stderr
    p = seq_file(tmp_path, right_angle(4))
    res = subprocess.run(cmd + ["decompose", str(p), "--k", "1", "--delta", "1.05"], capture_output=True, text=True)
    assert res.returncode == 0 and len(json.loads(res.stdout)["patches"]) == 2
