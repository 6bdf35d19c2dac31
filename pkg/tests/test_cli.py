import json
import os

import numpy as np
import pytest
from PIL import Image

from conftest import disk
from ldf.cli import main


def _png(path, arr):
    Image.fromarray(np.round(np.asarray(arr, float) * 255).astype(np.uint8)).save(path)


@pytest.fixture
def gt_dir(tmp_path):
    d = tmp_path / "gt"
    d.mkdir()
    for i in range(3):
        _png(d / f"img{i}.png", disk(24, 12, 10 + i, 6))
    return d


def test_decouple(tmp_path, gt_dir):
    out = tmp_path / "labels"
    assert main(["decouple", "--gt", str(gt_dir), "--out", str(out)]) == 0
    assert len(os.listdir(out)) == 6


def test_decouple_usage_errors(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["decouple", "--out", "x"])
    assert exc.value.code == 2
    assert "usage" in capsys.readouterr().err
    with pytest.raises(SystemExit) as exc:
        main(["decouple", "--gt", "a", "--out", "b", "--bogus"])
    assert exc.value.code == 2


def test_decouple_empty_dir(tmp_path, capsys):
    (tmp_path / "empty").mkdir()
    assert main(["decouple", "--gt", str(tmp_path / "empty"), "--out", str(tmp_path / "o")]) == 1
    assert "no masks found" in capsys.readouterr().err


def test_eval_self(tmp_path, gt_dir):
    csv_out = tmp_path / "r.csv"
    json_out = tmp_path / "r.json"
    assert main(["eval", "--pred", str(gt_dir), "--gt", str(gt_dir), "--out", str(csv_out)]) == 0
    assert main(["eval", "--pred", str(gt_dir), "--gt", str(gt_dir), "--out", str(json_out),
                 "--report", "json"]) == 0
    last = csv_out.read_text().splitlines()[-1].split(",")
    assert last[0] == "mean" and [float(v) for v in last[1:]] == [0.0, 1.0, 1.0]
    assert json.loads(json_out.read_text())["mean"] == {"mae": 0.0, "mF": 1.0, "E": 1.0}
    assert (tmp_path / "r.curves.csv").exists()


def test_eval_formats_agree(tmp_path, gt_dir, rng):
    pred = tmp_path / "pred"
    pred.mkdir()
    for i in range(3):
        _png(pred / f"img{i}.png", rng.random((24, 24)))
    args = ["eval", "--pred", str(pred), "--gt", str(gt_dir)]
    assert main(args + ["--out", str(tmp_path / "a.csv")]) == 0
    assert main(args + ["--out", str(tmp_path / "a.json"), "--report", "json"]) == 0
    rows = (tmp_path / "a.csv").read_text().splitlines()[1:-1]
    doc = json.loads((tmp_path / "a.json").read_text())["images"]
    for row, item in zip(rows, doc):
        assert [float(v) for v in row.split(",")[1:]] == [item["mae"], item["mF"], item["E"]]


def test_eval_size_mismatch(tmp_path, gt_dir, capsys):
    pred = tmp_path / "pred"
    pred.mkdir()
    _png(pred / "img1.png", np.zeros((10, 10)))
    out = tmp_path / "r.csv"
    assert main(["eval", "--pred", str(pred), "--gt", str(gt_dir), "--out", str(out)]) == 1
    assert "img1.png" in capsys.readouterr().err
    assert not out.exists()


def test_errdist(tmp_path, gt_dir, caplog):
    _png(gt_dir / "flat.png", np.ones((24, 24)))
    out = tmp_path / "h.csv"
    assert main(["errdist", "--pred", str(gt_dir), "--gt", str(gt_dir), "--out", str(out)]) == 0
    assert any("flat.png" in r.message for r in caplog.records)
    rows = out.read_text().splitlines()[1:]
    assert len(rows) == 20
    assert all(r.split(",")[3] in ("", "0.0") for r in rows)
    band = (tmp_path / "h.edgeband.csv").read_text().splitlines()[1:]
    assert len(band) == 3 and all(r.endswith(",0.0,0.0") for r in band)


def test_errdist_single_bin_is_mae(tmp_path, gt_dir, rng):
    pred = tmp_path / "pred"
    pred.mkdir()
    for i in range(3):
        _png(pred / f"img{i}.png", rng.random((24, 24)))
    _png(pred / "flat.png", rng.random((24, 24)))
    _png(gt_dir / "flat.png", np.zeros((24, 24)))
    out = tmp_path / "h.csv"
    assert main(["errdist", "--pred", str(pred), "--gt", str(gt_dir), "--bins", "1",
                 "--out", str(out)]) == 0
    mean_error = float(out.read_text().splitlines()[1].split(",")[3])
    os.remove(pred / "flat.png")
    assert main(["eval", "--pred", str(pred), "--gt", str(gt_dir), "--out",
                 str(tmp_path / "e.csv")]) == 0
    dataset_mae = float((tmp_path / "e.csv").read_text().splitlines()[-1].split(",")[1])
    assert mean_error == pytest.approx(dataset_mae, rel=1e-12)


def test_synth_and_train_deterministic(tmp_path):
    for run in ("a", "b"):
        assert main(["synth", "--n", "6", "--size", "16", "--seed", "7",
                     "--out", str(tmp_path / run / "data")]) == 0
        assert main(["train", "--data", str(tmp_path / run / "data"), "--steps", "5",
                     "--batch", "2", "--out", str(tmp_path / run / "model")]) == 0
    for rel in ("data/images/0003.png", "data/masks/0005.png", "model/checkpoint.ldft",
                "model/loss_log.csv"):
        assert (tmp_path / "a" / rel).read_bytes() == (tmp_path / "b" / rel).read_bytes()
    assert len(os.listdir(tmp_path / "a" / "data" / "images")) == 6


def test_synth_rejects_bad_size():
    with pytest.raises(SystemExit) as exc:
        main(["synth", "--size", "20", "--out", "x"])
    assert exc.value.code == 2


def test_gradcheck_command(capsys):
    assert main(["gradcheck", "--params", "30"]) == 0
    assert "max relative error" in capsys.readouterr().out
    assert main(["gradcheck", "--params", "10", "--tol", "1e-12"]) == 1


def test_jobs_env_fallback(monkeypatch, tmp_path, gt_dir):
    monkeypatch.setenv("LDF_JOBS", "3")
    from ldf.cli import build_parser
    args = build_parser().parse_args(["decouple", "--gt", "a", "--out", "b"])
    assert args.jobs == 3
