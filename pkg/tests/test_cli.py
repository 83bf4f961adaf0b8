import json
import socket

import pytest

from snakeid import synthetic
from snakeid.cli import default_classmap_path, main
from snakeid.embedstore import load_vectors, save_grids, save_vectors
from snakeid.inference import load_submission
from snakeid.manifest import load_class_index_map


@pytest.fixture
def workdir(tmp_path):
    """3-class separable grid fixture written out as pipeline input files."""
    manifest, gstore, _ = synthetic.grid_fixture(seed=3)
    paths = {
        "manifest": tmp_path / "manifest.csv",
        "grids": tmp_path / "grids.spg1",
        "features": tmp_path / "features.seb1",
        "model": tmp_path / "model.slm1",
        "classmap": tmp_path / "model.classmap.csv",
        "submission": tmp_path / "submission.csv",
        "history": tmp_path / "history.json",
        "report": tmp_path / "report.json",
        "scatter": tmp_path / "scatter.csv",
    }
    paths["manifest"].write_text(manifest.to_csv())
    save_grids(gstore, paths["grids"])
    return paths


TRAIN_FLAGS = ["--seed", "5", "--epochs", "50", "--batch-size", "8", "--lr", "0.05"]


def run_pipeline(paths, capsys=None):
    assert (
        main(
            [
                "compress",
                "--grids",
                str(paths["grids"]),
                "--features",
                str(paths["features"]),
                "--block-size",
                "4",
                "--grid-rows",
                "12",
                "--grid-cols",
                "16",
            ]
        )
        == 0
    )
    assert (
        main(
            [
                "train",
                "--manifest",
                str(paths["manifest"]),
                "--features",
                str(paths["features"]),
                "--model",
                str(paths["model"]),
                "--history",
                str(paths["history"]),
                "--feature-kind",
                "dct",
            ]
            + TRAIN_FLAGS
        )
        == 0
    )
    assert (
        main(
            [
                "predict",
                "--model",
                str(paths["model"]),
                "--classmap",
                str(paths["classmap"]),
                "--features",
                str(paths["features"]),
                "--manifest",
                str(paths["manifest"]),
                "--submission",
                str(paths["submission"]),
            ]
        )
        == 0
    )


def test_end_to_end_track1_100(workdir, capsys):
    run_pipeline(workdir)
    assert (
        main(
            [
                "evaluate",
                "--manifest",
                str(workdir["manifest"]),
                "--submission",
                str(workdir["submission"]),
                "--report",
                str(workdir["report"]),
            ]
        )
        == 0
    )
    stdout = capsys.readouterr().out
    assert '"track1"' in stdout  # report goes to stdout as well as --report
    report = json.loads(workdir["report"].read_text())
    assert report["track1"] == 100.0
    assert report["macro_f1"] == 1.0
    assert report["track2"] == 0.0
    assert report["n_observations"] == 9


def test_artifacts_byte_identical_across_runs(workdir, tmp_path):
    run_pipeline(workdir)
    first = {
        name: workdir[name].read_bytes()
        for name in ("features", "model", "classmap", "submission", "history")
    }
    run_pipeline(workdir)
    for name, data in first.items():
        assert workdir[name].read_bytes() == data, name


def test_predict_offline(workdir, monkeypatch):
    run_pipeline(workdir)

    def no_network(*args, **kwargs):
        raise AssertionError("network access attempted")

    monkeypatch.setattr(socket, "socket", no_network)
    monkeypatch.setattr(socket, "create_connection", no_network)
    out = workdir["submission"].with_name("offline.csv")
    assert (
        main(
            [
                "predict",
                "--model",
                str(workdir["model"]),
                "--classmap",
                str(workdir["classmap"]),
                "--features",
                str(workdir["features"]),
                "--manifest",
                str(workdir["manifest"]),
                "--submission",
                str(out),
            ]
        )
        == 0
    )
    assert out.read_bytes() == workdir["submission"].read_bytes()


def test_history_json_contents(workdir):
    run_pipeline(workdir)
    payload = json.loads(workdir["history"].read_text())
    assert payload["feature_kind"] == "dct"
    assert len(payload["history"]) == 50
    final = payload["history"][-1]
    assert final["val_accuracy"] == 1.0
    assert set(final) == {"epoch", "train_loss", "train_accuracy", "val_loss", "val_accuracy"}


def test_evaluate_missing_observation_fails(workdir, capsys):
    run_pipeline(workdir)
    sub = load_submission(workdir["submission"])
    clipped = "observation_id,class_id\n" + "\n".join(
        f"{o},{c}" for o, c in sub.rows[:-1]
    ) + "\n"
    workdir["submission"].write_text(clipped)
    code = main(
        [
            "evaluate",
            "--manifest",
            str(workdir["manifest"]),
            "--submission",
            str(workdir["submission"]),
        ]
    )
    assert code == 1
    assert "MissingObservation" in capsys.readouterr().err


def test_compress_validates_grid_shape(workdir, capsys):
    code = main(
        [
            "compress",
            "--grids",
            str(workdir["grids"]),
            "--features",
            str(workdir["features"]),
            "--block-size",
            "4",
            "--grid-rows",
            "256",
            "--grid-cols",
            "768",
        ]
    )
    assert code == 1
    assert "12x16" in capsys.readouterr().err


def test_missing_input_path_fails(workdir, capsys):
    code = main(
        [
            "train",
            "--manifest",
            str(workdir["manifest"]),
            "--features",
            "/nonexistent/features.seb1",
            "--model",
            str(workdir["model"]),
        ]
    )
    assert code == 1
    assert "does not exist" in capsys.readouterr().err


def test_config_file_drives_commands(workdir, tmp_path):
    cfg = tmp_path / "pipeline.cfg"
    cfg.write_text(
        "\n".join(
            [
                f"grids = {workdir['grids']}",
                f"features = {workdir['features']}",
                "block_size = 4",
                "grid_rows = 12",
                "grid_cols = 16",
            ]
        )
        + "\n"
    )
    assert main(["compress", "--config", str(cfg)]) == 0
    store = load_vectors(workdir["features"])
    assert store.dim == 16


def test_evaluate_metrics_config(workdir, tmp_path, capsys):
    run_pipeline(workdir)
    capsys.readouterr()  # drop the pipeline progress lines
    cfg = tmp_path / "metrics.cfg"
    cfg.write_text("c_v_as_h = 9.5\nw_f1 = 2\n")
    assert (
        main(
            [
                "evaluate",
                "--config",
                str(cfg),
                "--manifest",
                str(workdir["manifest"]),
                "--submission",
                str(workdir["submission"]),
            ]
        )
        == 0
    )
    report = json.loads(capsys.readouterr().out)
    assert report["costs"]["c_v_as_h"] == 9.5
    assert report["weights"]["w_f1"] == 2.0


def test_eda_scatter(workdir):
    run_pipeline(workdir)
    classes = synthetic.sparse_class_ids(3)
    assert (
        main(
            [
                "eda",
                "--features",
                str(workdir["features"]),
                "--manifest",
                str(workdir["manifest"]),
                "--scatter",
                str(workdir["scatter"]),
                "--classes",
                f"{classes[0]},{classes[1]}",
            ]
        )
        == 0
    )
    lines = workdir["scatter"].read_text().splitlines()
    assert lines[0] == "image_id,x,y,class_id,venomous"
    assert len(lines) > 1
    kept = {int(line.split(",")[3]) for line in lines[1:]}
    assert kept <= {classes[0], classes[1]}


def test_default_classmap_path():
    assert default_classmap_path("out/model.slm1") == "out/model.classmap.csv"
    assert default_classmap_path("model") == "model.classmap.csv"


def test_classmap_written_next_to_model(workdir):
    run_pipeline(workdir)
    cmap = load_class_index_map(workdir["classmap"])
    assert cmap.backward == tuple(synthetic.sparse_class_ids(3))
