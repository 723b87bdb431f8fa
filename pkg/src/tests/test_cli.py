import argparse
import json
from unittest import mock

import numpy as np
import pandas as pd
import pytest

from mvtpmsvm.cli.config import load_config, resolve_settings
from mvtpmsvm.cli.main import EXIT_DATA, EXIT_NOT_CONVERGED, EXIT_OK, EXIT_USAGE, main
from mvtpmsvm.cli.persistence import MODEL_SCHEMA, load_model, model_from_dict, model_to_dict, save_model
from mvtpmsvm.data.dataset import load_dataset, save_dataset
from mvtpmsvm.data.synthetic import generate_synthetic
from mvtpmsvm.exceptions import DataParseError
from mvtpmsvm.kernel.gram import KernelSpec
from mvtpmsvm.model.classifier import train
from mvtpmsvm.model.dual import Hyperparams
from mvtpmsvm.preprocess.pipeline import ViewPreprocessor


@pytest.fixture
def synthetic_manifest(tmp_path) -> str:
    return save_dataset(generate_synthetic("synthetic3", 60, seed=1), str(tmp_path / "data"))


@pytest.fixture
def single_view_manifest(tmp_path) -> str:
    rng = np.random.default_rng(0)
    features = np.vstack([rng.normal(size=(20, 4)) + 2.0, rng.normal(size=(20, 4)) - 2.0])
    frame = pd.DataFrame(features, columns=["f1", "f2", "f3", "f4"])
    frame["kind"] = ["yes"] * 20 + ["no"] * 20
    frame.to_csv(tmp_path / "features.csv", index=False)
    manifest = {"schema": "mvtpm-manifest/1", "view_a": "features.csv", "label_column": "kind",
                "positive_label": "yes", "pca_threshold": 0.9, "name": "single"}
    (tmp_path / "single.json").write_text(json.dumps(manifest))
    return str(tmp_path / "single.json")


def test_synth_writes_requested_rows(tmp_path):
    out = tmp_path / "d"
    assert main(["synth", "--name", "synthetic3", "--n", "2000", "--seed", "7", "--out", str(out)]) == EXIT_OK
    assert len(pd.read_csv(out / "viewA.csv")) == 2000
    assert len(pd.read_csv(out / "viewB.csv")) == 2000
    assert len(pd.read_csv(out / "labels.csv")) == 2000
    assert json.loads((out / "manifest.json").read_text())["schema"] == "mvtpm-manifest/1"


def test_synth_is_byte_identical_on_rerun(tmp_path):
    for name in ("one", "two"):
        assert main(["synth", "--name", "synthetic1", "--n", "100", "--seed", "3", "--out", str(tmp_path / name)]) == 0
    for file_name in ("viewA.csv", "viewB.csv", "labels.csv", "manifest.json"):
        assert (tmp_path / "one" / file_name).read_bytes() == (tmp_path / "two" / file_name).read_bytes()


def test_synth_default_size(tmp_path):
    assert main(["synth", "--name", "synthetic1", "--out", str(tmp_path / "d")]) == EXIT_OK
    assert len(pd.read_csv(tmp_path / "d" / "labels.csv")) == 800


def test_synth_bad_name_is_usage_error(tmp_path):
    assert main(["synth", "--name", "synthetic9", "--out", str(tmp_path)]) == EXIT_USAGE


def test_synth_missing_out_is_usage_error():
    assert main(["synth", "--name", "synthetic1"]) == EXIT_USAGE


def test_version_flag_exits_ok(capsys):
    assert main(["--version"]) == EXIT_OK
    assert "mvtpmsvm" in capsys.readouterr().out


def test_train_then_predict(tmp_path, synthetic_manifest, capsys):
    model_path = str(tmp_path / "model.json")
    assert main(["train", "--manifest", synthetic_manifest, "--out", model_path, "--sigma", "0.5"]) == EXIT_OK
    output = capsys.readouterr().out
    assert "positive dual: iterations=" in output
    assert "duality_gap=" in output
    assert "training accuracy:" in output
    assert json.loads(open(model_path, encoding="utf-8").read())["schema"] == MODEL_SCHEMA

    out_csv = tmp_path / "predictions.csv"
    assert main(["predict", "--model", model_path, "--manifest", synthetic_manifest, "--out", str(out_csv)]) == 0
    predictions = pd.read_csv(out_csv, dtype={"label": str}, float_precision="round_trip")
    assert list(predictions.columns) == ["index", "f", "label"]
    assert len(predictions) == 60
    np.testing.assert_array_equal(predictions["label"] == "1", predictions["f"] < 0)
    assert "accuracy:" in capsys.readouterr().out

    model = load_model(model_path)
    dataset = load_dataset(synthetic_manifest)
    np.testing.assert_array_equal(predictions["f"].to_numpy(), model.decision_function(dataset.view_a, dataset.view_b))


def test_train_records_epsilon_default(tmp_path, synthetic_manifest):
    model_path = str(tmp_path / "model.json")
    assert main(["train", "--manifest", synthetic_manifest, "--out", model_path]) == EXIT_OK
    hp = load_model(model_path).hyperparams
    assert (hp.eps1, hp.eps2) == (0.1, 0.1)
    assert hp.kernel_a == KernelSpec("gaussian-paper", 1.0)


def test_train_missing_label_column_is_usage_error(tmp_path, synthetic_manifest):
    payload = json.loads(open(synthetic_manifest, encoding="utf-8").read())
    del payload["label_column"]
    broken = tmp_path / "data" / "broken.json"
    broken.write_text(json.dumps(payload))
    assert main(["train", "--manifest", str(broken), "--out", str(tmp_path / "m.json")]) == EXIT_USAGE


def test_train_missing_manifest_file_is_data_error(tmp_path):
    assert main(["train", "--manifest", str(tmp_path / "nope.json"), "--out", str(tmp_path / "m.json")]) == EXIT_DATA


def test_train_strict_non_convergence_exits_four(tmp_path, synthetic_manifest):
    model_path = tmp_path / "model.json"
    with mock.patch("mvtpmsvm.cli.main.save_model") as save:
        code = main(["train", "--manifest", synthetic_manifest, "--out", str(model_path),
                     "--max-iter", "1", "--tol", "1e-14", "--strict"])
    assert code == EXIT_NOT_CONVERGED
    save.assert_not_called()


def test_train_without_strict_saves_unconverged_model(tmp_path, synthetic_manifest):
    model_path = tmp_path / "model.json"
    assert main(["train", "--manifest", synthetic_manifest, "--out", str(model_path), "--max-iter", "1"]) == EXIT_OK
    assert not load_model(str(model_path)).diagnostics.converged


def test_predict_synthesizes_view_b_from_stored_basis(tmp_path, single_view_manifest):
    model_path = str(tmp_path / "model.json")
    assert main(["train", "--manifest", single_view_manifest, "--out", model_path, "--sigma", "0.3"]) == EXIT_OK
    assert load_model(model_path).preprocessor.pca is not None
    out_csv = tmp_path / "predictions.csv"
    assert main(["predict", "--model", model_path, "--manifest", single_view_manifest, "--out", str(out_csv)]) == 0
    predictions = pd.read_csv(out_csv, dtype={"label": str})
    assert (predictions["label"] == ["yes"] * 20 + ["no"] * 20).all()


def test_predict_without_view_b_or_basis_is_an_error(tmp_path, synthetic_manifest):
    model_path = str(tmp_path / "model.json")
    assert main(["train", "--manifest", synthetic_manifest, "--out", model_path]) == EXIT_OK
    unlabeled = {"schema": "mvtpm-manifest/1", "view_a": "viewA.csv"}
    path = tmp_path / "data" / "view_a_only.json"
    path.write_text(json.dumps(unlabeled))
    code = main(["predict", "--model", model_path, "--manifest", str(path), "--out", str(tmp_path / "p.csv")])
    assert code == EXIT_DATA
    assert not (tmp_path / "p.csv").exists()


def test_predict_dimension_mismatch_is_an_error(tmp_path, synthetic_manifest, single_view_manifest):
    model_path = str(tmp_path / "model.json")
    assert main(["train", "--manifest", synthetic_manifest, "--out", model_path]) == EXIT_OK
    code = main(["predict", "--model", model_path, "--manifest", single_view_manifest, "--out", str(tmp_path / "p.csv")])
    assert code == EXIT_DATA


def test_saved_model_reproduces_decision_values_bitwise(tmp_path):
    dataset = generate_synthetic("synthetic2", 80, seed=5)
    kernel = KernelSpec("gaussian-paper", 0.5)
    model = train(dataset, Hyperparams(kernel_a=kernel, kernel_b=kernel), preprocessor=ViewPreprocessor.fit(dataset))
    path = str(tmp_path / "model.json")
    save_model(model, path)
    reloaded = load_model(path)

    rng = np.random.default_rng(0)
    view_a = rng.uniform(-3.0, 3.0, size=(1000, 2))
    view_b = rng.uniform(-1.0, 3.0, size=(1000, 2))
    np.testing.assert_array_equal(reloaded.decision_function(view_a, view_b), model.decision_function(view_a, view_b))
    assert reloaded.label_map == model.label_map
    assert reloaded.hyperparams == model.hyperparams


def test_model_document_round_trips_linear_weights(linear_hyperparams, blobs):
    model = train(blobs, linear_hyperparams)
    restored = model_from_dict(json.loads(json.dumps(model_to_dict(model))))
    np.testing.assert_array_equal(restored.v1, model.v1)
    np.testing.assert_array_equal(restored.u2, model.u2)
    assert restored.label_map == {1: "pos", -1: "neg"}


def test_load_model_rejects_foreign_documents(tmp_path):
    path = tmp_path / "model.json"
    path.write_text(json.dumps({"schema": "something-else"}))
    with pytest.raises(DataParseError):
        load_model(str(path))
    path.write_text(json.dumps({"schema": MODEL_SCHEMA}))
    with pytest.raises(DataParseError):
        load_model(str(path))


def test_stats_command_identical_columns(tmp_path, capsys):
    csv = tmp_path / "acc.csv"
    csv.write_text("dataset,A,B,C\nx,0.8,0.8,0.8\ny,0.6,0.6,0.6\nz,0.9,0.9,0.9\n")
    out = tmp_path / "stats.json"
    assert main(["stats", str(csv), "--q-alpha", "2.343", "--out", str(out)]) == EXIT_OK
    report = json.loads(out.read_text())
    assert report["schema"] == "mvtpm-stats/1"
    assert report["friedman"]["chi2"] == 0.0
    assert report["average_ranks"] == {"A": 2.0, "B": 2.0, "C": 2.0}
    assert json.loads(capsys.readouterr().out) == report


def test_stats_command_malformed_csv(tmp_path):
    csv = tmp_path / "acc.csv"
    csv.write_text("dataset,A,B\nx,0.8,oops\ny,0.6,0.6\n")
    assert main(["stats", str(csv), "--q-alpha", "2.343"]) == EXIT_DATA


def test_stats_command_requires_q_alpha(tmp_path):
    csv = tmp_path / "acc.csv"
    csv.write_text("dataset,A,B\nx,0.8,0.7\ny,0.6,0.6\n")
    assert main(["stats", str(csv)]) == EXIT_USAGE


def test_benchmark_command_smoke(tmp_path, synthetic_manifest):
    report_path = tmp_path / "report.json"
    accuracy_path = tmp_path / "accuracy.csv"
    args = ["benchmark", synthetic_manifest, "--out", str(report_path), "--accuracy-csv", str(accuracy_path),
            "--grid-c1", "1", "--grid-c2", "1", "--grid-sigma", "0.5", "1", "--folds", "3", "--seed", "2"]
    assert main(args) == EXIT_OK
    report = json.loads(report_path.read_text())
    assert report["schema"] == "mvtpm-report/1"
    assert [row["status"] for row in report["rows"]] == ["ok"]
    assert list(pd.read_csv(accuracy_path, index_col=0).index) == ["synthetic3"]

    second_path = tmp_path / "report2.json"
    args[args.index(str(report_path))] = str(second_path)
    assert main(args) == EXIT_OK
    assert json.loads(second_path.read_text()) == report


def test_benchmark_command_all_failed(tmp_path):
    code = main(["benchmark", str(tmp_path / "missing.json"), "--out", str(tmp_path / "report.json"),
                 "--grid-c1", "1", "--grid-c2", "1", "--grid-sigma", "1"])
    assert code == EXIT_DATA
    assert json.loads((tmp_path / "report.json").read_text())["rows"][0]["status"] == "error"


def test_config_file_fills_unset_flags(tmp_path, synthetic_manifest):
    config = tmp_path / "config.json"
    config.write_text(json.dumps({"c1": 0.5, "sigma": 2.0, "epsilon": 0.2}))
    model_path = str(tmp_path / "model.json")
    assert main(["--config", str(config), "train", "--manifest", synthetic_manifest, "--out", model_path,
                 "--sigma", "0.25"]) == EXIT_OK
    hp = load_model(model_path).hyperparams
    assert hp.C1 == 0.5
    assert hp.eps1 == 0.2
    assert hp.kernel_a.sigma == 0.25


def test_resolve_settings_precedence():
    args = argparse.Namespace(a=1, b=None, c=None, d=[])
    settings = resolve_settings(args, {"b": 2, "c": 3, "d": [4], "unused": 0}, {"a": 9, "b": 9, "c": 9, "d": [9], "e": 5})
    assert settings == {"a": 1, "b": 2, "c": 3, "d": [4], "e": 5}


def test_load_config_rejects_non_objects(tmp_path):
    path = tmp_path / "config.json"
    path.write_text("[1, 2]")
    with pytest.raises(DataParseError):
        load_config(str(path))
    path.write_text("{broken")
    with pytest.raises(DataParseError):
        load_config(str(path))
