"""End-to-end tests for the rimsa command line."""

import csv
import json

import pytest
import structlog

from rimsa.main import EXIT_DATA, EXIT_OK, EXIT_USAGE, build_parser, main

# Test logger
logger = structlog.get_logger(__name__)


@pytest.fixture(autouse=True)
def _no_env_config(monkeypatch):
    monkeypatch.delenv("RIMSA_CONFIG", raising=False)


@pytest.fixture
def config_path(tiny_experiment, tmp_path):
    path = tmp_path / "tiny.json"
    tiny_experiment.dump(path)
    return str(path)


@pytest.fixture
def dataset_path(config_path, tmp_path, capsys):
    path = tmp_path / "tiny.rmds"
    assert main(["--config", config_path, "gen-data", str(path), "--seed", "7"]) == EXIT_OK
    capsys.readouterr()
    return str(path)


@pytest.fixture
def trained(config_path, dataset_path, tmp_path, capsys):
    out_dir = tmp_path / "run"
    assert main(["--config", config_path, "train", dataset_path, str(out_dir)]) == EXIT_OK
    report = json.loads(capsys.readouterr().out)
    return out_dir, report


def test_gen_data_is_reproducible(config_path, tmp_path, capsys):
    """Test gen data is reproducible."""
    paths = [tmp_path / "a.rmds", tmp_path / "b.rmds"]
    summaries = []
    for path in paths:
        assert main(["--config", config_path, "--seed", "3", "gen-data", str(path)]) == EXIT_OK
        summaries.append(json.loads(capsys.readouterr().out))
    assert paths[0].read_bytes() == paths[1].read_bytes()

    summary = summaries[0]
    assert summaries[1] == summary
    assert (summary["n_train"], summary["n_val"], summary["n_test"]) == (8, 4, 4)
    assert summary["seed"] == 3


def test_gen_data_samples_override(config_path, tmp_path, capsys):
    """Test gen data samples override."""
    path = tmp_path / "c.rmds"
    assert main(["--config", config_path, "gen-data", str(path), "--samples", "6"]) == EXIT_OK
    assert json.loads(capsys.readouterr().out)["n_train"] == 6


def test_config_from_environment(config_path, tmp_path, monkeypatch, capsys):
    """Test config from environment."""
    monkeypatch.setenv("RIMSA_CONFIG", config_path)
    assert main(["gen-data", str(tmp_path / "d.rmds")]) == EXIT_OK


def test_missing_config(tmp_path, capsys):
    """Test missing config."""
    assert main(["gen-data", str(tmp_path / "e.rmds")]) == EXIT_DATA
    assert "RIMSA_CONFIG" in capsys.readouterr().err


def test_missing_key_is_a_data_error(tmp_path, capsys):
    """Test missing key is a data error."""
    path = tmp_path / "broken.json"
    path.write_text(json.dumps({"system": {"n_ex": 2}}))
    assert main(["--config", str(path), "gen-data", str(tmp_path / "f.rmds")]) == EXIT_DATA
    assert "missing key" in capsys.readouterr().err


@pytest.mark.parametrize(
    "argv",
    [[], ["bogus"], ["train"], ["sweep", "bandwidth", "--values", "1", "--out", "x.csv"]],
)
def test_usage_errors_exit_1(argv):
    """Test usage errors exit 1."""
    with pytest.raises(SystemExit) as excinfo:
        main(argv)
    assert excinfo.value.code == EXIT_USAGE


def test_train_writes_artifacts(trained, tiny_experiment):
    """Test train writes artifacts."""
    out_dir, report = trained
    for name in ("best.rmck", "best.rmck.json", "metrics.csv", "metrics.json"):
        assert (out_dir / name).exists(), name
    rows = list(csv.reader((out_dir / "metrics.csv").open()))
    assert len(rows) == report["epochs_run"] + 1
    assert report["epochs_run"] == tiny_experiment.training.epochs
    assert rows[0][:3] == ["epoch", "lr", "lambda_rate"]


def test_train_epochs_override(config_path, dataset_path, tmp_path, capsys):
    """Test train epochs override."""
    out_dir = tmp_path / "short"
    argv = ["--config", config_path, "train", dataset_path, str(out_dir), "--epochs", "1"]
    assert main(argv) == EXIT_OK
    assert json.loads(capsys.readouterr().out)["epochs_run"] == 1


def test_eval_random_only(config_path, dataset_path, capsys):
    """Test eval random only."""
    assert main(["--config", config_path, "eval", dataset_path, "--random-only"]) == EXIT_OK
    results = json.loads(capsys.readouterr().out)
    assert results["random"]["method"] == "random"
    assert results["random"]["samples"] == 4
    assert "model" not in results


def test_eval_checkpoint_uses_sidecar_config(trained, dataset_path, capsys):
    """Test eval checkpoint uses sidecar config."""
    out_dir, _ = trained
    argv = ["eval", dataset_path, "--checkpoint", str(out_dir / "best.rmck"), "--split", "val"]
    assert main(argv) == EXIT_OK
    results = json.loads(capsys.readouterr().out)
    assert {"random", "model", "zf_oracle", "dataset"} <= results.keys()
    assert results["split"] == "val"
    assert results["model"]["l_mse"] > 0


def test_eval_needs_checkpoint(config_path, dataset_path):
    """Test eval needs checkpoint."""
    assert main(["--config", config_path, "eval", dataset_path]) == EXIT_DATA


def test_bad_checkpoint(config_path, dataset_path, tmp_path, capsys):
    """Test bad checkpoint."""
    junk = tmp_path / "junk.rmck"
    junk.write_bytes(b"not a checkpoint")
    argv = ["--config", config_path, "eval", dataset_path, "--checkpoint", str(junk)]
    assert main(argv) == EXIT_DATA
    assert "bad checkpoint" in capsys.readouterr().err


def test_bad_dataset(config_path, tmp_path, capsys):
    """Test bad dataset."""
    junk = tmp_path / "junk.rmds"
    junk.write_bytes(b"RMDS")
    assert main(["--config", config_path, "eval", str(junk), "--random-only"]) == EXIT_DATA
    assert "bad dataset" in capsys.readouterr().err


def test_missing_dataset_file(config_path, tmp_path):
    """Test missing dataset file."""
    argv = ["--config", config_path, "eval", str(tmp_path / "none.rmds"), "--random-only"]
    assert main(argv) == EXIT_DATA


def test_sweep_writes_rows(config_path, tmp_path):
    """Test sweep writes rows."""
    out = tmp_path / "pilot.csv"
    argv = ["--config", config_path, "sweep", "pilot", "--values", "8", "12", "16"]
    assert main(argv + ["--out", str(out), "--samples", "4"]) == EXIT_OK
    rows = list(csv.reader(out.open()))
    assert rows[0] == ["axis_value", "method", "mean_rate", "mean_maxmin"]
    assert len(rows) == 1 + 3 * 3
    assert [r[0] for r in rows[1:4]] == ["8", "8", "8"]


def test_parser_accepts_seed_after_subcommand():
    """Test parser accepts seed after subcommand."""
    args = build_parser().parse_args(["gen-data", "x.rmds", "--seed", "5"])
    assert args.seed == 5
    assert build_parser().parse_args(["gen-data", "x.rmds"]).seed is None


@pytest.mark.parametrize("command", ["gen-data", "sweep"])
def test_negative_seed_is_a_data_error(config_path, tmp_path, capsys, command):
    """Test a negative --seed is reported as a config error, not a traceback."""
    out = str(tmp_path / "out")
    argv = ["gen-data", out] if command == "gen-data" else ["sweep", "pilot", "--values", "8"]
    if command == "sweep":
        argv += ["--out", out]
    assert main(["--config", str(config_path), *argv, "--seed", "-3"]) == EXIT_DATA
    assert "seed" in capsys.readouterr().err
