import dataclasses

import numpy as np
import pytest

from droughtkit import harness, ingest, synth
from droughtkit.harness import (ExperimentConfig, horizon_drift_report,
                                parse_config_file, run_experiment, run_sweep,
                                write_manifest)


@pytest.fixture(scope="module")
def tiny_csv(tmp_path_factory):
    path = tmp_path_factory.mktemp("harness") / "tiny.csv"
    synth.synth_generate(synth.SynthSpec(n_counties=3, n_weeks=120, seed=7), path)
    return str(path)


@pytest.fixture(scope="module")
def tiny_weekly(tiny_csv):
    return ingest.ingest_csv(tiny_csv)


class TestConfig:
    def test_rejects_unknown_model(self, tiny_csv):
        with pytest.raises(ValueError):
            ExperimentConfig(dataset=tiny_csv, model="xgboost")

    def test_rejects_unknown_normalization(self, tiny_csv):
        with pytest.raises(ValueError):
            ExperimentConfig(dataset=tiny_csv, normalization="global")

    def test_rejects_unknown_split(self, tiny_csv):
        with pytest.raises(ValueError):
            ExperimentConfig(dataset=tiny_csv, split="random")


class TestManifestRoundTrip:
    def test_parse_recovers_config(self, tiny_csv, tmp_path):
        config = ExperimentConfig(
            dataset=tiny_csv, model="gradient_boost", window=8, horizon=2,
            normalization="train", seed=42,
            model_params={"n_trees": 5, "learning_rate": 0.2})
        path = tmp_path / "manifest.txt"
        write_manifest(config, path)
        parsed = parse_config_file(path)
        assert parsed == config

    def test_manifest_pins_dataset_hash(self, tiny_csv, tmp_path):
        config = ExperimentConfig(dataset=tiny_csv)
        write_manifest(config, tmp_path / "m.txt")
        text = (tmp_path / "m.txt").read_text()
        assert "dataset_sha256 = " in text
        assert "kernel_backend = " in text

    def test_comments_and_blank_lines_ignored(self, tiny_csv, tmp_path):
        path = tmp_path / "config.txt"
        path.write_text(
            f"# an experiment\n\ndataset = {tiny_csv!r}\n"
            "model = 'persistence'  # baseline\nwindow = 4\nhorizon = 2\n")
        config = parse_config_file(path)
        assert config.model == "persistence"
        assert (config.window, config.horizon) == (4, 2)


class TestRunExperiment:
    def test_persistence_writes_artifacts(self, tiny_csv, tiny_weekly, tmp_path):
        config = ExperimentConfig(dataset=tiny_csv, window=4, horizon=2)
        report, preds = run_experiment(config, out_dir=tmp_path,
                                       weekly=tiny_weekly)
        for name in ("metrics.json", "classification_report.csv",
                     "category_analysis.csv", "county_metrics.csv",
                     "horizon_drift.csv", "manifest.txt"):
            assert (tmp_path / name).exists(), name
        assert preds.shape[1] == 2
        assert np.isfinite(report.regression.mae)

    def test_persistence_prediction_count(self, tiny_csv, tiny_weekly):
        config = ExperimentConfig(dataset=tiny_csv, window=4, horizon=2)
        _, preds = run_experiment(config, weekly=tiny_weekly)
        # 120 weeks -> test split has 24 weeks per county -> 24-4-2+1 windows
        assert preds.shape == (3 * 19, 2)

    def test_bit_identical_reruns(self, tiny_csv, tiny_weekly, tmp_path):
        config = ExperimentConfig(
            dataset=tiny_csv, model="gradient_boost", window=4, horizon=2,
            seed=5, model_params={"n_estimators": 3})
        dirs = [tmp_path / "a", tmp_path / "b"]
        for d in dirs:
            run_experiment(config, out_dir=d, weekly=tiny_weekly)
        for name in ("metrics.json", "model.txt", "feature_importance.csv",
                     "horizon_drift.csv"):
            assert ((dirs[0] / name).read_bytes()
                    == (dirs[1] / name).read_bytes()), name

    def test_forest_saves_model_and_importance(self, tiny_csv, tiny_weekly,
                                               tmp_path):
        config = ExperimentConfig(
            dataset=tiny_csv, model="random_forest", window=4, horizon=1,
            model_params={"n_trees": 4, "max_depth": 2})
        run_experiment(config, out_dir=tmp_path, weekly=tiny_weekly)
        assert (tmp_path / "model.txt").exists()
        lines = (tmp_path / "feature_importance.csv").read_text().splitlines()
        assert lines[0] == "variable,importance_weight"
        weights = [float(l.split(",")[1]) for l in lines[1:]]
        assert len(weights) == 22
        assert sum(weights) == pytest.approx(1.0)
        # stable descending order
        assert weights == sorted(weights, reverse=True)

    def test_lstm_saves_checkpoint(self, tiny_csv, tiny_weekly, tmp_path):
        config = ExperimentConfig(
            dataset=tiny_csv, model="lstm", window=4, horizon=1,
            model_params={"layer1_units": 6, "layer2_units": 4, "epochs": 1})
        run_experiment(config, out_dir=tmp_path, weekly=tiny_weekly)
        assert (tmp_path / "model.bin").exists()
        assert (tmp_path / "model.bin.manifest").exists()

    def test_train_normalization_mode_runs(self, tiny_csv, tiny_weekly):
        config = ExperimentConfig(dataset=tiny_csv, window=4, horizon=2,
                                  normalization="train")
        report, _ = run_experiment(config, weekly=tiny_weekly)
        assert np.isfinite(report.regression.mse)


class TestSweep:
    def test_row_count_and_order(self, tiny_csv):
        config = ExperimentConfig(dataset=tiny_csv, model="persistence")
        rows = run_sweep(config, windows=[4, 8], horizons=[1, 2])
        assert len(rows) == 4
        assert [(r.horizon, r.window) for r in rows] == [
            (1, 4), (1, 8), (2, 4), (2, 8)]
        assert all(not r.failed for r in rows)

    def test_failure_marker_for_oversized_window(self, tiny_csv, tmp_path):
        config = ExperimentConfig(dataset=tiny_csv, model="persistence")
        # 120 weeks -> 84-week train split; window 90 cannot fit
        rows = run_sweep(config, windows=[4, 90], horizons=[1],
                         out_dir=tmp_path)
        failed = [r for r in rows if r.failed]
        assert len(failed) == 1
        assert failed[0].window == 90
        assert "DegenerateSplit" in failed[0].failed
        assert np.isnan(failed[0].macro_f1)
        text = (tmp_path / "sweep.csv").read_text()
        assert "FAILED" in text

    def test_empty_grid_rejected(self, tiny_csv):
        config = ExperimentConfig(dataset=tiny_csv)
        with pytest.raises(ValueError):
            run_sweep(config, windows=[], horizons=[1])

    def test_cell_seeds_differ(self, tiny_csv, monkeypatch):
        seeds = []
        real = harness.run_experiment

        def spy(config, out_dir=None, weekly=None):
            seeds.append(config.seed)
            return real(config, out_dir=out_dir, weekly=weekly)

        monkeypatch.setattr(harness, "run_experiment", spy)
        config = ExperimentConfig(dataset=tiny_csv, model="persistence")
        run_sweep(config, windows=[4, 8], horizons=[1, 2])
        assert len(set(seeds)) == 4


class TestHorizonDrift:
    def test_shape_and_values(self):
        actual = np.array([[1.0, 2.0], [3.0, 4.0]])
        predicted = np.array([[1.0, 1.0], [3.0, 3.0]])
        rows = horizon_drift_report(actual, predicted)
        assert [r["week"] for r in rows] == [1, 2]
        assert rows[0]["avg_discrepancy"] == 0.0
        assert rows[1]["avg_actual"] == 3.0
        assert rows[1]["avg_predicted"] == 2.0
        assert rows[1]["avg_discrepancy"] == 1.0

    def test_persistence_drift_grows_with_horizon(self, tiny_csv, tiny_weekly):
        config = ExperimentConfig(dataset=tiny_csv, window=4, horizon=8)
        _, preds = run_experiment(config, weekly=tiny_weekly)
        spec, per_split = harness._split_and_window(tiny_weekly, config)
        actual = np.stack([s.labels for s in per_split["test"]])
        rows = horizon_drift_report(actual, preds)
        # mean AR(1) reversion: week-8 discrepancy should exceed week-1
        assert rows[-1]["avg_discrepancy"] > rows[0]["avg_discrepancy"]

    def test_replace_keeps_config_frozenness_semantics(self, tiny_csv):
        config = ExperimentConfig(dataset=tiny_csv, window=4)
        other = dataclasses.replace(config, window=8)
        assert config.window == 4 and other.window == 8
