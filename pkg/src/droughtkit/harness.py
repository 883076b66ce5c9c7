"""End-to-end experiment orchestration and window/horizon sweeps.

A run executes ingest -> split -> normalize -> window -> consolidate ->
train -> evaluate, writes the evaluation files plus a manifest, and is
bit-for-bit reproducible from (config, seed, input file).
"""

import ast
import hashlib
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import evaluation, ingest, neural, trees, windowing
from ._kernels import BACKEND
from .errors import DegenerateSplit, DroughtkitError
from .trees import mix_seed
from .windowing import WindowSpec

MODEL_KINDS = ("persistence", "random_forest", "gradient_boost", "cnn", "lstm")


@dataclass
class ExperimentConfig:
    dataset: str
    model: str = "persistence"
    window: int = 30
    horizon: int = 12
    normalization: str = "independent"  # or "train" (fit on train, apply to all)
    split: str = "ratio"                # or "year" (2000-2014 / 2015-16 / 2017-20)
    seed: int = 0
    model_params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.model not in MODEL_KINDS:
            raise ValueError(f"unknown model {self.model!r}")
        if self.normalization not in ("independent", "train"):
            raise ValueError(f"unknown normalization mode {self.normalization!r}")
        if self.split not in ("ratio", "year"):
            raise ValueError(f"unknown split mode {self.split!r}")


@dataclass
class SweepRow:
    model: str
    window: int
    horizon: int
    macro_f1: float
    mse: float
    mae: float
    seconds: float
    failed: str = ""


def _split_and_window(weekly, config):
    spec = WindowSpec(config.window, config.horizon)
    if config.split == "year":
        split = windowing.temporal_split(weekly, year_boundaries=(2014, 2016))
    else:
        split = windowing.temporal_split(weekly)

    if config.normalization == "train":
        stats = windowing.fit_normalizer(split.train)
        per_split = {name: windowing.windows_for_split(data, spec, stats)
                     for name, data in split.splits()}
    else:
        per_split = {name: windowing.windows_for_split(
                         data, spec, windowing.fit_normalizer(data))
                     for name, data in split.splits()}
    # validation may legally be too short to window; training falls back
    # to no early stopping in that case
    for name in ("train", "test"):
        if not per_split[name]:
            raise DegenerateSplit(
                f"{name} split too short for window {spec.m} + horizon {spec.n}")
    return spec, per_split


def _stack(samples):
    x3 = np.stack([s.features for s in samples])
    y = np.stack([s.labels for s in samples])
    return x3, y


def _fit_predict(config, spec, per_split):
    """Train the configured model and predict the test split."""
    test = per_split["test"]
    params = dict(config.model_params)

    if config.model == "persistence":
        model = trees.PersistenceModel(spec.n)
        return model, model.predict_samples(test)

    x_train, y_train = _stack(per_split["train"])
    if config.model == "random_forest":
        cfg = trees.ForestConfig(seed=config.seed, **params)
        model = trees.RandomForestModel(cfg)
        model.fit(np.stack([windowing.flatten(s) for s in per_split["train"]]),
                  y_train)
        preds = model.predict(np.stack([windowing.flatten(s) for s in test]))
        return model, preds
    if config.model == "gradient_boost":
        cfg = trees.BoostConfig(seed=config.seed, **params)
        model = trees.GradientBoostModel(cfg)
        model.fit(np.stack([windowing.flatten(s) for s in per_split["train"]]),
                  y_train)
        preds = model.predict(np.stack([windowing.flatten(s) for s in test]))
        return model, preds

    if per_split["validation"]:
        x_val, y_val = _stack(per_split["validation"])
    else:
        x_val = y_val = None
    if config.model == "lstm":
        cfg = neural.LstmConfig(horizon=spec.n, n_features=windowing.N_FEATURES,
                                seed=config.seed, **params)
        model = neural.build_lstm(cfg)
    else:
        cfg = neural.CnnConfig(horizon=spec.n, n_features=windowing.N_FEATURES,
                               window=spec.m, seed=config.seed, **params)
        model = neural.build_cnn(cfg)
    history = neural.train(model, x_train, y_train, x_val, y_val)
    model.history = history
    x_test, _ = _stack(test)
    return model, model.predict(x_test)


def _sha256(path):
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def write_manifest(config, path):
    with open(path, "w") as fh:
        fh.write("droughtkit-manifest v1\n")
        fh.write(f"dataset = {config.dataset}\n")
        fh.write(f"dataset_sha256 = {_sha256(config.dataset)}\n")
        fh.write(f"model = {config.model}\n")
        fh.write(f"window = {config.window}\n")
        fh.write(f"horizon = {config.horizon}\n")
        fh.write(f"normalization = {config.normalization}\n")
        fh.write(f"split = {config.split}\n")
        fh.write(f"seed = {config.seed}\n")
        fh.write(f"kernel_backend = {BACKEND}\n")
        for key, val in sorted(config.model_params.items()):
            fh.write(f"model.{key} = {val!r}\n")


def parse_config_file(path):
    """Read the key-value experiment config format (see write_manifest).

    Lines are `key = value`; `#` starts a comment; model hyperparameters
    use the `model.<name>` prefix. Header lines are ignored.
    """
    fields = {}
    model_params = {}
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line or "=" not in line:
            continue
        key, val = (part.strip() for part in line.split("=", 1))
        if key in ("dataset_sha256", "kernel_backend"):
            continue
        try:
            parsed = ast.literal_eval(val)
        except (ValueError, SyntaxError):
            parsed = val
        if key.startswith("model."):
            model_params[key[len("model."):]] = parsed
        else:
            fields[key] = parsed
    fields["model_params"] = model_params
    return ExperimentConfig(**fields)


def run_experiment(config, out_dir=None, weekly=None):
    """Execute one full run; returns (EvaluationReport, predictions).

    When out_dir is given, writes metrics.json, the CSV tables, the
    horizon drift table, and the run manifest there. `weekly` lets a
    sweep reuse already-ingested data.
    """
    if weekly is None:
        weekly = ingest.ingest_csv(config.dataset)
    spec, per_split = _split_and_window(weekly, config)
    model, preds = _fit_predict(config, spec, per_split)

    test = per_split["test"]
    actual = np.stack([s.labels for s in test])
    fips = np.asarray([s.fips for s in test])
    report = evaluation.build_report(fips, actual, preds)

    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        evaluation.write_report_files(report, out_dir, extra={
            "model": config.model,
            "window": config.window,
            "horizon": config.horizon,
            "normalization": config.normalization,
            "seed": config.seed,
        })
        write_drift_csv(horizon_drift_report(actual, preds),
                        out_dir / "horizon_drift.csv")
        write_manifest(config, out_dir / "manifest.txt")
        if config.model in ("random_forest", "gradient_boost"):
            trees.save_model(model, out_dir / "model.txt")
            importance = trees.feature_importance(model)
            with open(out_dir / "feature_importance.csv", "w") as fh:
                fh.write("variable,importance_weight\n")
                for name, weight in importance.items():
                    fh.write(f"{name},{weight!r}\n")
        elif config.model in ("cnn", "lstm"):
            neural.checkpoint.save_checkpoint(model, out_dir / "model.bin",
                                              getattr(model, "history", None))
    return report, preds


def run_sweep(base_config, windows, horizons, out_dir=None, progress=None):
    """One experiment per (window, horizon) cell, reusing ingested data.

    Each cell derives its seed from the base seed and cell coordinates.
    Failed cells are kept as rows with a failure marker.
    """
    if not windows or not horizons:
        raise ValueError("sweep grid is empty")
    weekly = ingest.ingest_csv(base_config.dataset)
    rows = []
    for ni, n in enumerate(sorted(horizons)):
        for mi, m in enumerate(sorted(windows)):
            cell_seed = mix_seed(base_config.seed, 1000 * ni + mi)
            config = replace(base_config, window=m, horizon=n, seed=cell_seed)
            start = time.perf_counter()
            try:
                report, _ = run_experiment(config, weekly=weekly)
                rows.append(SweepRow(
                    model=config.model, window=m, horizon=n,
                    macro_f1=report.classification.macro_f1,
                    mse=report.regression.mse, mae=report.regression.mae,
                    seconds=time.perf_counter() - start))
            except DroughtkitError as exc:
                rows.append(SweepRow(
                    model=config.model, window=m, horizon=n,
                    macro_f1=float("nan"), mse=float("nan"), mae=float("nan"),
                    seconds=time.perf_counter() - start,
                    failed=f"{type(exc).__name__}: {exc}"))
            if progress is not None:
                progress(rows[-1])
    rows.sort(key=lambda r: (r.model, r.horizon, r.window))
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        write_sweep_csv(rows, out_dir / "sweep.csv")
    return rows


def write_sweep_csv(rows, path):
    with open(path, "w") as fh:
        fh.write("model,window,horizon,macro_f1,mse,mae,seconds\n")
        for r in rows:
            if r.failed:
                fh.write(f"{r.model},{r.window},{r.horizon},"
                         f"FAILED,FAILED,FAILED,{r.seconds!r}  # {r.failed}\n")
            else:
                fh.write(f"{r.model},{r.window},{r.horizon},{r.macro_f1!r},"
                         f"{r.mse!r},{r.mae!r},{r.seconds!r}\n")


def horizon_drift_report(actual, predicted):
    """Per horizon step: mean actual, mean predicted, mean |discrepancy|."""
    actual = np.asarray(actual, dtype=np.float64)
    predicted = np.asarray(predicted, dtype=np.float64)
    rows = []
    for k in range(actual.shape[1]):
        rows.append({
            "week": k + 1,
            "avg_actual": float(actual[:, k].mean()),
            "avg_predicted": float(predicted[:, k].mean()),
            "avg_discrepancy": float(np.abs(actual[:, k] - predicted[:, k]).mean()),
        })
    return rows


def write_drift_csv(rows, path):
    with open(path, "w") as fh:
        fh.write("week,avg_actual,avg_predicted,avg_discrepancy\n")
        for r in rows:
            fh.write(f"{r['week']},{r['avg_actual']!r},{r['avg_predicted']!r},"
                     f"{r['avg_discrepancy']!r}\n")
