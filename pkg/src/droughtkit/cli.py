"""Command-line entry points for the toolkit.

Subcommands: synth, ingest, window, train, evaluate, sweep, report,
gradcheck. All outputs land under --out-dir (default from the
DROUGHTKIT_OUT environment variable, falling back to ./runs).
"""

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import evaluation, harness, ingest, neural, synth, trees, windowing
from .errors import DroughtkitError
from .neural import checkpoint
from .windowing import WindowSpec


def _default_out():
    return os.environ.get("DROUGHTKIT_OUT", "runs")


def _add_common(parser):
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out-dir", default=None,
                        help="output directory (default: $DROUGHTKIT_OUT or ./runs)")


def _out_dir(args, name):
    base = Path(args.out_dir) if args.out_dir else Path(_default_out()) / name
    base.mkdir(parents=True, exist_ok=True)
    return base


def _model_params(args):
    params = {}
    for spec in args.param or []:
        key, _, val = spec.partition("=")
        if not _:
            raise DroughtkitError(f"bad --param {spec!r}, expected name=value")
        try:
            params[key] = json.loads(val)
        except json.JSONDecodeError:
            params[key] = val
    return params


def cmd_synth(args):
    spec = synth.SynthSpec(n_counties=args.counties, n_weeks=args.weeks,
                           seed=args.seed)
    synth.synth_generate(spec, args.out)
    print(f"wrote {args.out}: {args.counties} counties x {args.weeks} weeks "
          f"(severe fraction {synth.severe_fraction(spec):.3f})")
    return 0


def cmd_ingest(args):
    stats = ingest.IngestStats()
    weekly = ingest.ingest_csv(args.data, stats=stats)
    out = _out_dir(args, "ingest") / "weekly.csv"
    with open(out, "w") as fh:
        fh.write("fips,week_index,week_end,score,month,latitude,longitude,"
                 + ",".join(ingest.WEATHER_VARS) + "\n")
        for fips in sorted(weekly):
            for r in weekly[fips]:
                vals = ",".join(repr(r.weather[v]) for v in ingest.WEATHER_VARS)
                fh.write(f"{r.fips},{r.week_index},{r.week_end.isoformat()},"
                         f"{r.score!r},{r.month},{r.latitude},{r.longitude},"
                         f"{vals}\n")
    print(f"wrote {out}: {stats.weekly_records} weekly records for "
          f"{stats.counties} counties "
          f"({stats.dropped_partial_weeks} partial weeks dropped)")
    return 0


def cmd_window(args):
    weekly = ingest.ingest_csv(args.data)
    split = windowing.temporal_split(weekly)
    part = dict(split.splits())[args.part]
    stats = windowing.fit_normalizer(part)
    samples = windowing.windows_for_split(part, WindowSpec(args.window, args.horizon),
                                          stats)
    out = _out_dir(args, "window") / f"windows_{args.part}.csv"
    windowing.save_windows_csv(samples, out)
    print(f"wrote {out}: {len(samples)} samples "
          f"(m={args.window}, n={args.horizon}, F={windowing.N_FEATURES})")
    return 0


def cmd_train(args):
    if args.config:
        config = harness.parse_config_file(args.config)
        if args.data:
            config.dataset = args.data
    else:
        config = harness.ExperimentConfig(
            dataset=args.data, model=args.model, window=args.window,
            horizon=args.horizon, normalization=args.normalization,
            split=args.split, seed=args.seed, model_params=_model_params(args))
    out = _out_dir(args, f"train_{config.model}")
    report, _ = harness.run_experiment(config, out_dir=out)
    print(f"{config.model}: macro_f1={report.classification.macro_f1:.4f} "
          f"mse={report.regression.mse:.4f} mae={report.regression.mae:.4f}")
    print(f"artifacts in {out}")
    return 0


def cmd_evaluate(args):
    run_dir = Path(args.run_dir)
    config = harness.parse_config_file(run_dir / "manifest.txt")
    if args.data:
        config.dataset = args.data
    weekly = ingest.ingest_csv(config.dataset)
    spec, per_split = harness._split_and_window(weekly, config)
    test = per_split["test"]

    if config.model == "persistence":
        preds = trees.PersistenceModel(spec.n).predict_samples(test)
    elif config.model in ("random_forest", "gradient_boost"):
        model = trees.load_model(run_dir / "model.txt")
        preds = model.predict(np.stack([windowing.flatten(s) for s in test]))
    else:
        params = dict(config.model_params)
        if config.model == "lstm":
            model = neural.build_lstm(neural.LstmConfig(
                horizon=spec.n, n_features=windowing.N_FEATURES,
                seed=config.seed, **params))
        else:
            model = neural.build_cnn(neural.CnnConfig(
                horizon=spec.n, n_features=windowing.N_FEATURES,
                window=spec.m, seed=config.seed, **params))
        checkpoint.load_checkpoint(model, run_dir / "model.bin")
        preds = model.predict(np.stack([s.features for s in test]))

    actual = np.stack([s.labels for s in test])
    fips = np.asarray([s.fips for s in test])
    report = evaluation.build_report(fips, actual, preds)
    out = _out_dir(args, "evaluate")
    evaluation.write_report_files(report, out, extra={"model": config.model})
    print(f"{config.model}: macro_f1={report.classification.macro_f1:.4f} "
          f"mse={report.regression.mse:.4f} mae={report.regression.mae:.4f}")
    return 0


def cmd_sweep(args):
    config = harness.ExperimentConfig(
        dataset=args.data, model=args.model, seed=args.seed,
        normalization=args.normalization, model_params=_model_params(args))
    out = _out_dir(args, f"sweep_{args.model}")
    windows = [int(w) for w in args.windows.split(",")]
    horizons = [int(h) for h in args.horizons.split(",")]

    def progress(row):
        status = row.failed or f"macro_f1={row.macro_f1:.4f}"
        print(f"  m={row.window} n={row.horizon}: {status} ({row.seconds:.1f}s)")

    harness.run_sweep(config, windows, horizons, out_dir=out, progress=progress)
    print(f"wrote {out / 'sweep.csv'}")
    return 0


def cmd_report(args):
    run_dir = Path(args.run_dir)
    metrics = json.loads((run_dir / "metrics.json").read_text())
    for key in sorted(metrics):
        print(f"{key} = {metrics[key]}")
    drift = run_dir / "horizon_drift.csv"
    if drift.exists():
        print("\nhorizon drift:")
        print(drift.read_text().strip())
    return 0


def cmd_gradcheck(args):
    rng = np.random.default_rng(args.seed)
    m, f, n = 6, 4, 3
    x = rng.normal(size=(2, m, f))
    y = rng.normal(size=(2, n))
    if args.model == "lstm":
        model = neural.build_lstm(neural.LstmConfig(
            horizon=n, n_features=f, layer1_units=8, layer2_units=6,
            dropout_rate=0.0, seed=args.seed))
    elif args.model == "cnn":
        model = neural.build_cnn(neural.CnnConfig(
            horizon=n, n_features=f, window=m, filters=5, dense_units=6,
            dropout_rate=0.0, seed=args.seed))
    else:
        raise DroughtkitError(f"gradcheck supports lstm|cnn, not {args.model!r}")
    err = neural.gradient_check(model, x, y)
    print(f"{args.model} max relative gradient error: {err:.3e}")
    return 0 if err < 1e-4 else 1


def build_parser():
    parser = argparse.ArgumentParser(
        prog="droughtkit",
        description="multi-step county drought-score forecasting toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a seeded synthetic daily CSV")
    p.add_argument("--counties", type=int, default=10)
    p.add_argument("--weeks", type=int, default=500)
    p.add_argument("--out", required=True)
    _add_common(p)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("ingest", help="aggregate a daily CSV to weekly records")
    p.add_argument("--data", required=True)
    _add_common(p)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("window", help="emit windowed samples for one split")
    p.add_argument("--data", required=True)
    p.add_argument("--window", type=int, default=30)
    p.add_argument("--horizon", type=int, default=12)
    p.add_argument("--part", choices=("train", "validation", "test"),
                   default="train")
    _add_common(p)
    p.set_defaults(func=cmd_window)

    p = sub.add_parser("train", help="run one full train+evaluate experiment")
    p.add_argument("--data")
    p.add_argument("--model", choices=harness.MODEL_KINDS, default="persistence")
    p.add_argument("--window", type=int, default=30)
    p.add_argument("--horizon", type=int, default=12)
    p.add_argument("--normalization", choices=("independent", "train"),
                   default="independent")
    p.add_argument("--split", choices=("ratio", "year"), default="ratio")
    p.add_argument("--config", help="experiment config / manifest file")
    p.add_argument("--param", action="append",
                   help="model hyperparameter override, name=value")
    _add_common(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="re-evaluate a saved run's model")
    p.add_argument("--run-dir", required=True)
    p.add_argument("--data", help="override the dataset from the manifest")
    _add_common(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("sweep", help="window/horizon grid for one model")
    p.add_argument("--data", required=True)
    p.add_argument("--model", choices=harness.MODEL_KINDS, default="gradient_boost")
    p.add_argument("--windows", default="12,24,30,36,40,48,52")
    p.add_argument("--horizons", default="4,8,12,16")
    p.add_argument("--normalization", choices=("independent", "train"),
                   default="independent")
    p.add_argument("--param", action="append")
    _add_common(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("report", help="print metrics from a run directory")
    p.add_argument("--run-dir", required=True)
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("gradcheck",
                       help="finite-difference check of a network's gradients")
    p.add_argument("--model", choices=("lstm", "cnn"), default="lstm")
    _add_common(p)
    p.set_defaults(func=cmd_gradcheck)

    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if exc.code is not None else 0
    try:
        return args.func(args)
    except DroughtkitError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: FileNotFound: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
