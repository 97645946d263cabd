"""Command-line entry point.

Subcommands cover the whole pipeline: simulate, prepare, train, eval,
baseline, fingerprint, complexity, report. Every run writes a manifest next
to its outputs; deterministic subcommands reproduce byte-identical artifacts
for identical manifests.

Exit codes: 0 ok; 2 configuration problem; 3 data problem; 4 numeric failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import asdict

import numpy as np

from . import __version__
from .baselines import BaselineError, KnnModel, knn_predict, logreg_fit, logreg_predict
from .checkpoint import CheckpointError
from .complexity import MODEL_KINDS, count_ops
from .fingerprint import FingerprintError, build_map, classify_points, evaluate_fp
from .manifest import RunManifest
from .model import CobaConfig, CobaModel
from .pipeline import (
    CANONICAL_FEATURES,
    DatasetBundle,
    PipelineError,
    SplitSpec,
    ingest_csv,
    prepare_dataset,
)
from .scene import SceneError, load_scene
from .signal_model import SignalModelError
from .simulate import simulate_scene, write_csv
from .training import Metrics, TrainConfig, TrainingDiverged, evaluate, train

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_NUMERIC = 4


class CliError(Exception):
    def __init__(self, message, code):
        super().__init__(message)
        self.code = code


def _write_json(path, doc):
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)


def _parse_features(text):
    if not text:
        return None
    names = [t.strip() for t in text.split(",") if t.strip()]
    for n in names:
        if n not in CANONICAL_FEATURES:
            raise CliError(f"unknown feature '{n}'; choose from {CANONICAL_FEATURES}", EXIT_CONFIG)
    return names


def _load_bundle(path) -> DatasetBundle:
    if not os.path.isdir(path):
        raise CliError(f"dataset bundle not found: {path}", EXIT_CONFIG)
    return DatasetBundle.load(path)


def _subset_features(bundle: DatasetBundle, features):
    if features is None:
        return bundle, list(bundle.feature_names)
    missing = [f for f in features if f not in bundle.feature_names]
    if missing:
        raise CliError(f"bundle lacks features {missing}", EXIT_DATA)
    cols = [bundle.feature_names.index(f) for f in features]
    for table in bundle.splits.values():
        table.features = table.features[:, cols]
        table.feature_names = list(features)
    bundle.feature_names = list(features)
    bundle.mean = bundle.mean[cols]
    bundle.std = bundle.std[cols]
    bundle.medians = bundle.medians[cols]
    return bundle, list(features)


# -- subcommand bodies -------------------------------------------------------


def cmd_simulate(args):
    if not os.path.isfile(args.scene):
        raise CliError(f"config not found: {args.scene}", EXIT_CONFIG)
    scene = load_scene(args.scene)
    if args.seed is not None:
        scene.seed = args.seed
    manifest = RunManifest(args.out + ".manifest.json", "simulate",
                           {"scene": args.scene, "seed": scene.seed}, scene.seed,
                           inputs={"scene": args.scene})
    samples = simulate_scene(scene)
    write_csv(samples, args.out)
    manifest.finalize({"csv": args.out})
    print(f"simulate: wrote {len(samples)} samples to {args.out}")
    return EXIT_OK


def cmd_prepare(args):
    if not os.path.isfile(args.data):
        raise CliError(f"config not found: {args.data}", EXIT_CONFIG)
    features = _parse_features(args.features) or list(CANONICAL_FEATURES)
    seed = args.seed if args.seed is not None else 0
    manifest = RunManifest(os.path.join(args.out, "manifest.json"), "prepare",
                           {"data": args.data, "features": features, "seed": seed,
                            "standardize": not args.no_standardize,
                            "min_altitude": args.min_altitude},
                           seed, inputs={"data": args.data})
    table = ingest_csv(args.data, required=tuple(features) + ("class",))
    bundle = prepare_dataset(
        table,
        feature_names=features,
        split=SplitSpec(seed=seed),
        apply_standardize=not args.no_standardize,
        min_altitude=args.min_altitude,
    )
    bundle.save(args.out)
    manifest.finalize({name: os.path.join(args.out, f"{name}.csv") for name in bundle.splits}
                      | {"stats": os.path.join(args.out, "stats.json")})
    rows = {name: len(t) for name, t in bundle.splits.items()}
    print(f"prepare: splits {rows} with features {features}")
    return EXIT_OK


def _windows_or_die(bundle, split, window_len):
    try:
        return bundle.windows(split, window_len)
    except PipelineError as exc:
        raise CliError(str(exc), EXIT_DATA) from exc


def cmd_train(args):
    bundle = _load_bundle(args.bundle)
    features = _parse_features(args.features)
    bundle, feature_names = _subset_features(bundle, features)
    seed = args.seed if args.seed is not None else 0

    config = CobaConfig(
        n_features=len(feature_names),
        seq_len=args.window_len,
        cnn_channels=args.channels,
        kernel_size=args.kernel_size,
        lstm_hidden=args.hidden,
        dropout=args.dropout,
        ablation=args.ablation,
    )
    tcfg = TrainConfig(
        epochs=args.epochs,
        batch_size=args.batch_size,
        lr=args.lr,
        weight_decay=args.weight_decay,
        max_grad_norm=args.max_grad_norm,
        seed=seed,
        weighted=not args.unweighted,
    )
    os.makedirs(args.out, exist_ok=True)
    manifest = RunManifest(os.path.join(args.out, "manifest.json"), "train",
                           {"bundle": args.bundle, "model": asdict(config),
                            "train": asdict(tcfg), "features": feature_names},
                           seed, inputs={"bundle": args.bundle})

    train_set = _windows_or_die(bundle, "train", args.window_len)
    val_set = _windows_or_die(bundle, "val", args.window_len)
    test_set = _windows_or_die(bundle, "test", args.window_len)

    model = CobaModel(config, seed=seed)
    reports, _ = train(model, train_set, val_set, tcfg)

    ckpt_path = os.path.join(args.out, "checkpoint.bin")
    model.save(ckpt_path)

    epochs_path = os.path.join(args.out, "epochs.jsonl")
    with open(epochs_path, "w") as fh:
        for r in reports:
            fh.write(json.dumps(r.to_dict(), sort_keys=True) + "\n")

    curves_path = os.path.join(args.out, "curves.csv")
    with open(curves_path, "w") as fh:
        fh.write("epoch,train_loss,val_loss,val_accuracy\n")
        for r in reports:
            fh.write(f"{r.epoch},{r.train_loss!r},{r.val_loss!r},{r.val_metrics.accuracy!r}\n")

    test_metrics, test_loss = evaluate(model, *test_set)
    metrics_path = os.path.join(args.out, "metrics.json")
    _write_json(metrics_path, {
        "model": "coba" if config.ablation == "full" else "lstm_only",
        "features": feature_names,
        "test": test_metrics.to_dict(),
        "test_loss": test_loss,
    })
    manifest.finalize({"checkpoint": ckpt_path, "epochs": epochs_path,
                       "curves": curves_path, "metrics": metrics_path})
    print(f"train: test accuracy {test_metrics.accuracy:.4f} f1 {test_metrics.f1:.4f}"
          f" ({len(reports)} epochs)")
    return EXIT_OK


def cmd_eval(args):
    if not os.path.isfile(args.checkpoint):
        raise CliError(f"checkpoint not found: {args.checkpoint}", EXIT_CONFIG)
    bundle = _load_bundle(args.bundle)
    model = CobaModel.load(args.checkpoint)
    if model.config.n_features != len(bundle.feature_names):
        bundle, _ = _subset_features(bundle, bundle.feature_names[: model.config.n_features])
    seed = args.seed if args.seed is not None else 0
    out_path = args.out
    manifest = RunManifest(out_path + ".manifest.json", "eval",
                           {"checkpoint": args.checkpoint, "bundle": args.bundle,
                            "split": args.split}, seed,
                           inputs={"checkpoint": args.checkpoint, "bundle": args.bundle})
    x, y = _windows_or_die(bundle, args.split, model.config.seq_len)
    metrics, loss = evaluate(model, x, y)
    _write_json(out_path, {"model": "coba", "split": args.split,
                           "test": metrics.to_dict(), "test_loss": loss})
    manifest.finalize({"metrics": out_path})
    print(f"eval[{args.split}]: accuracy {metrics.accuracy:.4f} f1 {metrics.f1:.4f}")
    return EXIT_OK


def cmd_baseline(args):
    bundle = _load_bundle(args.bundle)
    features = _parse_features(args.features)
    bundle, feature_names = _subset_features(bundle, features)
    seed = args.seed if args.seed is not None else 0
    manifest = RunManifest(args.out + ".manifest.json", "baseline",
                           {"bundle": args.bundle, "model": args.model, "k": args.k,
                            "lr": args.lr, "epochs": args.epochs}, seed,
                           inputs={"bundle": args.bundle})
    tr, te = bundle.splits["train"], bundle.splits["test"]
    if args.model == "knn":
        model = KnnModel(tr.features, tr.labels, k=args.k)
        preds = knn_predict(model, te.features)
    else:
        model = logreg_fit(tr.features, tr.labels, lr=args.lr, epochs=args.epochs)
        preds = logreg_predict(model, te.features)
    metrics = Metrics.from_predictions(te.labels, preds)
    _write_json(args.out, {"model": args.model, "features": feature_names,
                           "test": metrics.to_dict()})
    manifest.finalize({"metrics": args.out})
    print(f"baseline[{args.model}]: accuracy {metrics.accuracy:.4f} f1 {metrics.f1:.4f}")
    return EXIT_OK


def cmd_fingerprint(args):
    bundle = _load_bundle(args.bundle)
    tr, te = bundle.splits["train"], bundle.splits["test"]
    if tr.positions is None or te.positions is None:
        raise CliError("positions required for FP (bundle has no x,y,h columns)", EXIT_DATA)
    seed = args.seed if args.seed is not None else 0
    manifest = RunManifest(args.out + ".manifest.json", "fingerprint",
                           {"bundle": args.bundle, "cell_size": args.cell_size}, seed,
                           inputs={"bundle": args.bundle})
    metrics = evaluate_fp(tr.positions, tr.labels, te.positions, te.labels,
                          cell_size=args.cell_size)
    outputs = {"metrics": args.out}
    _write_json(args.out, {"model": "fingerprint", "cell_size": args.cell_size,
                           "test": metrics.to_dict()})
    if args.export_map:
        vmap = build_map(tr.positions, tr.labels, cell_size=args.cell_size)
        with open(args.export_map, "w") as fh:
            fh.write(vmap.to_json())
        outputs["map"] = args.export_map
    manifest.finalize(outputs)
    print(f"fingerprint: accuracy {metrics.accuracy:.4f} f1 {metrics.f1:.4f}")
    return EXIT_OK


def cmd_complexity(args):
    feature_counts = [int(t) for t in args.features.split(",")]
    seed = args.seed if args.seed is not None else 0
    manifest = RunManifest(args.out + ".manifest.json", "complexity",
                           {"features": feature_counts, "n_train": args.n_train,
                            "epochs": args.epochs}, seed)
    config = CobaConfig(n_features=max(feature_counts), seq_len=args.window_len,
                        cnn_channels=args.channels, lstm_hidden=args.hidden)
    doc = {"n_train": args.n_train, "epochs": args.epochs, "models": {}}
    for kind in MODEL_KINDS:
        entries = {}
        for f in feature_counts:
            rep = count_ops(kind, f, args.n_train, epochs=args.epochs,
                            batch_size=args.batch_size, config=config)
            entries[str(f)] = rep.to_dict()
        if len(feature_counts) == 2:
            lo, hi = sorted(feature_counts)
            entries["ratios"] = {
                "training": entries[str(hi)]["training_macs"] / entries[str(lo)]["training_macs"],
                "prediction": entries[str(hi)]["prediction_macs"] / entries[str(lo)]["prediction_macs"],
            }
        doc["models"][kind] = entries
    _write_json(args.out, doc)
    manifest.finalize({"report": args.out})
    print(f"complexity: wrote {args.out}")
    return EXIT_OK


def cmd_report(args):
    rows = []
    for path in args.metrics:
        if not os.path.isfile(path):
            raise CliError(f"metrics file not found: {path}", EXIT_CONFIG)
        with open(path) as fh:
            doc = json.load(fh)
        t = doc.get("test", {})
        rows.append({
            "source": path,
            "model": doc.get("model", "?"),
            "features": ",".join(doc.get("features", [])) or "-",
            "accuracy": t.get("accuracy"),
            "precision": t.get("precision"),
            "recall": t.get("recall"),
            "f1": t.get("f1"),
        })
    header = f"{'model':12s} {'features':28s} {'acc':>8s} {'prec':>8s} {'rec':>8s} {'f1':>8s}"
    print(header)
    print("-" * len(header))
    for r in rows:
        print(f"{r['model']:12s} {r['features']:28s} "
              f"{r['accuracy']:8.4f} {r['precision']:8.4f} {r['recall']:8.4f} {r['f1']:8.4f}")
    if args.out:
        _write_json(args.out, {"rows": rows})
    return EXIT_OK


# -- argument plumbing --------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="coba",
        description="UAV airspace classification from mmWave radio measurements.",
    )
    parser.add_argument("--version", action="version", version=f"coba {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate a synthetic measurement CSV from a scene config")
    p.add_argument("--scene", required=True, help="scene config JSON")
    p.add_argument("--out", required=True, help="output CSV path")
    p.add_argument("--seed", type=int, default=None, help="override the scene seed")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("prepare", help="clean, impute, split and standardize a measurement CSV")
    p.add_argument("--data", required=True, help="input CSV")
    p.add_argument("--out", required=True, help="output bundle directory")
    p.add_argument("--features", default=None, help="comma-separated feature subset")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--no-standardize", action="store_true")
    p.add_argument("--min-altitude", type=float, default=None,
                   help="drop rows below this altitude (take-off/landing removal)")
    p.set_defaults(func=cmd_prepare)

    p = sub.add_parser("train", help="train the sequence classifier on a prepared bundle")
    p.add_argument("--bundle", required=True)
    p.add_argument("--out", required=True, help="run directory")
    p.add_argument("--features", default=None, help="train on a feature subset of the bundle")
    p.add_argument("--window-len", type=int, default=10)
    p.add_argument("--channels", type=int, default=64)
    p.add_argument("--hidden", type=int, default=64)
    p.add_argument("--kernel-size", type=int, default=3)
    p.add_argument("--dropout", type=float, default=0.3)
    p.add_argument("--ablation", choices=["full", "lstm_only"], default="full")
    p.add_argument("--epochs", type=int, default=30)
    p.add_argument("--batch-size", type=int, default=64)
    p.add_argument("--lr", type=float, default=1e-4)
    p.add_argument("--weight-decay", type=float, default=0.01)
    p.add_argument("--max-grad-norm", type=float, default=1.0)
    p.add_argument("--unweighted", action="store_true",
                   help="ablation: uniform sampling and unweighted loss")
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a saved checkpoint on a bundle split")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--bundle", required=True)
    p.add_argument("--split", choices=["train", "val", "test"], default="test")
    p.add_argument("--out", required=True, help="metrics JSON path")
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("baseline", help="run a per-sample baseline classifier")
    p.add_argument("--bundle", required=True)
    p.add_argument("--model", choices=["knn", "logreg"], required=True)
    p.add_argument("--features", default=None)
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--lr", type=float, default=0.5)
    p.add_argument("--epochs", type=int, default=300)
    p.add_argument("--out", required=True, help="metrics JSON path")
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_baseline)

    p = sub.add_parser("fingerprint", help="voxel fingerprint benchmark on positions")
    p.add_argument("--bundle", required=True)
    p.add_argument("--cell-size", type=float, default=10.0)
    p.add_argument("--export-map", default=None, help="also write the voxel map JSON")
    p.add_argument("--out", required=True, help="metrics JSON path")
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_fingerprint)

    p = sub.add_parser("complexity", help="analytic operation-count comparison")
    p.add_argument("--features", default="2,7", help="comma-separated feature counts")
    p.add_argument("--n-train", type=int, default=40000)
    p.add_argument("--epochs", type=int, default=30)
    p.add_argument("--batch-size", type=int, default=64)
    p.add_argument("--window-len", type=int, default=10)
    p.add_argument("--channels", type=int, default=64)
    p.add_argument("--hidden", type=int, default=64)
    p.add_argument("--out", required=True, help="report JSON path")
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_complexity)

    p = sub.add_parser("report", help="tabulate metrics JSON files side by side")
    p.add_argument("metrics", nargs="+", help="metrics JSON paths")
    p.add_argument("--out", default=None, help="also write the table as JSON")
    p.set_defaults(func=cmd_report)

    return parser


def _exit_code_for(exc) -> int:
    if isinstance(exc, CliError):
        return exc.code
    if isinstance(exc, (TrainingDiverged, SignalModelError)):
        return EXIT_NUMERIC
    if isinstance(exc, (PipelineError, CheckpointError, FingerprintError, BaselineError)):
        return EXIT_DATA
    return EXIT_CONFIG  # SceneError, bad JSON, bad values


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (CliError, SceneError, PipelineError, CheckpointError, FingerprintError,
            BaselineError, TrainingDiverged, SignalModelError,
            json.JSONDecodeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _exit_code_for(exc)


if __name__ == "__main__":
    sys.exit(main())
