"""File-to-file pipeline commands: compress, train, predict, evaluate, eda.

Single process, no hidden state, no network. Every command reads explicit
input paths and writes explicit output paths; re-running with identical
inputs and seed reproduces the output bytes exactly.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import classifier, inference, metrics, projection
from .config import PipelineConfig, build_config, load_kv
from .dct import compress_patch_grid
from .embedstore import (
    VectorStore,
    load_grids,
    load_vectors,
    save_vectors,
)
from .errors import InsufficientData, MissingFeature, ParseError, SnakeidError
from .manifest import (
    build_class_index_map,
    load_class_index_map,
    load_manifest,
    save_class_index_map,
)


def _require(cfg: PipelineConfig, command: str, *names: str) -> None:
    for name in names:
        if getattr(cfg, name) is None:
            raise ParseError(f"{command} requires --{name.replace('_', '-')} (or {name}= in config)")


def _check_inputs(*paths: str | None) -> None:
    for p in paths:
        if p is not None and not os.path.exists(p):
            raise ParseError(f"input path does not exist: {p}")


def default_classmap_path(model_path: str) -> str:
    return str(Path(model_path).with_suffix("")) + ".classmap.csv"


def default_history_path(model_path: str) -> str:
    return str(Path(model_path).with_suffix("")) + ".history.json"


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def cmd_compress(cfg: PipelineConfig) -> int:
    _require(cfg, "compress", "grids", "features")
    _check_inputs(cfg.grids)
    gstore = load_grids(cfg.grids)
    if (gstore.rows, gstore.cols) != (cfg.grid_rows, cfg.grid_cols):
        raise ParseError(
            f"grid file is {gstore.rows}x{gstore.cols}, config expects "
            f"{cfg.grid_rows}x{cfg.grid_cols} (set --grid-rows/--grid-cols)"
        )
    shape = (cfg.grid_rows, cfg.grid_cols)
    dim = cfg.block_size * cfg.block_size
    compressed = np.zeros((len(gstore), dim), dtype="float32")
    for i, g in enumerate(gstore.grids):
        compressed[i] = compress_patch_grid(g, cfg.block_size, shape)
    vstore = VectorStore(dim, gstore.image_ids.copy(), compressed)
    save_vectors(vstore, cfg.features)
    print(f"compressed {len(vstore)} grids to dim-{dim} vectors: {cfg.features}")
    return 0


def cmd_train(cfg: PipelineConfig) -> int:
    _require(cfg, "train", "manifest", "features", "model")
    _check_inputs(cfg.manifest, cfg.features)
    manifest = load_manifest(cfg.manifest)
    features = load_vectors(cfg.features)
    cmap = build_class_index_map(manifest)
    model, history = classifier.train(features, manifest, cmap, cfg.train_config())
    classifier.save_model(model, cfg.model)
    classmap_path = cfg.classmap or default_classmap_path(cfg.model)
    save_class_index_map(cmap, classmap_path)
    history_path = cfg.history or default_history_path(cfg.model)
    payload = {
        "seed": cfg.seed,
        "epochs": cfg.epochs,
        "batch_size": cfg.batch_size,
        "lr": cfg.lr,
        "val_fraction": cfg.val_fraction,
        "feature_kind": cfg.feature_kind,
        "history": [
            {
                "epoch": h.epoch,
                "train_loss": h.train_loss,
                "train_accuracy": h.train_accuracy,
                "val_loss": h.val_loss,
                "val_accuracy": h.val_accuracy,
            }
            for h in history
        ],
    }
    with open(history_path, "w", encoding="utf-8") as fh:
        fh.write(_dump_json(payload))
    last = history[-1]
    val = f"{last.val_accuracy:.4f}" if last.val_accuracy is not None else "n/a"
    print(
        f"trained {cmap.num_classes}-class model on {features.dim}-dim features: "
        f"{cfg.model} (classmap {classmap_path}, final val acc {val})"
    )
    return 0


def cmd_predict(cfg: PipelineConfig) -> int:
    _require(cfg, "predict", "model", "classmap", "features", "manifest", "submission")
    _check_inputs(cfg.model, cfg.classmap, cfg.features, cfg.manifest)
    model = classifier.load_model(cfg.model)
    cmap = load_class_index_map(cfg.classmap)
    features = load_vectors(cfg.features)
    manifest = load_manifest(cfg.manifest)
    submission = inference.predict_observations(model, features, manifest, cmap)
    inference.validate_submission(submission, cmap)
    inference.save_submission(submission, cfg.submission)
    print(f"predicted {len(submission)} observations: {cfg.submission}")
    return 0


def cmd_evaluate(cfg: PipelineConfig) -> int:
    _require(cfg, "evaluate", "manifest", "submission")
    _check_inputs(cfg.manifest, cfg.submission)
    manifest = load_manifest(cfg.manifest)
    submission = inference.load_submission(cfg.submission)
    report = metrics.metric_report(manifest, submission, cfg.cost_table(), cfg.track1_weights())
    text = _dump_json(report.to_dict())
    sys.stdout.write(text)
    if cfg.report:
        with open(cfg.report, "w", encoding="utf-8") as fh:
            fh.write(text)
    return 0


def cmd_eda(cfg: PipelineConfig) -> int:
    _require(cfg, "eda", "features", "manifest", "scatter")
    _check_inputs(cfg.features, cfg.manifest)
    features = load_vectors(cfg.features)
    manifest = load_manifest(cfg.manifest)
    keep = cfg.class_filter()
    rows = [r for r in manifest.rows if keep is None or r.class_id in keep]
    if len(rows) < 2:
        raise InsufficientData(f"only {len(rows)} images selected, need at least 2")
    for r in rows:
        if r.image_id not in features:
            raise MissingFeature(f"no feature vector for image_id {r.image_id}")
    X = np.stack([features.vector_for(r.image_id) for r in rows])
    pca = projection.fit_pca(X, k=2, seed=cfg.seed)
    coords = projection.project(pca, X)
    with open(cfg.scatter, "w", encoding="utf-8") as fh:
        fh.write(projection.export_scatter(coords, rows))
    print(f"projected {len(rows)} images to 2D: {cfg.scatter}")
    return 0


_COMMANDS = {
    "compress": cmd_compress,
    "train": cmd_train,
    "predict": cmd_predict,
    "evaluate": cmd_evaluate,
    "eda": cmd_eda,
}


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", help="key=value config file; flags override it")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="snakeid",
        description="species classification pipeline on precomputed ViT embeddings",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("compress", help="SPG1 patch grids -> SEB1 DCT vectors")
    _add_common(p)
    p.add_argument("--grids", help="input SPG1 grid file")
    p.add_argument("--features", help="output SEB1 vector file")
    p.add_argument("--block-size", dest="block_size", type=int)
    p.add_argument("--grid-rows", dest="grid_rows", type=int)
    p.add_argument("--grid-cols", dest="grid_cols", type=int)

    p = subs.add_parser("train", help="train the linear classifier")
    _add_common(p)
    p.add_argument("--manifest")
    p.add_argument("--features", help="input SEB1 vector file")
    p.add_argument("--model", help="output SLM1 model file")
    p.add_argument("--classmap", help="output class map CSV (default: next to model)")
    p.add_argument("--history", help="output per-epoch history JSON")
    p.add_argument("--seed", type=int)
    p.add_argument("--epochs", type=int)
    p.add_argument("--batch-size", dest="batch_size", type=int)
    p.add_argument("--lr", type=float)
    p.add_argument("--val-fraction", dest="val_fraction", type=float)
    p.add_argument("--feature-kind", dest="feature_kind", choices=classifier.FEATURE_KINDS)

    p = subs.add_parser("predict", help="predict test observations offline")
    _add_common(p)
    p.add_argument("--model")
    p.add_argument("--classmap")
    p.add_argument("--features")
    p.add_argument("--manifest")
    p.add_argument("--submission", help="output submission CSV")

    p = subs.add_parser("evaluate", help="score a submission against the manifest")
    _add_common(p)
    p.add_argument("--manifest")
    p.add_argument("--submission")
    p.add_argument("--report", help="also write the JSON report here")

    p = subs.add_parser("eda", help="PCA scatter export for embedding inspection")
    _add_common(p)
    p.add_argument("--features")
    p.add_argument("--manifest")
    p.add_argument("--scatter", help="output scatter CSV")
    p.add_argument("--classes", help="comma-separated class_id filter")
    p.add_argument("--seed", type=int)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {k: v for k, v in vars(args).items() if k not in ("command", "config")}
    try:
        file_values = load_kv(args.config) if args.config else None
        cfg = build_config(file_values, overrides)
        return _COMMANDS[args.command](cfg)
    except SnakeidError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
