"""Operator entry point.

Subcommands: synth (synthetic corpus), eval (cross-validation protocol),
train (fit + store one model), predict (score one file), serve (HTTP
service). Machine-readable JSON goes to stdout; human-readable tables and
progress go to stderr. Exit codes: 0 success, 1 runtime failure, 2 usage
error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .artifacts import ModelStore
from .classifiers import FeatureKind, ModelFamily, ModelSpec, NEURAL_FAMILIES, train
from .dataset import Profile, generate_synthetic, load_manifest
from .errors import NeuroError, UnknownModel
from .evaluation import (EvalReport, evaluate_cv, render_report,
                         report_to_json, stratified_kfold)
from .pipeline import (build_feature_matrices, load_clip, predict_clip,
                       stub_backends)

ALL_FAMILIES = tuple(ModelFamily)
ALL_KINDS = (FeatureKind.LINGUISTIC, FeatureKind.PARALINGUISTIC, FeatureKind.FUSED)


def _parse_families(raw: str) -> tuple[ModelFamily, ...]:
    if raw.strip().lower() == "all":
        return ALL_FAMILIES
    families = []
    for name in raw.split(","):
        try:
            families.append(ModelFamily(name.strip().upper()))
        except ValueError:
            raise argparse.ArgumentTypeError(f"unknown family {name.strip()!r}")
    return tuple(families)


def _parse_features(raw: str) -> tuple[FeatureKind, ...]:
    if raw.strip().lower() == "all":
        return ALL_KINDS
    kinds = []
    for name in raw.split(","):
        try:
            kinds.append(FeatureKind(name.strip().upper()))
        except ValueError:
            raise argparse.ArgumentTypeError(f"unknown feature kind {name.strip()!r}")
    return tuple(kinds)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="neuro",
                                     description="Code-switched speech screening pipeline")
    sub = parser.add_subparsers(dest="command", required=True)

    p_synth = sub.add_parser("synth", help="generate a synthetic labeled corpus")
    p_synth.add_argument("--n-per-class", type=int, required=True)
    p_synth.add_argument("--profile", choices=("separable", "overlapped"), required=True)
    p_synth.add_argument("--seed", type=int, default=0)
    p_synth.add_argument("--out", type=Path, required=True)

    p_eval = sub.add_parser("eval", help="run k-fold cross-validation over a manifest")
    p_eval.add_argument("--manifest", type=Path, required=True)
    p_eval.add_argument("--families", type=_parse_families, default=ALL_FAMILIES)
    p_eval.add_argument("--features", type=_parse_features, default=ALL_KINDS)
    p_eval.add_argument("--k", type=int, default=5)
    p_eval.add_argument("--seed", type=int, default=0)
    p_eval.add_argument("--epochs", type=int, default=None,
                        help="override neural training epochs (default 50)")
    p_eval.add_argument("--out", type=Path, default=None,
                        help="also write the report JSON to this path")

    p_train = sub.add_parser("train", help="train one model and store the artifact")
    p_train.add_argument("--manifest", type=Path, required=True)
    p_train.add_argument("--family", type=str, required=True)
    p_train.add_argument("--features", type=str, required=True)
    p_train.add_argument("--seed", type=int, default=0)
    p_train.add_argument("--epochs", type=int, default=None)
    p_train.add_argument("--out", type=Path, required=True, help="model store directory")
    p_train.add_argument("--no-cv", action="store_true",
                         help="skip the 5-fold metrics attached to the artifact")

    p_predict = sub.add_parser("predict", help="predict PT/HC for one audio file")
    p_predict.add_argument("--model", type=str, default=None,
                           help="model id (default: best stored model)")
    p_predict.add_argument("--model-dir", type=Path, required=True)
    p_predict.add_argument("--audio", type=Path, required=True)

    p_serve = sub.add_parser("serve", help="run the HTTP service")
    p_serve.add_argument("--config", type=Path, default=None)
    p_serve.add_argument("--host", type=str, default="127.0.0.1")
    return parser


def _eval_report(manifest: Path, families, kinds, k: int, seed: int,
                 epochs: int | None) -> EvalReport:
    entries = load_manifest(manifest)
    t_backend, e_backend = stub_backends()
    matrices = build_feature_matrices(entries, t_backend, e_backend)
    labels_map = dict(zip(matrices.ids, matrices.labels))
    folds = stratified_kfold(labels_map, k=k, seed=seed)
    rows = []
    for kind in kinds:
        X = matrices.for_kind(kind)
        for family in families:
            hyperparams = {}
            if epochs is not None and family in NEURAL_FAMILIES:
                hyperparams["epochs"] = epochs
            spec = ModelSpec(family=family, feature_kind=kind, input_dim=X.shape[1],
                             hyperparams=hyperparams, seed=seed)
            print(f"eval: {family.value} / {kind.value} ...", file=sys.stderr)
            rows.append(evaluate_cv(X, matrices.labels, spec, folds, ids=matrices.ids))
    return EvalReport(k=k, seed=seed, rows=rows)


def _cmd_synth(args) -> int:
    corpus = generate_synthetic(args.n_per_class, Profile(args.profile.upper()),
                                args.seed, args.out)
    print(json.dumps({
        "manifest": str(corpus.manifest_path),
        "n_entries": len(corpus.entries),
        "linear_probe_accuracy": corpus.meta["linear_probe_accuracy"],
    }, indent=2))
    return 0


def _cmd_eval(args) -> int:
    report = _eval_report(args.manifest, args.families, args.features,
                          args.k, args.seed, args.epochs)
    payload = report_to_json(report)
    print(render_report(report), file=sys.stderr)
    print(json.dumps(payload, indent=2))
    if args.out is not None:
        args.out.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    return 0


def _cmd_train(args) -> int:
    family = ModelFamily(args.family.strip().upper())
    kind = FeatureKind(args.features.strip().upper())
    entries = load_manifest(args.manifest)
    t_backend, e_backend = stub_backends()
    matrices = build_feature_matrices(entries, t_backend, e_backend)
    X = matrices.for_kind(kind)
    hyperparams = {}
    if args.epochs is not None and family in NEURAL_FAMILIES:
        hyperparams["epochs"] = args.epochs
    spec = ModelSpec(family=family, feature_kind=kind, input_dim=X.shape[1],
                     hyperparams=hyperparams, seed=args.seed)

    metrics = None
    if not args.no_cv:
        labels_map = dict(zip(matrices.ids, matrices.labels))
        folds = stratified_kfold(labels_map, k=5, seed=args.seed)
        row = evaluate_cv(X, matrices.labels, spec, folds, ids=matrices.ids)
        metrics = {
            "k": 5,
            "fold_accuracy": row.fold_accuracy,
            "fold_macro_f1": row.fold_macro_f1,
            "mean_accuracy": row.mean_accuracy,
            "mean_macro_f1": row.mean_macro_f1,
        }
        print(f"cv: acc={row.mean_accuracy:.4f} f1={row.mean_macro_f1:.4f}",
              file=sys.stderr)

    model = train(spec, X, matrices.labels)
    store = ModelStore(args.out)
    model_id = store.save(model, metrics=metrics)
    print(json.dumps({"model_id": model_id,
                      "model_path": str(store.root / f"{model_id}.neuro"),
                      "family": family.value,
                      "feature_kind": kind.value,
                      "metrics": metrics}, indent=2))
    return 0


def _cmd_predict(args) -> int:
    import uuid
    from datetime import datetime, timezone

    store = ModelStore(args.model_dir)
    model_id = args.model or store.best_model_id()
    if model_id is None:
        raise UnknownModel("no models in the store; train one first")
    model = store.load(model_id)
    t_backend, e_backend = stub_backends()
    clip = load_clip(args.audio)
    outcome = predict_clip(clip, model, t_backend, e_backend)
    result = {
        "request_id": uuid.uuid4().hex,
        "label": outcome["label"],
        "probability": outcome["probability"],
        "model_id": model_id,
        "feature_kind": outcome["feature_kind"],
        "linguistic_snapshot": outcome["linguistic_snapshot"],
        "timing_ms": outcome["timing_ms"],
        "created_at": datetime.now(timezone.utc).isoformat(timespec="milliseconds"),
    }
    print(json.dumps(result, indent=2, ensure_ascii=False))
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app, load_config

    config = load_config(args.config)
    app = create_app(config)
    uvicorn.run(app, host=args.host, port=config.port)
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    if args.command == "synth" and args.n_per_class < 5:
        parser.error("--n-per-class must be at least 5")
    if args.command == "eval" and args.k < 2:
        parser.error("--k must be at least 2")

    handlers = {
        "synth": _cmd_synth,
        "eval": _cmd_eval,
        "train": _cmd_train,
        "predict": _cmd_predict,
        "serve": _cmd_serve,
    }
    stage = args.command
    try:
        return handlers[args.command](args)
    except NeuroError as exc:
        print(f"error [{stage}] {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error [{stage}] io: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
