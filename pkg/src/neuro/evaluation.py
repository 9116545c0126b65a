"""Stratified k-fold cross-validation, metrics, and the evaluation report.

The protocol: 5 folds preserving class proportions, train on four, test on
one, rotate; report accuracy and macro-average F1 per fold and averaged.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Hashable, Mapping, Sequence

import numpy as np

from .classifiers import FeatureKind, Label, ModelFamily, ModelSpec, train
from .errors import EmptyInput, LengthMismatch, TooFewSamples

SECTION_TITLES = {
    FeatureKind.LINGUISTIC: "Linguistic Representation Modeling",
    FeatureKind.PARALINGUISTIC: "Paralinguistic Representation Modeling",
    FeatureKind.FUSED: "Fusion with Linguistic+Paralinguistic",
}

FAMILY_DISPLAY = {
    ModelFamily.SVM: "SVM",
    ModelFamily.RF: "RF",
    ModelFamily.RNN: "RNN",
    ModelFamily.CNN: "CNN",
    ModelFamily.TRANSFORMER: "Transformer",
}


@dataclass(frozen=True)
class FoldAssignment:
    """Partition of sample ids into k folds with per-class balance."""

    k: int
    fold_of: Mapping[Hashable, int]

    def members(self, fold: int) -> list:
        return [sid for sid, f in self.fold_of.items() if f == fold]


def stratified_kfold(labels: Mapping[Hashable, Label], k: int = 5,
                     seed: int = 0) -> FoldAssignment:
    """Assign each sample to one of k folds, per-class counts within 1.

    Deterministic given (labels, seed); iteration order of `labels` is the
    canonical order before shuffling.
    """
    if k < 2:
        raise ValueError(f"k must be at least 2, got {k}")
    by_class: dict[Label, list] = {Label.HC: [], Label.PT: []}
    for sid, label in labels.items():
        by_class[Label(label)].append(sid)
    rng = np.random.default_rng(seed)
    fold_of: dict[Hashable, int] = {}
    for label in (Label.HC, Label.PT):
        members = by_class[label]
        if len(members) < k:
            raise TooFewSamples(
                f"class {label.name} has {len(members)} samples; need at least {k}")
        for position, idx in enumerate(rng.permutation(len(members))):
            fold_of[members[idx]] = position % k
    return FoldAssignment(k=k, fold_of=fold_of)


def _check_pair(y_true: Sequence[Label], y_pred: Sequence[Label]) -> None:
    if len(y_true) != len(y_pred):
        raise LengthMismatch(f"{len(y_true)} true vs {len(y_pred)} predicted labels")
    if len(y_true) == 0:
        raise EmptyInput("metrics need at least one sample")


def accuracy(y_true: Sequence[Label], y_pred: Sequence[Label]) -> float:
    """Fraction of exact matches."""
    _check_pair(y_true, y_pred)
    return sum(a == b for a, b in zip(y_true, y_pred)) / len(y_true)


def macro_f1(y_true: Sequence[Label], y_pred: Sequence[Label]) -> float:
    """Unweighted mean of per-class F1 over {PT, HC}.

    A class with zero predicted and zero actual positives contributes
    F1 = 0, keeping the metric total.
    """
    _check_pair(y_true, y_pred)
    scores = []
    for cls in (Label.HC, Label.PT):
        tp = sum(t == cls and p == cls for t, p in zip(y_true, y_pred))
        fp = sum(t != cls and p == cls for t, p in zip(y_true, y_pred))
        fn = sum(t == cls and p != cls for t, p in zip(y_true, y_pred))
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        scores.append(f1)
    return float(np.mean(scores))


@dataclass
class EvalRow:
    family: ModelFamily
    feature_kind: FeatureKind
    fold_accuracy: list[float]
    fold_macro_f1: list[float]
    mean_accuracy: float
    mean_macro_f1: float


@dataclass
class EvalReport:
    k: int
    seed: int
    rows: list[EvalRow]


def evaluate_cv(features: Any, labels: Sequence[Label], spec: ModelSpec,
                folds: FoldAssignment, ids: Sequence[Hashable] | None = None) -> EvalRow:
    """Cross-validate one (family, feature_kind) configuration.

    `features` only needs row-list indexing, so tests can pass an
    instrumented wrapper; rows are gathered exactly twice per fold — the
    training gather before fit, the test gather after — which is what
    makes the no-leakage property observable.
    """
    n = len(labels)
    if ids is None:
        ids = list(range(n))
    if set(ids) != set(folds.fold_of.keys()):
        raise ValueError("fold assignment must cover exactly the dataset ids")
    fold_accuracy = []
    fold_f1 = []
    for fold in range(folds.k):
        train_pos = [p for p, sid in enumerate(ids) if folds.fold_of[sid] != fold]
        test_pos = [p for p, sid in enumerate(ids) if folds.fold_of[sid] == fold]
        X_train = np.asarray(features[train_pos], dtype=np.float64)
        y_train = [labels[p] for p in train_pos]
        try:
            model = train(spec, X_train, y_train)
        except Exception as exc:
            raise type(exc)(f"fold {fold}: {exc}") from exc
        X_test = np.asarray(features[test_pos], dtype=np.float64)
        y_test = [labels[p] for p in test_pos]
        proba = model.predict_proba_batch(X_test)
        y_pred = [Label.PT if p >= 0.5 else Label.HC for p in proba]
        fold_accuracy.append(accuracy(y_test, y_pred))
        fold_f1.append(macro_f1(y_test, y_pred))
    return EvalRow(
        family=spec.family,
        feature_kind=spec.feature_kind,
        fold_accuracy=fold_accuracy,
        fold_macro_f1=fold_f1,
        mean_accuracy=float(np.mean(fold_accuracy)),
        mean_macro_f1=float(np.mean(fold_f1)),
    )


def report_to_json(report: EvalReport) -> dict:
    return {
        "k": report.k,
        "seed": report.seed,
        "rows": [
            {
                "family": row.family.value,
                "feature_kind": row.feature_kind.value,
                "fold_accuracy": row.fold_accuracy,
                "fold_macro_f1": row.fold_macro_f1,
                "mean_accuracy": row.mean_accuracy,
                "mean_macro_f1": row.mean_macro_f1,
            }
            for row in report.rows
        ],
    }


def report_from_json(payload: dict) -> EvalReport:
    rows = [
        EvalRow(
            family=ModelFamily(r["family"]),
            feature_kind=FeatureKind(r["feature_kind"]),
            fold_accuracy=[float(v) for v in r["fold_accuracy"]],
            fold_macro_f1=[float(v) for v in r["fold_macro_f1"]],
            mean_accuracy=float(r["mean_accuracy"]),
            mean_macro_f1=float(r["mean_macro_f1"]),
        )
        for r in payload["rows"]
    ]
    return EvalReport(k=int(payload["k"]), seed=int(payload["seed"]), rows=rows)


def render_report(report: EvalReport) -> str:
    """Text table grouped into the three feature-kind sections.

    Metrics print as percentages with two decimals.
    """
    lines = [f"{'Model':<14}{'Accuracy':>10}{'F1':>10}"]
    for kind in (FeatureKind.LINGUISTIC, FeatureKind.PARALINGUISTIC, FeatureKind.FUSED):
        rows = [r for r in report.rows if r.feature_kind is kind]
        if not rows:
            continue
        lines.append(f"-- {SECTION_TITLES[kind]} --")
        for row in rows:
            lines.append(f"{FAMILY_DISPLAY[row.family]:<14}"
                         f"{row.mean_accuracy * 100:>10.2f}"
                         f"{row.mean_macro_f1 * 100:>10.2f}")
    return "\n".join(lines) + "\n"
