import json
from collections import Counter

import numpy as np
import pytest

from neuro.classifiers import FeatureKind, Label, ModelFamily, ModelSpec
from neuro.errors import EmptyInput, LengthMismatch, NonFiniteInput, TooFewSamples
from neuro.evaluation import (EvalReport, EvalRow, FoldAssignment, accuracy,
                              evaluate_cv, macro_f1, render_report,
                              report_from_json, report_to_json,
                              stratified_kfold)

PT, HC = Label.PT, Label.HC


# --- brute-force oracles, independent of the implementations under test ---

def oracle_confusion(y_true, y_pred):
    counts = Counter(zip(y_true, y_pred))
    return {(t, p): counts.get((t, p), 0) for t in (PT, HC) for p in (PT, HC)}


def oracle_accuracy(y_true, y_pred):
    c = oracle_confusion(y_true, y_pred)
    return (c[(PT, PT)] + c[(HC, HC)]) / len(y_true)


def oracle_macro_f1(y_true, y_pred):
    c = oracle_confusion(y_true, y_pred)
    f1s = []
    for cls, other in ((PT, HC), (HC, PT)):
        tp = c[(cls, cls)]
        fp = c[(other, cls)]
        fn = c[(cls, other)]
        denom = 2 * tp + fp + fn
        f1s.append(2 * tp / denom if denom else 0.0)
    return sum(f1s) / 2
    # note: 2tp/(2tp+fp+fn) is an algebraic identity for 2PR/(P+R) that
    # also encodes the zero-support convention F1 = 0.


def random_label_pairs(n_pairs, rng, min_len=2, max_len=200):
    for _ in range(n_pairs):
        n = int(rng.integers(min_len, max_len + 1))
        yield ([Label(int(v)) for v in rng.integers(0, 2, n)],
               [Label(int(v)) for v in rng.integers(0, 2, n)])


# --- stratified folds ---

def labels_profile(n_pt, n_hc):
    ids = [f"pt{i}" for i in range(n_pt)] + [f"hc{i}" for i in range(n_hc)]
    return {sid: PT if sid.startswith("pt") else HC for sid in ids}


def test_paper_class_profile_fold_sizes():
    folds = stratified_kfold(labels_profile(30, 31), k=5, seed=0)
    for fold in range(5):
        members = folds.members(fold)
        pt = sum(1 for m in members if m.startswith("pt"))
        hc = len(members) - pt
        assert pt == 6
        assert hc in (6, 7)


def test_folds_partition_dataset():
    labels = labels_profile(30, 31)
    folds = stratified_kfold(labels, k=5, seed=3)
    assert set(folds.fold_of) == set(labels)
    all_members = [m for f in range(5) for m in folds.members(f)]
    assert sorted(all_members) == sorted(labels)


def test_per_class_counts_within_one():
    for n_pt, n_hc, k in [(30, 31, 5), (7, 9, 3), (11, 5, 5)]:
        folds = stratified_kfold(labels_profile(n_pt, n_hc), k=k, seed=1)
        for cls_prefix, total in (("pt", n_pt), ("hc", n_hc)):
            sizes = [sum(1 for m in folds.members(f) if m.startswith(cls_prefix))
                     for f in range(k)]
            assert max(sizes) - min(sizes) <= 1
            assert sum(sizes) == total


def test_exact_division_case():
    folds = stratified_kfold(labels_profile(5, 5), k=5, seed=0)
    for fold in range(5):
        members = folds.members(fold)
        assert len(members) == 2
        assert sum(1 for m in members if m.startswith("pt")) == 1


def test_fold_assignment_deterministic():
    labels = labels_profile(12, 13)
    a = stratified_kfold(labels, k=5, seed=42)
    b = stratified_kfold(labels, k=5, seed=42)
    assert a.fold_of == b.fold_of
    c = stratified_kfold(labels, k=5, seed=43)
    assert a.fold_of != c.fold_of


def test_too_few_samples_raises():
    with pytest.raises(TooFewSamples, match="HC"):
        stratified_kfold(labels_profile(10, 4), k=5, seed=0)


def test_k_below_two_rejected():
    with pytest.raises(ValueError):
        stratified_kfold(labels_profile(5, 5), k=1, seed=0)


# --- accuracy ---

def test_accuracy_perfect_prediction():
    y = [PT, HC, PT, HC, HC]
    assert accuracy(y, list(y)) == 1.0


def test_accuracy_total_mismatch():
    assert accuracy([PT, HC], [HC, PT]) == 0.0


def test_accuracy_worked_example():
    assert accuracy([PT, PT, HC, HC], [PT, HC, HC, HC]) == 0.75


def test_accuracy_matches_bruteforce_oracle():
    rng = np.random.default_rng(5)
    for y_true, y_pred in random_label_pairs(300, rng):
        assert abs(accuracy(y_true, y_pred) - oracle_accuracy(y_true, y_pred)) < 1e-9


def test_accuracy_errors():
    with pytest.raises(LengthMismatch):
        accuracy([PT], [PT, HC])
    with pytest.raises(EmptyInput):
        accuracy([], [])


# --- macro F1 ---

def test_macro_f1_perfect_prediction():
    y = [PT, HC, PT, HC]
    assert macro_f1(y, list(y)) == 1.0


def test_macro_f1_worked_example():
    # PT: P=2/3, R=1, F1=0.8; HC: P=1, R=1/2, F1=2/3; macro = 11/15.
    value = macro_f1([PT, PT, HC, HC], [PT, PT, PT, HC])
    assert value == pytest.approx(11 / 15, abs=1e-9)
    assert value == pytest.approx(0.733333, abs=1e-6)


def test_macro_f1_zero_support_convention():
    # Predictions never say PT and no PT exists: PT contributes F1 = 0.
    assert macro_f1([HC, HC], [HC, HC]) == pytest.approx(0.5)


def test_macro_f1_matches_bruteforce_oracle():
    rng = np.random.default_rng(6)
    for y_true, y_pred in random_label_pairs(300, rng):
        assert abs(macro_f1(y_true, y_pred) - oracle_macro_f1(y_true, y_pred)) < 1e-9


def test_macro_f1_symmetric_under_class_swap():
    rng = np.random.default_rng(7)
    swap = {PT: HC, HC: PT}
    for y_true, y_pred in random_label_pairs(100, rng):
        assert macro_f1(y_true, y_pred) == pytest.approx(
            macro_f1([swap[v] for v in y_true], [swap[v] for v in y_pred]), abs=1e-12)


def test_macro_f1_errors():
    with pytest.raises(LengthMismatch):
        macro_f1([PT], [PT, HC])
    with pytest.raises(EmptyInput):
        macro_f1([], [])


# --- evaluate_cv ---

def cluster_dataset(n_per_class=30, dim=8, gap=6.0, seed=0):
    rng = np.random.default_rng(seed)
    X = np.vstack([rng.normal(0, 1, (n_per_class, dim)),
                   rng.normal(gap, 1, (n_per_class, dim))])
    labels = [HC] * n_per_class + [PT] * n_per_class
    return X, labels


def test_evaluate_cv_separable_dataset_cnn():
    X, labels = cluster_dataset()
    folds = stratified_kfold(dict(enumerate(labels)), k=5, seed=0)
    spec = ModelSpec(family=ModelFamily.CNN, feature_kind=FeatureKind.PARALINGUISTIC,
                     input_dim=8, hyperparams={"epochs": 20}, seed=0)
    row = evaluate_cv(X, labels, spec, folds)
    assert len(row.fold_accuracy) == 5
    assert len(row.fold_macro_f1) == 5
    assert row.mean_accuracy >= 0.90
    assert row.mean_accuracy == pytest.approx(np.mean(row.fold_accuracy), abs=1e-9)
    assert row.mean_macro_f1 == pytest.approx(np.mean(row.fold_macro_f1), abs=1e-9)


def test_constant_features_give_majority_baseline():
    # RF on informationless features collapses to the class prior, which
    # our PT-at-ties rule turns into constant PT: accuracy is exactly 0.5
    # on balanced folds.
    X = np.zeros((60, 4))
    labels = [HC] * 30 + [PT] * 30
    folds = stratified_kfold(dict(enumerate(labels)), k=5, seed=1)
    spec = ModelSpec(family=ModelFamily.RF, feature_kind=FeatureKind.LINGUISTIC,
                     input_dim=4, seed=0)
    row = evaluate_cv(X, labels, spec, folds)
    assert row.mean_accuracy == pytest.approx(0.5)


def test_fold_errors_are_annotated():
    X, labels = cluster_dataset(n_per_class=10)
    X[0, 0] = np.nan
    folds = stratified_kfold(dict(enumerate(labels)), k=5, seed=0)
    spec = ModelSpec(family=ModelFamily.SVM, feature_kind=FeatureKind.LINGUISTIC,
                     input_dim=8, seed=0)
    with pytest.raises(NonFiniteInput, match=r"fold \d"):
        evaluate_cv(X, labels, spec, folds)


def test_folds_must_cover_ids():
    X, labels = cluster_dataset(n_per_class=10)
    folds = stratified_kfold(dict(enumerate(labels)), k=5, seed=0)
    with pytest.raises(ValueError, match="cover"):
        evaluate_cv(X[:-1], labels[:-1], ModelSpec(
            family=ModelFamily.SVM, feature_kind=FeatureKind.LINGUISTIC,
            input_dim=8), folds)


class RowAccessRecorder:
    """Indexable features wrapper logging every row-gather."""

    def __init__(self, X):
        self.X = X
        self.events = []

    def __getitem__(self, rows):
        self.events.append(list(rows))
        return self.X[rows]

    def __len__(self):
        return len(self.X)


def test_no_test_fold_rows_accessed_during_fit():
    X, labels = cluster_dataset(n_per_class=15)
    folds = stratified_kfold(dict(enumerate(labels)), k=5, seed=2)
    recorder = RowAccessRecorder(X)
    spec = ModelSpec(family=ModelFamily.SVM, feature_kind=FeatureKind.LINGUISTIC,
                     input_dim=8, seed=0)
    evaluate_cv(recorder, labels, spec, folds)
    # Contract: one training gather then one test gather per fold.
    assert len(recorder.events) == 2 * folds.k
    for fold in range(folds.k):
        test_rows = {i for i in range(len(labels)) if folds.fold_of[i] == fold}
        fit_gather = set(recorder.events[2 * fold])
        predict_gather = set(recorder.events[2 * fold + 1])
        assert fit_gather.isdisjoint(test_rows)
        assert predict_gather == test_rows


# --- report ---

def sample_report():
    row = EvalRow(family=ModelFamily.CNN, feature_kind=FeatureKind.PARALINGUISTIC,
                  fold_accuracy=[1.0, 0.95, 1.0, 0.975, 0.98125],
                  fold_macro_f1=[1.0, 0.93, 0.98, 0.9585, 1.0],
                  mean_accuracy=0.9813, mean_macro_f1=0.9737)
    return EvalReport(k=5, seed=7, rows=[row])


def test_render_report_formats_percentages():
    text = render_report(sample_report())
    assert "98.13" in text
    assert "97.37" in text
    assert "Paralinguistic Representation Modeling" in text
    assert "CNN" in text


def test_render_empty_report_headers_only():
    text = render_report(EvalReport(k=5, seed=0, rows=[]))
    assert "Model" in text
    assert "Accuracy" in text
    assert len(text.strip().splitlines()) == 1


def test_report_json_roundtrip():
    report = sample_report()
    payload = json.loads(json.dumps(report_to_json(report)))
    assert report_from_json(payload) == report
    assert payload["rows"][0]["family"] == "CNN"
    assert payload["k"] == 5 and payload["seed"] == 7
