"""Acceptance suite: one test per release criterion, at pinned tolerances.

Each test prints a PASS/FAIL line (visible with `pytest -s` or -rA) so the
suite doubles as a release checklist. The evaluation criterion runs the
real CLI on the 30-per-class separable corpus with stub backends, default
epochs, seed 7.
"""

from __future__ import annotations

import functools
import json
import re
import time
from collections import Counter

import numpy as np
import pytest
import torch
from fastapi.testclient import TestClient

from neuro.artifacts import ModelStore
from neuro.audio import AudioClip, resample
from neuro.classifiers import (FeatureKind, Label, ModelFamily, ModelSpec,
                               train)
from neuro.cli import main
from neuro.evaluation import accuracy, evaluate_cv, macro_f1, stratified_kfold
from neuro.linguistic import extract_linguistic_features
from neuro.service import ServiceConfig, create_app
from neuro.transcription import TimedToken, TimedTranscript, segment_sentences

from helpers import tone, tone_wav

EVAL_TIME_BUDGET_S = 300.0
PREDICT_TIME_BUDGET_S = 10.0


def criterion(name):
    def decorate(fn):
        @functools.wraps(fn)
        def wrapper(*args, **kwargs):
            try:
                fn(*args, **kwargs)
            except BaseException:
                print(f"FAIL  {name}", flush=True)
                raise
            print(f"PASS  {name}", flush=True)
        return wrapper
    return decorate


@pytest.fixture(scope="module")
def acceptance_model_dir(acceptance_corpus, tmp_path_factory):
    """SVM/FUSED artifact trained on the acceptance corpus via the CLI."""
    model_dir = tmp_path_factory.mktemp("acceptance-models")
    code = main(["train", "--manifest", str(acceptance_corpus.manifest_path),
                 "--family", "svm", "--features", "fused", "--seed", "7",
                 "--no-cv", "--out", str(model_dir)])
    assert code == 0
    return model_dir


# --- 1. evaluation protocol on the separable synthetic corpus ---

@criterion("eval protocol: 5 families x 3 kinds, acc>=0.90 / F1>=0.88 "
           "on paralinguistic+fused, within 5 minutes")
def test_eval_protocol_on_separable_corpus(acceptance_corpus, capsys):
    started = time.monotonic()
    code = main(["eval", "--manifest", str(acceptance_corpus.manifest_path),
                 "--families", "all",
                 "--features", "linguistic,paralinguistic,fused",
                 "--k", "5", "--seed", "7"])
    elapsed = time.monotonic() - started
    captured = capsys.readouterr()
    assert code == 0
    assert elapsed <= EVAL_TIME_BUDGET_S, f"eval took {elapsed:.0f}s"

    report = json.loads(captured.out)
    assert report["k"] == 5 and report["seed"] == 7
    combos = {(r["family"], r["feature_kind"]) for r in report["rows"]}
    assert combos == {(f.value, k.value) for f in ModelFamily for k in FeatureKind}
    for row in report["rows"]:
        assert len(row["fold_accuracy"]) == 5
        if row["feature_kind"] in ("PARALINGUISTIC", "FUSED"):
            assert row["mean_accuracy"] >= 0.90, row
            assert row["mean_macro_f1"] >= 0.88, row
    # Table-shaped text report with its three section blocks.
    for title in ("Linguistic Representation Modeling",
                  "Paralinguistic Representation Modeling",
                  "Fusion with Linguistic+Paralinguistic"):
        assert title in captured.err
    print(f"      (eval wall time {elapsed:.0f}s)", flush=True)


# --- 2. metric oracles ---

def bruteforce_confusion_metrics(y_true, y_pred):
    counts = Counter(zip(y_true, y_pred))
    def get(t, p):
        return counts.get((t, p), 0)
    n = len(y_true)
    acc = (get(Label.PT, Label.PT) + get(Label.HC, Label.HC)) / n
    f1s = []
    for cls, other in ((Label.HC, Label.PT), (Label.PT, Label.HC)):
        tp, fp, fn = get(cls, cls), get(other, cls), get(cls, other)
        denom = 2 * tp + fp + fn
        f1s.append(2 * tp / denom if denom else 0.0)
    return acc, (f1s[0] + f1s[1]) / 2


@criterion("metric oracles: 1000 random vectors within 1e-9; "
           "worked macro-F1 = 0.733333 +/- 1e-6")
def test_metrics_match_bruteforce_oracles():
    rng = np.random.default_rng(2024)
    for _ in range(1000):
        n = int(rng.integers(2, 201))
        y_true = [Label(int(v)) for v in rng.integers(0, 2, n)]
        y_pred = [Label(int(v)) for v in rng.integers(0, 2, n)]
        oracle_acc, oracle_f1 = bruteforce_confusion_metrics(y_true, y_pred)
        assert abs(accuracy(y_true, y_pred) - oracle_acc) < 1e-9
        assert abs(macro_f1(y_true, y_pred) - oracle_f1) < 1e-9
    worked = macro_f1([Label.PT, Label.PT, Label.HC, Label.HC],
                      [Label.PT, Label.PT, Label.PT, Label.HC])
    assert abs(worked - 0.733333) <= 1e-6


# --- 3. CV protocol properties ---

class RowAccessRecorder:
    def __init__(self, X):
        self.X = X
        self.events = []

    def __getitem__(self, rows):
        self.events.append(list(rows))
        return self.X[rows]

    def __len__(self):
        return len(self.X)


@criterion("CV protocol: 30/31 stratified folds disjoint+covering, "
           "per-class within 1; zero test-row accesses during fit")
def test_cv_protocol_properties():
    labels = {f"pt{i}": Label.PT for i in range(30)}
    labels.update({f"hc{i}": Label.HC for i in range(31)})
    folds = stratified_kfold(labels, k=5, seed=7)
    seen = []
    for fold in range(5):
        members = folds.members(fold)
        seen.extend(members)
        pt = sum(1 for m in members if m.startswith("pt"))
        hc = len(members) - pt
        assert pt == 6
        assert hc in (6, 7)
    assert sorted(seen) == sorted(labels)  # disjoint and covering

    rng = np.random.default_rng(0)
    X = np.vstack([rng.normal(0, 1, (30, 8)), rng.normal(6, 1, (30, 8))])
    y = [Label.HC] * 30 + [Label.PT] * 30
    cv_folds = stratified_kfold(dict(enumerate(y)), k=5, seed=7)
    recorder = RowAccessRecorder(X)
    spec = ModelSpec(family=ModelFamily.SVM, feature_kind=FeatureKind.LINGUISTIC,
                     input_dim=8, seed=7)
    evaluate_cv(recorder, y, spec, cv_folds)
    assert len(recorder.events) == 10
    for fold in range(5):
        test_rows = {i for i in range(60) if cv_folds.fold_of[i] == fold}
        assert set(recorder.events[2 * fold]).isdisjoint(test_rows)
        assert set(recorder.events[2 * fold + 1]) == test_rows


# --- 4. hyperparameter conformance ---

@criterion("hyperparameters: RNN h=50, CNN 64xw3+dense128, "
           "Transformer 4 heads+hidden 128; 50 epochs by default")
def test_hyperparameter_conformance(monkeypatch):
    rng = np.random.default_rng(1)
    X = np.vstack([rng.normal(0, 1, (20, 8)), rng.normal(5, 1, (20, 8))])
    y = [Label.HC] * 20 + [Label.PT] * 20

    def spec(family):
        return ModelSpec(family=family, feature_kind=FeatureKind.LINGUISTIC,
                         input_dim=8, seed=0)

    steps = []
    original = torch.optim.Adam.step
    monkeypatch.setattr(
        torch.optim.Adam, "step",
        lambda self, *a, **k: (steps.append(1), original(self, *a, **k))[1])

    rnn = train(spec(ModelFamily.RNN), X, y)
    assert rnn._impl.rnn.hidden_size == 50
    assert rnn.parameter_count() == (50 + 50 * 50 + 50 + 50) + (50 + 1)

    cnn = train(spec(ModelFamily.CNN), X, y)
    assert tuple(cnn._impl.conv.weight.shape) == (64, 1, 3)
    assert tuple(cnn._impl.dense.weight.shape) == (128, 64)
    assert cnn.parameter_count() == (64 * 3 + 64) + (128 * 64 + 128) + (128 + 1)

    tf = train(spec(ModelFamily.TRANSFORMER), X, y)
    assert tf._impl.encoder.self_attn.num_heads == 4
    assert tf._impl.encoder.linear1.out_features == 128
    w = 32
    expected = ((w + w)                                   # scalar projection
                + (3 * w * w + 3 * w) + (w * w + w)       # attention
                + (w * 128 + 128) + (128 * w + w)         # feed-forward 128
                + 2 * (w + w)                             # layer norms
                + (w + 1))                                # sigmoid head
    assert tf.parameter_count() == expected

    for model in (rnn, cnn, tf):
        assert model.train_metadata["epochs_run"] == 50
    # 40 samples / batch 16 -> 3 optimizer steps per epoch, 3 nets trained.
    assert len(steps) == 3 * 50 * 3


# --- 5. pipeline determinism + audio checks ---

@criterion("pipeline determinism: identical printed probability on repeat "
           "predict; resample length and 440 Hz peak checks")
def test_pipeline_determinism_and_audio_checks(acceptance_corpus,
                                               acceptance_model_dir, capsys, tmp_path):
    wav_path = tmp_path / "probe.wav"
    wav_path.write_bytes(tone_wav(3.0, freq_hz=800, amp=0.4))
    printed = []
    for _ in range(2):
        code = main(["predict", "--model-dir", str(acceptance_model_dir),
                     "--audio", str(wav_path)])
        assert code == 0
        out = capsys.readouterr().out
        match = re.search(r'"probability":\s*([^,\s]+)', out)
        assert match is not None
        printed.append(match.group(1))
    assert printed[0] == printed[1]  # identical to all printed digits

    clip = AudioClip(samples=np.zeros(32000) + 0.01, sample_rate_hz=32000)
    assert abs(len(resample(clip, 16000).samples) - 16000) <= 1

    tone_clip = AudioClip(samples=tone(2.0, 440, 44100), sample_rate_hz=44100)
    out_clip = resample(tone_clip, 16000)
    spectrum = np.abs(np.fft.rfft(out_clip.samples.astype(np.float64)))
    freqs = np.fft.rfftfreq(len(out_clip.samples), 1 / 16000)
    assert abs(freqs[np.argmax(spectrum)] - 440.0) <= 2.0


# --- 6. linguistic golden file ---

@criterion("linguistic golden: 'go अभी go अभी' "
           "fixture yields the exact 8-vector")
def test_linguistic_golden_vector():
    tokens = (TimedToken("go", 0.0, 1.0),
              TimedToken("अभी", 1.0, 2.0),
              TimedToken("go", 3.5, 4.5),
              TimedToken("अभी", 4.5, 5.5))
    transcript = TimedTranscript(tokens=tokens,
                                 sentences=segment_sentences(tokens),
                                 audio_duration_s=8.0)
    feats = extract_linguistic_features(transcript)
    assert feats.switch_count == 3
    assert feats.speech_rate_wpm == 30.0
    assert feats.english_ratio == 0.5
    assert feats.hindi_ratio == 0.5
    assert feats.other_ratio == 0.0
    assert feats.avg_word_len_chars == 2.0
    assert feats.avg_sentence_len_words == 2.0
    assert feats.switch_rate_per_min == 22.5


# --- 7. service round trip ---

@criterion("service round trip: 200 within 10 s, threshold invariant, "
           "log line equals response")
def test_service_round_trip(acceptance_corpus, acceptance_model_dir, tmp_path):
    config = ServiceConfig(model_dir=acceptance_model_dir,
                           log_path=tmp_path / "predictions.jsonl")
    app = create_app(config)
    wav_bytes_payload = acceptance_corpus.entries[0].audio_path.read_bytes()
    with TestClient(app) as client:
        started = time.monotonic()
        response = client.post("/api/predict",
                               files={"audio": ("clip.wav", wav_bytes_payload)})
        elapsed = time.monotonic() - started
    assert response.status_code == 200
    assert elapsed <= PREDICT_TIME_BUDGET_S, f"predict took {elapsed:.1f}s"
    body = response.json()
    assert 0.0 <= body["probability"] <= 1.0
    assert (body["label"] == "PT") == (body["probability"] >= 0.5)
    last_line = config.log_path.read_text().splitlines()[-1]
    assert json.loads(last_line) == body
