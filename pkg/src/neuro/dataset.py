"""Dataset manifest loading, corpus summaries, and synthetic corpus generation.

The manifest is clinician-editable CSV. The synthetic generator is a
desk-scale substitute for the private corpus: class signal is injected in
both branches — audio content (which the embedding stub turns into
separable vectors) and code-switch-heavy sidecar transcripts — so
linguistic-only, paralinguistic-only, and fused experiments all have
learnable signal.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np
from sklearn.linear_model import LogisticRegression

from .audio import decode_audio, encode_wav_pcm16
from .classifiers import Label
from .errors import (DuplicateId, ManifestParseError, MissingAudio,
                     MissingDuration)
from .paralinguistic import StubEmbeddingBackend, pool_embedding

MANIFEST_HEADER = ("sample_id", "audio_path", "label", "age_years", "transcript_path")

AGE_RANGE = (3, 13)

GENERATOR_RATE_HZ = 16000


class Profile(str, Enum):
    SEPARABLE = "SEPARABLE"
    OVERLAPPED = "OVERLAPPED"


# Between-class shift of the latent class variable, in within-class sigmas.
_CLASS_GAP = {Profile.SEPARABLE: 5.0, Profile.OVERLAPPED: 0.5}


@dataclass(frozen=True)
class ManifestEntry:
    sample_id: str
    audio_path: Path
    label: Label
    age_years: int | None = None
    transcript_path: Path | None = None


@dataclass(frozen=True)
class CorpusSummary:
    n_participants: int
    n_pt: int
    n_hc: int
    total_minutes: float
    pt_minutes: float
    hc_minutes: float


def load_manifest(path: str | Path) -> list[ManifestEntry]:
    """Parse a manifest CSV; paths resolve relative to the manifest location.

    Raises ManifestParseError (with line number), DuplicateId, or
    MissingAudio.
    """
    path = Path(path)
    base = path.parent
    with path.open(newline="", encoding="utf-8") as handle:
        rows = list(csv.reader(handle))
    if not rows:
        raise ManifestParseError("line 1: empty manifest file")
    header = tuple(cell.strip() for cell in rows[0])
    if header != MANIFEST_HEADER:
        raise ManifestParseError(
            f"line 1: header must be {','.join(MANIFEST_HEADER)}")
    entries: list[ManifestEntry] = []
    seen: set[str] = set()
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or not any(cell.strip() for cell in row):
            continue
        if len(row) != len(MANIFEST_HEADER):
            raise ManifestParseError(
                f"line {lineno}: expected {len(MANIFEST_HEADER)} fields, got {len(row)}")
        sample_id, audio_rel, label_text, age_text, transcript_rel = (
            cell.strip() for cell in row)
        if not sample_id:
            raise ManifestParseError(f"line {lineno}: empty sample_id")
        if sample_id in seen:
            raise DuplicateId(f"duplicate sample_id {sample_id!r} at line {lineno}")
        seen.add(sample_id)
        if label_text not in ("PT", "HC"):
            raise ManifestParseError(
                f"line {lineno}: label must be PT or HC, got {label_text!r}")
        age = None
        if age_text:
            try:
                age = int(age_text)
            except ValueError:
                raise ManifestParseError(
                    f"line {lineno}: age_years must be an integer, got {age_text!r}")
            if not AGE_RANGE[0] <= age <= AGE_RANGE[1]:
                raise ManifestParseError(
                    f"line {lineno}: age_years {age} outside {AGE_RANGE[0]}-{AGE_RANGE[1]}")
        if not audio_rel:
            raise ManifestParseError(f"line {lineno}: empty audio_path")
        audio_path = (base / audio_rel).resolve()
        if not audio_path.is_file():
            raise MissingAudio(f"line {lineno}: audio file not found: {audio_path}")
        transcript_path = (base / transcript_rel).resolve() if transcript_rel else None
        entries.append(ManifestEntry(
            sample_id=sample_id, audio_path=audio_path, label=Label[label_text],
            age_years=age, transcript_path=transcript_path))
    return entries


def write_manifest(entries: Sequence[ManifestEntry], path: str | Path) -> None:
    """Write canonical manifest CSV; paths are stored relative when possible."""
    path = Path(path)
    base = path.parent.resolve()

    def rel(p: Path | None) -> str:
        if p is None:
            return ""
        try:
            return Path(p).resolve().relative_to(base).as_posix()
        except ValueError:
            return Path(p).as_posix()

    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(MANIFEST_HEADER)
        for e in entries:
            writer.writerow([
                e.sample_id,
                rel(e.audio_path),
                e.label.name,
                "" if e.age_years is None else str(e.age_years),
                rel(e.transcript_path),
            ])


def summarize(entries: Sequence[ManifestEntry],
              durations: Mapping[str, float]) -> CorpusSummary:
    """Per-label counts and minute totals from per-sample durations (seconds)."""
    minutes = {Label.PT: 0.0, Label.HC: 0.0}
    counts = {Label.PT: 0, Label.HC: 0}
    for entry in entries:
        if entry.sample_id not in durations:
            raise MissingDuration(f"no duration for sample {entry.sample_id!r}")
        minutes[entry.label] += durations[entry.sample_id] / 60.0
        counts[entry.label] += 1
    return CorpusSummary(
        n_participants=counts[Label.PT] + counts[Label.HC],
        n_pt=counts[Label.PT],
        n_hc=counts[Label.HC],
        total_minutes=minutes[Label.PT] + minutes[Label.HC],
        pt_minutes=minutes[Label.PT],
        hc_minutes=minutes[Label.HC],
    )


_ENGLISH_WORDS = (
    "ball", "play", "school", "happy", "water", "friend", "jump", "story",
    "apple", "green", "little", "outside", "teacher", "morning", "please",
    "look", "come", "here", "want", "more",
)
_HINDI_WORDS = (
    "खेल",            # khel
    "पानी",      # paani
    "घर",                  # ghar
    "अभी",            # abhi
    "चलो",            # chalo
    "अच्छा",  # achha
    "दोस्त",  # dost
    "खाना",      # khaana
    "मुझे",      # mujhe
    "हाँ",            # haan
)
_ROMAN_HINDI_WORDS = ("nahi", "acha", "chalo", "haan", "thoda", "jaldi")


def _clamp(value: float, lo: float, hi: float) -> float:
    return min(hi, max(lo, value))


def _synth_audio(rng: np.random.Generator, z: float, duration_s: float) -> np.ndarray:
    """Tone plus noise whose level and pitch follow the latent class variable."""
    zc = _clamp(z, -8.0, 8.0)
    amp = 0.3 * math.exp(0.15 * zc)
    noise_amp = 0.04 * math.exp(0.15 * zc)
    freq = _clamp(600.0 * (1.0 + 0.08 * zc), 100.0, 3500.0)
    phase = rng.uniform(0.0, 2.0 * math.pi)
    n = int(duration_s * GENERATOR_RATE_HZ)
    t = np.arange(n) / GENERATOR_RATE_HZ
    samples = amp * np.sin(2.0 * math.pi * freq * t + phase)
    samples += noise_amp * rng.standard_normal(n)
    return np.clip(samples, -1.0, 1.0)


def _synth_transcript(rng: np.random.Generator, z: float, duration_s: float) -> str:
    """Code-switched pseudo-transcript; switching and pacing follow z."""
    zc = _clamp(z, -8.0, 8.0)
    rate_wps = _clamp(2.2 - 0.1 * zc, 0.8, 4.0)
    p_switch = _clamp(0.5 + 0.07 * zc, 0.05, 0.95)
    n_tokens = max(4, int(round(rate_wps * duration_s)))
    hindi = rng.random() < 0.5
    words = []
    for i in range(n_tokens):
        if i > 0 and rng.random() < p_switch:
            hindi = not hindi
        if hindi:
            if rng.random() < 0.15:
                word = _ROMAN_HINDI_WORDS[rng.integers(len(_ROMAN_HINDI_WORDS))]
            else:
                word = _HINDI_WORDS[rng.integers(len(_HINDI_WORDS))]
        else:
            word = _ENGLISH_WORDS[rng.integers(len(_ENGLISH_WORDS))]
        if i == n_tokens - 1 or rng.random() < 0.15:
            word += "।" if hindi else "."
        words.append(word)
    return " ".join(words)


@dataclass(frozen=True)
class SyntheticCorpus:
    manifest_path: Path
    entries: tuple[ManifestEntry, ...]
    meta: dict


def generate_synthetic(n_per_class: int, profile: Profile | str, seed: int,
                       out_dir: str | Path) -> SyntheticCorpus:
    """Write a labeled corpus of WAVs, sidecar transcripts, and a manifest.

    Pure function of (n_per_class, profile, seed): reruns produce
    byte-identical files. A linear probe on stub paralinguistic features is
    fit at generation time and its training accuracy recorded in
    corpus_meta.json.
    """
    if n_per_class < 5:
        raise ValueError("n_per_class must be at least 5")
    profile = Profile(profile.upper() if isinstance(profile, str) else profile)
    gap = _CLASS_GAP[profile]
    out_dir = Path(out_dir)
    (out_dir / "audio").mkdir(parents=True, exist_ok=True)
    (out_dir / "transcripts").mkdir(parents=True, exist_ok=True)

    rng = np.random.default_rng(seed)
    entries: list[ManifestEntry] = []
    durations: dict[str, float] = {}
    for label in (Label.PT, Label.HC):
        sign = 1.0 if label is Label.PT else -1.0
        for i in range(n_per_class):
            sample_id = f"{label.name.lower()}_{i:03d}"
            z = sign * gap / 2.0 + rng.standard_normal()
            duration_s = round(rng.uniform(3.0, 6.0), 2)
            samples = _synth_audio(rng, z, duration_s)
            audio_rel = Path("audio") / f"{sample_id}.wav"
            (out_dir / audio_rel).write_bytes(
                encode_wav_pcm16(samples, GENERATOR_RATE_HZ))
            text = _synth_transcript(rng, z, duration_s)
            transcript_rel = Path("transcripts") / f"{sample_id}.txt"
            (out_dir / transcript_rel).write_text(text + "\n", encoding="utf-8")
            age = int(rng.integers(AGE_RANGE[0], AGE_RANGE[1] + 1))
            entries.append(ManifestEntry(
                sample_id=sample_id,
                audio_path=out_dir / audio_rel,
                label=label,
                age_years=age,
                transcript_path=out_dir / transcript_rel,
            ))
            durations[sample_id] = len(samples) / GENERATOR_RATE_HZ

    entries.sort(key=lambda e: e.sample_id)
    manifest_path = out_dir / "manifest.csv"
    write_manifest(entries, manifest_path)

    probe_accuracy = _linear_probe_accuracy(entries)
    summary = summarize(entries, durations)
    meta = {
        "class_gap_sigma": gap,
        "linear_probe_accuracy": probe_accuracy,
        "n_per_class": n_per_class,
        "profile": profile.value,
        "seed": seed,
        "total_minutes": round(summary.total_minutes, 4),
    }
    (out_dir / "corpus_meta.json").write_text(
        json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return SyntheticCorpus(manifest_path=manifest_path, entries=tuple(entries), meta=meta)


def _linear_probe_accuracy(entries: Sequence[ManifestEntry], k: int = 5) -> float:
    """Cross-validated accuracy of a logistic probe on pooled stub embeddings.

    Held-out (not training) accuracy, so the recorded value actually
    distinguishes the SEPARABLE and OVERLAPPED profiles.
    """
    backend = StubEmbeddingBackend(seed=0)
    X = []
    y = []
    for entry in entries:
        clip = decode_audio(entry.audio_path.read_bytes(), source_id=entry.sample_id)
        X.append(pool_embedding(backend.run(clip)).values)
        y.append(int(entry.label))
    X = np.asarray(X)
    y = np.asarray(y)
    hits = 0
    for fold in range(k):
        test = np.arange(len(y)) % k == fold
        mean = X[~test].mean(axis=0)
        std = np.where(X[~test].std(axis=0) == 0, 1.0, X[~test].std(axis=0))
        probe = LogisticRegression(max_iter=2000)
        probe.fit((X[~test] - mean) / std, y[~test])
        hits += int((probe.predict((X[test] - mean) / std) == y[test]).sum())
    return hits / len(y)
