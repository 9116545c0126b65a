"""End-to-end glue: files/clips -> features -> matrices or predictions.

Shared by the CLI and the HTTP service so both run the identical path:
decode, resample to 16 kHz, transcribe, extract linguistic features,
embed, pool, and (for prediction) score with a trained model.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .audio import PIPELINE_RATE_HZ, AudioClip, decode_audio, resample
from .classifiers import FeatureKind, Label, TrainedModel, fuse_features
from .dataset import ManifestEntry
from .linguistic import LinguisticFeatures, extract_linguistic_features
from .paralinguistic import (EmbeddingBackend, ParalinguisticEmbedding,
                             StubEmbeddingBackend, embed, pool_embedding,
                             read_embedding_cache, write_embedding_cache)
from .transcription import (StubTranscriptionBackend, TimedTranscript,
                            TranscriptionBackend, transcribe)

DEFAULT_STUB_SEED = 0


def stub_backends(seed: int = DEFAULT_STUB_SEED) -> tuple[StubTranscriptionBackend,
                                                          StubEmbeddingBackend]:
    """The deterministic offline backend pair used by tests, CLI, and service.

    The same seed must be used at training and at serving time so stored
    models see the same feature space.
    """
    return StubTranscriptionBackend(seed=seed), StubEmbeddingBackend(seed=seed)


def load_clip(path: str | Path, sample_id: str | None = None) -> AudioClip:
    """Decode a WAV file and resample it to the 16 kHz pipeline rate."""
    path = Path(path)
    clip = decode_audio(path.read_bytes(), source_id=sample_id or path.stem)
    return resample(clip, PIPELINE_RATE_HZ)


@dataclass
class FeatureMatrices:
    """Aligned per-sample feature matrices for the three feature kinds."""

    ids: list[str]
    labels: list[Label]
    linguistic: np.ndarray
    paralinguistic: np.ndarray
    fused: np.ndarray

    def for_kind(self, kind: FeatureKind) -> np.ndarray:
        return {
            FeatureKind.LINGUISTIC: self.linguistic,
            FeatureKind.PARALINGUISTIC: self.paralinguistic,
            FeatureKind.FUSED: self.fused,
        }[kind]


def _with_sidecars(backend: TranscriptionBackend,
                   entries: list[ManifestEntry]) -> TranscriptionBackend:
    """Bind manifest sidecar transcripts to a stub backend by sample_id."""
    if not isinstance(backend, StubTranscriptionBackend):
        return backend
    sidecar_map = {}
    for entry in entries:
        if entry.transcript_path is not None:
            sidecar_map[entry.sample_id] = entry.transcript_path.read_text("utf-8")
    if not sidecar_map:
        return backend
    return replace(backend, sidecar_map=sidecar_map)


def clip_features(clip: AudioClip, t_backend: TranscriptionBackend,
                  e_backend: EmbeddingBackend,
                  ) -> tuple[LinguisticFeatures, ParalinguisticEmbedding, TimedTranscript]:
    transcript = transcribe(clip, t_backend)
    ling = extract_linguistic_features(transcript)
    para = pool_embedding(embed(clip, e_backend))
    return ling, para, transcript


def build_feature_matrices(entries: list[ManifestEntry],
                           t_backend: TranscriptionBackend,
                           e_backend: EmbeddingBackend,
                           cache_dir: str | Path | None = None) -> FeatureMatrices:
    """Extract aligned feature matrices for every manifest entry.

    When cache_dir is given, frame embeddings are persisted per sample_id
    and reused on later runs (intended for expensive real-model backends;
    the caller owns invalidation when audio changes).
    """
    t_backend = _with_sidecars(t_backend, entries)
    ids = []
    labels = []
    ling_rows = []
    para_rows = []
    for entry in entries:
        clip = load_clip(entry.audio_path, sample_id=entry.sample_id)
        transcript = transcribe(clip, t_backend)
        ling_rows.append(extract_linguistic_features(transcript).to_vector())

        frames = None
        cache_path = None
        if cache_dir is not None:
            cache_path = Path(cache_dir) / f"{entry.sample_id}.emb"
            if cache_path.is_file():
                frames = read_embedding_cache(cache_path)
        if frames is None:
            frames = embed(clip, e_backend)
            if cache_path is not None:
                cache_path.parent.mkdir(parents=True, exist_ok=True)
                write_embedding_cache(cache_path, frames)
        para_rows.append(pool_embedding(frames).values)

        ids.append(entry.sample_id)
        labels.append(entry.label)
    linguistic = np.asarray(ling_rows, dtype=np.float64)
    paralinguistic = np.asarray(para_rows, dtype=np.float64)
    fused = np.concatenate([linguistic, paralinguistic], axis=1)
    return FeatureMatrices(ids=ids, labels=labels, linguistic=linguistic,
                           paralinguistic=paralinguistic, fused=fused)


def predict_clip(clip: AudioClip, model: TrainedModel,
                 t_backend: TranscriptionBackend,
                 e_backend: EmbeddingBackend) -> dict:
    """Run the model's feature branch(es) over one clip.

    Returns label, probability, the linguistic snapshot, and per-stage
    timings in milliseconds. The linguistic branch always runs because the
    snapshot is part of every prediction result.
    """
    timing_ms: dict[str, float] = {}

    start = time.perf_counter()
    transcript = transcribe(clip, t_backend)
    ling = extract_linguistic_features(transcript)
    timing_ms["transcribe"] = (time.perf_counter() - start) * 1000.0

    kind = model.spec.feature_kind
    para = None
    if kind in (FeatureKind.PARALINGUISTIC, FeatureKind.FUSED):
        start = time.perf_counter()
        para = pool_embedding(embed(clip, e_backend))
        timing_ms["embed"] = (time.perf_counter() - start) * 1000.0

    if kind is FeatureKind.LINGUISTIC:
        x = ling.to_vector()
    elif kind is FeatureKind.PARALINGUISTIC:
        x = para.values
    else:
        x = fuse_features(ling, para)

    start = time.perf_counter()
    probability = model.predict_proba(x)
    timing_ms["predict"] = (time.perf_counter() - start) * 1000.0

    label = Label.PT if probability >= 0.5 else Label.HC
    return {
        "label": label.name,
        "probability": probability,
        "feature_kind": kind.value,
        "linguistic_snapshot": ling.to_dict(),
        "timing_ms": timing_ms,
    }
