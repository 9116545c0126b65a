"""Paralinguistic embedding backends and clip-level pooling.

The TRILLsson-role contract: a backend maps a 16 kHz clip to frame-level
embeddings; mean pooling reduces them to one fixed-dimension vector per
clip. The stub backend is deterministic and content-sensitive so every
downstream code path is exercisable offline.
"""

from __future__ import annotations

import hashlib
import struct
import threading
from abc import ABC, abstractmethod
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .audio import PIPELINE_RATE_HZ, AudioClip
from .errors import BackendFailure, ClipTooShort, EmptyFrames, RateMismatch

CACHE_MAGIC = b"NEUEMB1"


@dataclass(frozen=True, eq=False)
class FrameEmbeddings:
    """T x D matrix of frame-level embedding values."""

    frames: np.ndarray

    def __post_init__(self):
        frames = np.asarray(self.frames, dtype=np.float32)
        if frames.ndim != 2 or frames.shape[1] < 1:
            raise ValueError("frames must be a T x D matrix with D >= 1")
        if not np.isfinite(frames).all():
            raise ValueError("frame embeddings must be finite")
        object.__setattr__(self, "frames", frames)

    @property
    def n_frames(self) -> int:
        return self.frames.shape[0]

    @property
    def embedding_dim(self) -> int:
        return self.frames.shape[1]


@dataclass(frozen=True, eq=False)
class ParalinguisticEmbedding:
    """Pooled clip-level embedding vector."""

    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 1 or values.size < 1:
            raise ValueError("embedding must be a non-empty vector")
        if not np.isfinite(values).all():
            raise ValueError("embedding values must be finite")
        object.__setattr__(self, "values", values)

    @property
    def embedding_dim(self) -> int:
        return self.values.size


class EmbeddingBackend(ABC):
    """Maps a 16 kHz clip to frame embeddings of a declared dimension."""

    name: str = "backend"
    embedding_dim: int
    min_duration_s: float = 0.1

    @abstractmethod
    def run(self, clip: AudioClip) -> FrameEmbeddings:
        ...


@dataclass(frozen=True)
class StubEmbeddingBackend(EmbeddingBackend):
    """Deterministic, content-sensitive stand-in for the real embedder.

    Emits T = floor(duration / hop) frames (minimum 1) of dim values in
    [-1, 1]. Each frame is the tanh-squashed log-power profile of the
    frame's spectrum over `embedding_dim` bands, plus small jitter from a
    counter-based generator keyed by hash(seed, clip samples) — so the
    output is a pure function of (seed, samples) and any one-sample change
    produces a different matrix.
    """

    seed: int = 0
    embedding_dim: int = 64
    hop_s: float = 0.5
    min_duration_s: float = 0.1

    name = "stub"

    _JITTER = 0.02
    _LOG_REF = 4.5
    _SLOPE = 0.35

    def run(self, clip: AudioClip) -> FrameEmbeddings:
        duration = clip.duration_s
        if duration < self.min_duration_s:
            raise ClipTooShort(
                f"clip of {duration:.3f} s below the {self.min_duration_s} s minimum")
        window = int(round(self.hop_s * clip.sample_rate_hz))
        n_frames = max(1, int(duration / self.hop_s))

        samples = clip.samples.astype("<f4")
        digest = hashlib.sha256(
            str(self.seed).encode() + b":" + samples.tobytes()).digest()
        key = np.frombuffer(digest[:16], dtype=np.uint64)
        rng = np.random.Generator(np.random.Philox(key=key))
        jitter = rng.uniform(-1.0, 1.0, size=(n_frames, self.embedding_dim))

        rows = np.empty((n_frames, self.embedding_dim), dtype=np.float64)
        for t in range(n_frames):
            frame = samples[t * window:(t + 1) * window]
            if frame.size == 0:
                frame = samples[-window:]
            spectrum = np.abs(np.fft.rfft(frame.astype(np.float64))) ** 2
            spectrum /= frame.size ** 2
            bands = np.array_split(spectrum[1:], self.embedding_dim)
            power = np.array([band.mean() if band.size else 0.0 for band in bands])
            rows[t] = np.tanh(self._SLOPE * (np.log10(power + 1e-12) + self._LOG_REF))
        rows = np.clip(rows + self._JITTER * jitter, -1.0, 1.0)
        return FrameEmbeddings(frames=rows.astype(np.float32))


class TrillssonEmbeddingBackend(EmbeddingBackend):
    """Adapter around an external TRILLsson-family model (TF Hub handle).

    Loads lazily on first use; inference is serialized. The declared
    embedding_dim is backend metadata — classifiers read their input
    dimension from data, never from here.
    """

    name = "trillsson"

    def __init__(self, model_handle: str, embedding_dim: int = 1024,
                 min_duration_s: float = 0.1):
        if not model_handle:
            raise ValueError("model_handle is required")
        self.model_handle = model_handle
        self.embedding_dim = embedding_dim
        self.min_duration_s = min_duration_s
        self._model = None
        self._lock = threading.Lock()

    def available(self) -> bool:
        try:
            import tensorflow_hub  # noqa: F401
        except ImportError:
            return False
        return True

    def _load(self):
        if self._model is None:
            try:
                import tensorflow_hub as hub
            except ImportError as exc:
                raise BackendFailure(f"tensorflow_hub unavailable: {exc}") from exc
            self._model = hub.load(self.model_handle)
        return self._model

    def run(self, clip: AudioClip) -> FrameEmbeddings:
        if clip.duration_s < self.min_duration_s:
            raise ClipTooShort(
                f"clip of {clip.duration_s:.3f} s below the {self.min_duration_s} s minimum")
        with self._lock:
            model = self._load()
            try:
                out = model(np.asarray(clip.samples, dtype=np.float32)[None, :])
                frames = np.asarray(out["embedding"] if isinstance(out, dict) else out)
            except Exception as exc:
                raise BackendFailure(f"trillsson inference failed: {exc}") from exc
        if frames.ndim == 3:
            frames = frames[0]
        elif frames.ndim == 1:
            frames = frames[None, :]
        return FrameEmbeddings(frames=frames.astype(np.float32))


def embed(clip: AudioClip, backend: EmbeddingBackend) -> FrameEmbeddings:
    """Run the backend over a 16 kHz clip; validate shape and finiteness."""
    if clip.sample_rate_hz != PIPELINE_RATE_HZ:
        raise RateMismatch(
            f"clip at {clip.sample_rate_hz} Hz; embedding expects {PIPELINE_RATE_HZ} Hz")
    try:
        frames = backend.run(clip)
    except (BackendFailure, ClipTooShort):
        raise
    except Exception as exc:
        raise BackendFailure(f"{backend.name} backend raised: {exc}") from exc
    if frames.n_frames < 1:
        raise BackendFailure(f"{backend.name} backend returned zero frames")
    if frames.embedding_dim != backend.embedding_dim:
        raise BackendFailure(
            f"{backend.name} backend returned dim {frames.embedding_dim}, "
            f"declared {backend.embedding_dim}")
    return frames


def pool_embedding(frames: FrameEmbeddings | np.ndarray) -> ParalinguisticEmbedding:
    """Element-wise arithmetic mean over frames."""
    matrix = frames.frames if isinstance(frames, FrameEmbeddings) else np.asarray(frames)
    if matrix.ndim != 2 or matrix.shape[0] == 0:
        raise EmptyFrames("cannot pool zero frames")
    return ParalinguisticEmbedding(values=matrix.astype(np.float64).mean(axis=0))


def write_embedding_cache(path: str | Path, frames: FrameEmbeddings) -> None:
    """Persist frame embeddings: magic, u32le dim, u32le T, T*D f32le."""
    matrix = frames.frames.astype("<f4")
    header = CACHE_MAGIC + struct.pack("<II", matrix.shape[1], matrix.shape[0])
    Path(path).write_bytes(header + matrix.tobytes())


def read_embedding_cache(path: str | Path) -> FrameEmbeddings:
    """Read a cache file written by write_embedding_cache."""
    blob = Path(path).read_bytes()
    if len(blob) < len(CACHE_MAGIC) + 8 or not blob.startswith(CACHE_MAGIC):
        raise ValueError(f"{path} is not an embedding cache file")
    dim, n_frames = struct.unpack_from("<II", blob, len(CACHE_MAGIC))
    offset = len(CACHE_MAGIC) + 8
    expected = n_frames * dim * 4
    if len(blob) != offset + expected:
        raise ValueError(f"{path} cache payload truncated")
    matrix = np.frombuffer(blob, dtype="<f4", offset=offset).reshape(n_frames, dim)
    return FrameEmbeddings(frames=matrix.copy())
