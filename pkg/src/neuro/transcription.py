"""Transcription backends and sentence segmentation.

The backend contract has two implementations: a deterministic stub that
reads sidecar transcript text (or synthesizes seeded pseudo-text) so the
pipeline is testable offline, and an adapter around an external
Whisper-family model that is loaded only when explicitly configured.
"""

from __future__ import annotations

import hashlib
import threading
from abc import ABC, abstractmethod
from dataclasses import dataclass, field, replace
from typing import Mapping

import numpy as np

from .audio import PIPELINE_RATE_HZ, AudioClip
from .errors import BackendFailure, RateMismatch

# Splitting a sentence after a pause longer than this keeps segmentation
# robust to disfluent child speech.
PAUSE_SPLIT_S = 1.0

_SENTENCE_TERMINATORS = (".", "?", "!", "।")  # includes Devanagari danda

# Time resolution under which token overlap is tolerated (timestamp jitter).
_ORDER_TOLERANCE_S = 0.001

_SILENCE_PEAK = 1e-4


@dataclass(frozen=True)
class TimedToken:
    """One word with start/end times in seconds."""

    text: str
    start_s: float
    end_s: float

    def __post_init__(self):
        if not self.text:
            raise ValueError("token text must be non-empty")
        if self.start_s < 0 or self.end_s <= self.start_s:
            raise ValueError(f"bad token timing [{self.start_s}, {self.end_s})")


@dataclass(frozen=True)
class TimedTranscript:
    """Ordered tokens plus sentence index ranges over an audio clip."""

    tokens: tuple[TimedToken, ...]
    sentences: tuple[tuple[int, int], ...]
    audio_duration_s: float

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))
        object.__setattr__(self, "sentences", tuple(tuple(r) for r in self.sentences))
        if self.audio_duration_s <= 0:
            raise ValueError("audio_duration_s must be positive")
        for a, b in zip(self.tokens, self.tokens[1:]):
            if b.start_s < a.end_s - _ORDER_TOLERANCE_S:
                raise ValueError(f"tokens overlap: {a} then {b}")
        if self.tokens and self.tokens[-1].end_s > self.audio_duration_s + 0.5:
            raise ValueError("last token ends beyond the audio duration")
        cursor = 0
        for start, end in self.sentences:
            if start != cursor or end <= start:
                raise ValueError("sentence ranges must partition the token sequence")
            cursor = end
        if cursor != len(self.tokens):
            raise ValueError("sentence ranges must cover every token")


def segment_sentences(tokens: tuple[TimedToken, ...]) -> tuple[tuple[int, int], ...]:
    """Split ordered tokens into sentence index ranges.

    A sentence ends after a token whose text ends in '.', '?', '!' or the
    Devanagari danda, or when the gap to the next token exceeds
    PAUSE_SPLIT_S. Trailing tokens form a final sentence.
    """
    ranges = []
    start = 0
    for i, tok in enumerate(tokens):
        ends_sentence = tok.text.endswith(_SENTENCE_TERMINATORS)
        if not ends_sentence and i + 1 < len(tokens):
            ends_sentence = tokens[i + 1].start_s - tok.end_s > PAUSE_SPLIT_S
        if ends_sentence:
            ranges.append((start, i + 1))
            start = i + 1
    if start < len(tokens):
        ranges.append((start, len(tokens)))
    return tuple(ranges)


class TranscriptionBackend(ABC):
    """Whisper-role contract: turn a 16 kHz clip into a timed transcript."""

    name: str = "backend"

    @abstractmethod
    def run(self, clip: AudioClip) -> TimedTranscript:
        ...


# Vocabulary for synthesized pseudo-text when no sidecar is available.
_SYNTH_VOCAB = (
    "ball", "play", "school", "water", "happy", "friend",
    "खेल", "पानी", "घर",
    "अच्छा", "nahi", "chalo",
)


@dataclass(frozen=True)
class StubTranscriptionBackend(TranscriptionBackend):
    """Deterministic offline transcription.

    Token text comes from sidecar_map[clip.source_id], else sidecar_text,
    else seeded pseudo-text; timings are spread uniformly across the clip.
    Silent audio (peak below 1e-4) yields an empty transcript, mirroring
    real ASR on silence. Pure function of (sidecar text or seed,
    audio_duration_s), so identical inputs give identical transcripts.
    """

    seed: int = 0
    sidecar_text: str | None = None
    sidecar_map: Mapping[str, str] = field(default_factory=dict)

    name = "stub"

    def bound_to(self, text: str) -> "StubTranscriptionBackend":
        """Copy of this stub that transcribes every clip as `text`."""
        return replace(self, sidecar_text=text)

    def _text_for(self, clip: AudioClip) -> str:
        text = self.sidecar_map.get(clip.source_id, self.sidecar_text)
        if text is not None:
            return text
        # Pseudo-text: ~2 words/s drawn from a fixed mixed vocabulary.
        duration_ms = int(round(clip.duration_s * 1000))
        digest = hashlib.sha256(f"{self.seed}:{duration_ms}".encode()).digest()
        rng = np.random.default_rng(int.from_bytes(digest[:8], "little"))
        n = max(1, int(round(clip.duration_s * 2)))
        words = [_SYNTH_VOCAB[rng.integers(len(_SYNTH_VOCAB))] for _ in range(n)]
        return " ".join(words)

    def run(self, clip: AudioClip) -> TimedTranscript:
        duration = clip.duration_s
        if float(np.max(np.abs(clip.samples))) < _SILENCE_PEAK:
            return TimedTranscript(tokens=(), sentences=(), audio_duration_s=duration)
        words = self._text_for(clip).split()
        if not words:
            return TimedTranscript(tokens=(), sentences=(), audio_duration_s=duration)
        step = duration / len(words)
        tokens = tuple(
            TimedToken(text=w, start_s=i * step, end_s=(i + 1) * step)
            for i, w in enumerate(words)
        )
        return TimedTranscript(tokens=tokens, sentences=segment_sentences(tokens),
                               audio_duration_s=duration)


class WhisperTranscriptionBackend(TranscriptionBackend):
    """Adapter around an external Whisper-family model.

    The model identifier is required configuration; weights load lazily on
    first use and inference is serialized (single in-flight transcription).
    """

    name = "whisper"

    def __init__(self, model_name: str, device: str = "cpu", language: str | None = None):
        if not model_name:
            raise ValueError("model_name is required")
        self.model_name = model_name
        self.device = device
        self.language = language
        self._model = None
        self._lock = threading.Lock()

    def available(self) -> bool:
        try:
            import whisper  # noqa: F401
        except ImportError:
            return False
        return True

    def _load(self):
        if self._model is None:
            try:
                import whisper
            except ImportError as exc:
                raise BackendFailure(f"whisper package unavailable: {exc}") from exc
            self._model = whisper.load_model(self.model_name, device=self.device)
        return self._model

    def run(self, clip: AudioClip) -> TimedTranscript:
        with self._lock:
            model = self._load()
            try:
                result = model.transcribe(
                    clip.samples.astype(np.float32),
                    word_timestamps=True,
                    language=self.language,
                )
            except Exception as exc:
                raise BackendFailure(f"whisper inference failed: {exc}") from exc
        tokens = []
        cursor = 0.0
        for segment in result.get("segments", []):
            for word in segment.get("words", []):
                text = str(word.get("word", "")).strip()
                if not text:
                    continue
                start = max(float(word["start"]), cursor)
                end = max(float(word["end"]), start + 1e-3)
                tokens.append(TimedToken(text=text, start_s=start, end_s=end))
                cursor = end
        tokens = tuple(tokens)
        return TimedTranscript(tokens=tokens, sentences=segment_sentences(tokens),
                               audio_duration_s=clip.duration_s)


def transcribe(clip: AudioClip, backend: TranscriptionBackend) -> TimedTranscript:
    """Run the backend over a 16 kHz clip and validate its transcript."""
    if clip.sample_rate_hz != PIPELINE_RATE_HZ:
        raise RateMismatch(
            f"clip at {clip.sample_rate_hz} Hz; transcription expects {PIPELINE_RATE_HZ} Hz")
    try:
        return backend.run(clip)
    except BackendFailure:
        raise
    except Exception as exc:
        raise BackendFailure(f"{backend.name} backend raised: {exc}") from exc
