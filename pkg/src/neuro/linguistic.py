"""Linguistic feature extraction from timed transcripts.

Produces the fixed 8-dimensional vector: word/sentence lengths, speech
rate, English/Hindi/other distribution, and code-switch metrics. Token
language is decided by script (Devanagari vs Latin) with a bundled
romanized-Hindi lexicon catching Latin-script Hindi.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .transcription import TimedTranscript

DEVANAGARI_RANGE = (0x0900, 0x097F)

# Serialization order of the feature vector; fixed project-wide.
FEATURE_NAMES = (
    "avg_word_len_chars",
    "avg_sentence_len_words",
    "speech_rate_wpm",
    "english_ratio",
    "hindi_ratio",
    "other_ratio",
    "switch_count",
    "switch_rate_per_min",
)

LINGUISTIC_DIM = len(FEATURE_NAMES)


class LanguageTag(Enum):
    ENGLISH = "ENGLISH"
    HINDI = "HINDI"
    OTHER = "OTHER"


@dataclass(frozen=True)
class LinguisticFeatures:
    avg_word_len_chars: float
    avg_sentence_len_words: float
    speech_rate_wpm: float
    english_ratio: float
    hindi_ratio: float
    other_ratio: float
    switch_count: int
    switch_rate_per_min: float

    def to_vector(self) -> np.ndarray:
        return np.array([getattr(self, name) for name in FEATURE_NAMES], dtype=np.float64)

    def to_dict(self) -> dict:
        return {name: getattr(self, name) for name in FEATURE_NAMES}

    @classmethod
    def from_dict(cls, payload: dict) -> "LinguisticFeatures":
        fields = {name: payload[name] for name in FEATURE_NAMES}
        fields["switch_count"] = int(fields["switch_count"])
        return cls(**fields)

    @classmethod
    def zeros(cls) -> "LinguisticFeatures":
        return cls(0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0, 0.0)


def load_lexicon(path: str | Path | None = None) -> frozenset[str]:
    """Load a romanized-Hindi word list: UTF-8, one word per line, '#' comments."""
    if path is None:
        text = resources.files("neuro").joinpath("data/hindi_lexicon.txt").read_text("utf-8")
    else:
        text = Path(path).read_text("utf-8")
    words = set()
    for line in text.splitlines():
        word = line.split("#", 1)[0].strip().lower()
        if word:
            words.add(word)
    return frozenset(words)


@lru_cache(maxsize=1)
def default_lexicon() -> frozenset[str]:
    return load_lexicon()


def _is_devanagari(ch: str) -> bool:
    return DEVANAGARI_RANGE[0] <= ord(ch) <= DEVANAGARI_RANGE[1]


def _is_latin(ch: str) -> bool:
    if ch.isascii():
        return ch.isalpha()
    try:
        return unicodedata.name(ch).startswith("LATIN")
    except ValueError:
        return False


def identify_token_language(token_text: str,
                            lexicon: frozenset[str] | None = None) -> LanguageTag:
    """Tag one token as ENGLISH, HINDI, or OTHER.

    HINDI when at least half the alphabetic characters are Devanagari or the
    lowercased token is in the romanized-Hindi lexicon; ENGLISH when at
    least half are Latin; OTHER otherwise (digits, other scripts, no
    alphabetic characters).
    """
    if not token_text:
        raise ValueError("token_text must be non-empty")
    if lexicon is None:
        lexicon = default_lexicon()
    alpha = [ch for ch in token_text if ch.isalpha()]
    if alpha:
        deva = sum(1 for ch in alpha if _is_devanagari(ch))
        if 2 * deva >= len(alpha):
            return LanguageTag.HINDI
    if token_text.strip(".,!?।॥'\"()").lower() in lexicon:
        return LanguageTag.HINDI
    if alpha:
        latin = sum(1 for ch in alpha if _is_latin(ch))
        if 2 * latin >= len(alpha):
            return LanguageTag.ENGLISH
    return LanguageTag.OTHER


def count_switch_points(tags: Sequence[LanguageTag] | Iterable[LanguageTag]) -> int:
    """Count English<->Hindi alternations; OTHER tokens are transparent."""
    switches = 0
    previous = None
    for tag in tags:
        if tag is LanguageTag.OTHER:
            continue
        if previous is not None and tag is not previous:
            switches += 1
        previous = tag
    return switches


def extract_linguistic_features(transcript: TimedTranscript,
                                lexicon: frozenset[str] | None = None) -> LinguisticFeatures:
    """Compute the 8-feature vector; an empty transcript yields all zeros.

    Word length counts alphabetic characters only; speech rate uses the
    full audio duration (no voice-activity detection in the pipeline).
    """
    tokens = transcript.tokens
    if not tokens:
        return LinguisticFeatures.zeros()
    n = len(tokens)
    minutes = transcript.audio_duration_s / 60.0

    alpha_counts = [sum(1 for ch in tok.text if ch.isalpha()) for tok in tokens]
    tags = [identify_token_language(tok.text, lexicon) for tok in tokens]
    switch_count = count_switch_points(tags)
    n_sentences = max(1, len(transcript.sentences))

    return LinguisticFeatures(
        avg_word_len_chars=float(np.mean(alpha_counts)),
        avg_sentence_len_words=n / n_sentences,
        speech_rate_wpm=n / minutes,
        english_ratio=sum(t is LanguageTag.ENGLISH for t in tags) / n,
        hindi_ratio=sum(t is LanguageTag.HINDI for t in tags) / n,
        other_ratio=sum(t is LanguageTag.OTHER for t in tags) / n,
        switch_count=switch_count,
        switch_rate_per_min=switch_count / minutes,
    )
