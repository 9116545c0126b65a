"""Exception taxonomy shared across the pipeline.

Every error raised by neuro code derives from NeuroError so callers (CLI,
service) can map failures to exit codes / HTTP responses in one place.
"""


class NeuroError(Exception):
    """Base class for all neuro errors."""


# --- audio ingest ---

class MalformedAudio(NeuroError):
    """Unparseable header or truncated audio data."""


class UnsupportedFormat(NeuroError):
    """Recognized but unsupported container or sample encoding."""


class InvalidRate(NeuroError):
    """Resample target below the supported minimum."""


# --- backends (transcription / embedding) ---

class BackendFailure(NeuroError):
    """A model backend raised; carries the backend diagnostic."""


class RateMismatch(NeuroError):
    """Clip not at the 16 kHz pipeline rate."""


class ClipTooShort(NeuroError):
    """Clip shorter than the embedding backend's minimum window."""


class EmptyFrames(NeuroError):
    """Pooling requested over zero frames."""


# --- classifiers ---

class DegenerateLabels(NeuroError):
    """Training labels contain a single class."""


class NonFiniteInput(NeuroError):
    """NaN or infinity in feature values."""


class DimensionMismatch(NeuroError):
    """Input vector length does not match the model's input_dim."""


# --- evaluation ---

class TooFewSamples(NeuroError):
    """A class has fewer members than the number of folds."""


class LengthMismatch(NeuroError):
    """y_true and y_pred lengths differ."""


class EmptyInput(NeuroError):
    """Metric requested over zero samples."""


# --- dataset / manifest ---

class ManifestParseError(NeuroError):
    """Manifest row failed validation; message carries line number."""


class MissingAudio(NeuroError):
    """Manifest references an audio file that does not exist."""


class DuplicateId(NeuroError):
    """sample_id repeated within one manifest."""


class MissingDuration(NeuroError):
    """summarize() called without a duration for some entry."""


# --- model store ---

class UnknownModel(NeuroError):
    """model_id not present in the store."""
