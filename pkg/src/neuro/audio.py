"""Audio ingest: WAV decode, mono downmix, band-limited resampling.

The core boundary accepts WAV (RIFF) only — PCM 16-bit and IEEE float
variants. Anything else is rejected so the pipeline stays bit-exactly
testable; the service edge may transcode other containers before calling
decode_audio.
"""

from __future__ import annotations

import hashlib
import io
import struct
import wave
from dataclasses import dataclass

import numpy as np
from scipy.signal import resample_poly

from .errors import InvalidRate, MalformedAudio, UnsupportedFormat

PIPELINE_RATE_HZ = 16000

# Container signatures we can name in an UnsupportedFormat message.
_KNOWN_MAGICS = (
    (b"OggS", "ogg"),
    (b"ID3", "mp3"),
    (b"fLaC", "flac"),
    (b"\x1a\x45\xdf\xa3", "webm/matroska"),
    (b"FORM", "aiff"),
)

_WAVE_FORMAT_PCM = 0x0001
_WAVE_FORMAT_IEEE_FLOAT = 0x0003
_WAVE_FORMAT_EXTENSIBLE = 0xFFFE


@dataclass(frozen=True, eq=False)
class AudioClip:
    """Mono PCM buffer with its sample rate; the unit flowing through preprocessing.

    samples: float32 amplitudes in [-1.0, 1.0].
    """

    samples: np.ndarray
    sample_rate_hz: int
    source_id: str = ""

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float32)
        if samples.ndim != 1 or samples.size == 0:
            raise ValueError("AudioClip requires a non-empty 1-D sample buffer")
        if not np.isfinite(samples).all():
            raise ValueError("AudioClip samples must be finite")
        if self.sample_rate_hz <= 0:
            raise ValueError("sample_rate_hz must be positive")
        object.__setattr__(self, "samples", np.clip(samples, -1.0, 1.0))

    @property
    def duration_s(self) -> float:
        return len(self.samples) / self.sample_rate_hz


def _sniff_container(data: bytes) -> str | None:
    for magic, name in _KNOWN_MAGICS:
        if data.startswith(magic):
            return name
    if len(data) >= 12 and data[4:8] == b"ftyp":
        return "mp4/m4a"
    return None


def decode_audio(data: bytes, format_hint: str | None = None,
                 source_id: str | None = None) -> AudioClip:
    """Decode WAV bytes to a mono AudioClip at the file's native rate.

    Multi-channel input is downmixed by the arithmetic mean of channels.
    Amplitudes are normalized to [-1, 1] floats regardless of source bit
    depth. source_id defaults to a short content hash of the input bytes.

    Raises MalformedAudio for unparseable/truncated data and
    UnsupportedFormat for non-WAV containers or non-PCM/float encodings.
    """
    if source_id is None:
        source_id = hashlib.sha1(data).hexdigest()[:12]

    if len(data) < 44:
        container = _sniff_container(data)
        if container is not None:
            raise UnsupportedFormat(f"{container} container is not supported; upload WAV")
        raise MalformedAudio("data too short to be a WAV file")
    if data[:4] != b"RIFF" or data[8:12] != b"WAVE":
        container = _sniff_container(data)
        if container is not None:
            raise UnsupportedFormat(f"{container} container is not supported; upload WAV")
        raise MalformedAudio("missing RIFF/WAVE header")

    fmt = None
    payload = None
    pos = 12
    while pos + 8 <= len(data):
        chunk_id = data[pos:pos + 4]
        (chunk_size,) = struct.unpack_from("<I", data, pos + 4)
        body_start = pos + 8
        if body_start + chunk_size > len(data):
            raise MalformedAudio(f"truncated {chunk_id!r} chunk")
        body = data[body_start:body_start + chunk_size]
        if chunk_id == b"fmt ":
            fmt = body
        elif chunk_id == b"data":
            payload = body
        pos = body_start + chunk_size + (chunk_size & 1)

    if fmt is None or len(fmt) < 16:
        raise MalformedAudio("missing or short fmt chunk")
    if payload is None:
        raise MalformedAudio("missing data chunk")

    format_tag, channels, rate, _byte_rate, block_align, bits = struct.unpack_from(
        "<HHIIHH", fmt, 0)
    if format_tag == _WAVE_FORMAT_EXTENSIBLE:
        if len(fmt) < 26:
            raise MalformedAudio("extensible fmt chunk too short")
        (format_tag,) = struct.unpack_from("<H", fmt, 24)
    if channels < 1:
        raise MalformedAudio("zero channels")
    if rate <= 0:
        raise MalformedAudio("non-positive sample rate")

    if format_tag == _WAVE_FORMAT_PCM:
        if bits != 16:
            raise UnsupportedFormat(f"{bits}-bit PCM is not supported; use 16-bit")
        dtype, denom = np.dtype("<i2"), 32768.0
    elif format_tag == _WAVE_FORMAT_IEEE_FLOAT:
        if bits == 32:
            dtype, denom = np.dtype("<f4"), 1.0
        elif bits == 64:
            dtype, denom = np.dtype("<f8"), 1.0
        else:
            raise UnsupportedFormat(f"{bits}-bit float is not supported")
    else:
        raise UnsupportedFormat(f"WAV format tag 0x{format_tag:04x} is not PCM or IEEE float")

    frame_bytes = dtype.itemsize * channels
    if block_align not in (0, frame_bytes):
        raise MalformedAudio("block alignment inconsistent with format")
    n_frames = len(payload) // frame_bytes
    if n_frames == 0:
        raise MalformedAudio("data chunk holds no complete frames")
    raw = np.frombuffer(payload[:n_frames * frame_bytes], dtype=dtype)
    frames = raw.reshape(n_frames, channels).astype(np.float64)
    mono = frames.mean(axis=1) / denom
    if not np.isfinite(mono).all():
        raise MalformedAudio("non-finite sample values")
    return AudioClip(samples=mono.astype(np.float32), sample_rate_hz=int(rate),
                     source_id=source_id)


def encode_wav_pcm16(samples: np.ndarray, sample_rate_hz: int) -> bytes:
    """Encode mono float samples in [-1, 1] as a 16-bit PCM WAV file.

    Scale matches decode (1/32768), so a round trip stays within 1/32768.
    """
    samples = np.asarray(samples, dtype=np.float64)
    ints = np.clip(np.round(samples * 32768.0), -32768, 32767).astype("<i2")
    buf = io.BytesIO()
    with wave.open(buf, "wb") as w:
        w.setnchannels(1)
        w.setsampwidth(2)
        w.setframerate(sample_rate_hz)
        w.writeframes(ints.tobytes())
    return buf.getvalue()


def resample(clip: AudioClip, target_hz: int = PIPELINE_RATE_HZ) -> AudioClip:
    """Resample with polyphase band-limited interpolation.

    Returns the clip unchanged when already at target_hz. Output length is
    round(len * target / native) within one sample.
    """
    if target_hz < 1000:
        raise InvalidRate(f"target rate {target_hz} Hz below 1000 Hz minimum")
    if clip.sample_rate_hz == target_hz:
        return clip
    g = np.gcd(clip.sample_rate_hz, target_hz)
    up, down = target_hz // g, clip.sample_rate_hz // g
    out = resample_poly(clip.samples.astype(np.float64), up, down)
    out = np.clip(out, -1.0, 1.0).astype(np.float32)
    return AudioClip(samples=out, sample_rate_hz=target_hz, source_id=clip.source_id)
