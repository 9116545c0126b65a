"""Independent WAV encoding oracle used as a fixture factory across tests."""

from __future__ import annotations

import struct

import numpy as np


def wav_bytes(samples: np.ndarray, rate: int, channels: int = 1,
              fmt: str = "pcm16") -> bytes:
    """Struct-packed WAV encoder, written independently of the package codec.

    `samples` is (n,) for mono or (n, channels); pcm16 expects [-1, 1]
    floats, float32/float64 write IEEE float chunks.
    """
    samples = np.asarray(samples)
    if samples.ndim == 1:
        samples = samples[:, None]
    assert samples.shape[1] == channels
    if fmt == "pcm16":
        fmt_tag, bits = 1, 16
        payload = np.clip(np.round(samples * 32768.0), -32768, 32767).astype("<i2").tobytes()
    elif fmt == "float32":
        fmt_tag, bits = 3, 32
        payload = samples.astype("<f4").tobytes()
    elif fmt == "float64":
        fmt_tag, bits = 3, 64
        payload = samples.astype("<f8").tobytes()
    else:
        raise ValueError(fmt)
    block_align = channels * bits // 8
    fmt_chunk = struct.pack("<HHIIHH", fmt_tag, channels, rate,
                            rate * block_align, block_align, bits)
    body = (b"WAVE"
            + b"fmt " + struct.pack("<I", len(fmt_chunk)) + fmt_chunk
            + b"data" + struct.pack("<I", len(payload)) + payload)
    return b"RIFF" + struct.pack("<I", len(body)) + body


def tone(duration_s: float, freq_hz: float, rate: int, amp: float = 0.5) -> np.ndarray:
    t = np.arange(int(duration_s * rate)) / rate
    return (amp * np.sin(2 * np.pi * freq_hz * t)).astype(np.float64)


def tone_wav(duration_s: float = 1.0, freq_hz: float = 440.0, rate: int = 16000,
             amp: float = 0.5) -> bytes:
    return wav_bytes(tone(duration_s, freq_hz, rate, amp), rate)
