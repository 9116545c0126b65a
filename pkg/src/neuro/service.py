"""HTTP back end: upload audio, run the pipeline, return PT/HC predictions.

Endpoints: POST /api/predict, GET /api/models, GET /api/predictions,
GET /api/health. Predictions append to a JSONL write-ahead log before the
response is sent. Configuration comes from a key-value file overridden by
NEURO_* environment variables.
"""

from __future__ import annotations

import json
import os
import shlex
import shutil
import subprocess
import tempfile
import threading
import time
import uuid
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Mapping

from fastapi import FastAPI, File, Form, Request, UploadFile
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from .artifacts import ModelStore
from .audio import PIPELINE_RATE_HZ, decode_audio, resample
from .errors import (BackendFailure, ClipTooShort, MalformedAudio,
                     UnknownModel, UnsupportedFormat)
from .paralinguistic import TrillssonEmbeddingBackend
from .pipeline import predict_clip, stub_backends
from .transcription import WhisperTranscriptionBackend

DEFAULT_PORT = 8080


@dataclass
class ServiceConfig:
    port: int = DEFAULT_PORT
    model_dir: Path = Path("models")
    log_path: Path = Path("predictions.jsonl")
    backends: str = "stub"  # stub | real
    retain_audio: bool = False
    audio_dir: Path | None = None
    max_upload_bytes: int = 50 * 1024 * 1024
    stub_seed: int = 0
    whisper_model: str = ""
    trillsson_handle: str = ""
    transcoder: str = ""  # e.g. "ffmpeg -y -i {input} {output}"
    static_dir: Path | None = None


_CONFIG_KEYS = {
    "PORT": ("port", int),
    "MODEL_DIR": ("model_dir", Path),
    "LOG_PATH": ("log_path", Path),
    "BACKENDS": ("backends", str),
    "RETAIN_AUDIO": ("retain_audio", lambda v: v.strip().lower() in ("1", "true", "yes")),
    "AUDIO_DIR": ("audio_dir", Path),
    "MAX_UPLOAD_BYTES": ("max_upload_bytes", int),
    "STUB_SEED": ("stub_seed", int),
    "WHISPER_MODEL": ("whisper_model", str),
    "TRILLSSON_HANDLE": ("trillsson_handle", str),
    "TRANSCODER": ("transcoder", str),
    "STATIC_DIR": ("static_dir", Path),
}


def load_config(path: str | Path | None = None,
                env: Mapping[str, str] | None = None) -> ServiceConfig:
    """Key-value config file (KEY=VALUE, '#' comments) + NEURO_* env overrides."""
    if env is None:
        env = os.environ
    config = ServiceConfig()

    def apply(key: str, raw: str) -> None:
        key = key.upper().removeprefix("NEURO_")
        if key not in _CONFIG_KEYS:
            raise ValueError(f"unknown config key {key!r}")
        attr, cast = _CONFIG_KEYS[key]
        setattr(config, attr, cast(raw))

    if path is not None:
        for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"config line {lineno}: expected KEY=VALUE")
            key, raw = line.split("=", 1)
            apply(key.strip(), raw.strip())
    for key, raw in env.items():
        if key.upper().startswith("NEURO_"):
            apply(key, raw)
    if config.backends not in ("stub", "real"):
        raise ValueError(f"backends must be 'stub' or 'real', got {config.backends!r}")
    return config


class PredictionLog:
    """Append-only JSONL log; appends are serialized and fsynced."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()

    def append(self, record: dict) -> None:
        line = json.dumps(record, ensure_ascii=False) + "\n"
        with self._lock:
            with self.path.open("a", encoding="utf-8") as handle:
                handle.write(line)
                handle.flush()
                os.fsync(handle.fileno())

    def tail(self, n: int) -> list[dict]:
        """Most recent n records, newest first."""
        if not self.path.exists():
            return []
        records = [json.loads(line) for line in
                   self.path.read_text("utf-8").splitlines() if line.strip()]
        return list(reversed(records[-n:])) if n > 0 else []

    def __len__(self) -> int:
        if not self.path.exists():
            return 0
        return sum(1 for line in self.path.read_text("utf-8").splitlines() if line.strip())


class ApiError(Exception):
    def __init__(self, status: int, code: str, detail: str):
        super().__init__(detail)
        self.status = status
        self.code = code
        self.detail = detail


def _utc_now_iso() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="milliseconds")


def _build_backends(config: ServiceConfig):
    if config.backends == "stub":
        return stub_backends(config.stub_seed)
    transcription = WhisperTranscriptionBackend(config.whisper_model or "small")
    embedding = TrillssonEmbeddingBackend(
        config.trillsson_handle or "https://tfhub.dev/google/trillsson3/1")
    return transcription, embedding


def _transcode_to_wav(command: str, data: bytes, suffix: str) -> bytes:
    """Run the configured external transcoder; returns WAV bytes."""
    with tempfile.TemporaryDirectory() as tmp:
        src = Path(tmp) / f"upload{suffix or '.bin'}"
        dst = Path(tmp) / "out.wav"
        src.write_bytes(data)
        argv = [part.format(input=str(src), output=str(dst))
                for part in shlex.split(command)]
        proc = subprocess.run(argv, capture_output=True, timeout=120)
        if proc.returncode != 0 or not dst.exists():
            raise UnsupportedFormat(
                f"transcoder failed (exit {proc.returncode}): "
                f"{proc.stderr.decode(errors='replace')[:200]}")
        return dst.read_bytes()


def _transcoder_available(config: ServiceConfig) -> bool:
    if not config.transcoder:
        return False
    binary = shlex.split(config.transcoder)[0]
    return shutil.which(binary) is not None


def create_app(config: ServiceConfig | None = None) -> FastAPI:
    config = config or ServiceConfig()
    store = ModelStore(config.model_dir)
    log = PredictionLog(config.log_path)
    t_backend, e_backend = _build_backends(config)

    app = FastAPI(title="neuro")
    app.state.config = config
    app.state.store = store
    app.state.log = log

    @app.exception_handler(ApiError)
    async def api_error_handler(_req: Request, exc: ApiError):
        return JSONResponse(status_code=exc.status,
                            content={"error": exc.code, "detail": exc.detail})

    def _decode_upload(data: bytes, filename: str) -> bytes:
        """Give non-WAV uploads one chance through the external transcoder."""
        try:
            decode_audio(data)
            return data
        except UnsupportedFormat as exc:
            if not _transcoder_available(config):
                raise ApiError(400, "UNSUPPORTED_FORMAT", str(exc))
            suffix = Path(filename or "upload.bin").suffix
            try:
                return _transcode_to_wav(config.transcoder, data, suffix)
            except (UnsupportedFormat, subprocess.TimeoutExpired) as exc2:
                raise ApiError(400, "UNSUPPORTED_FORMAT", str(exc2))
        except MalformedAudio as exc:
            raise ApiError(400, "MALFORMED_AUDIO", str(exc))

    @app.post("/api/predict")
    def predict(audio: UploadFile = File(...), model_id: str | None = Form(None)):
        data = audio.file.read(config.max_upload_bytes + 1)
        if len(data) > config.max_upload_bytes:
            raise ApiError(413, "PAYLOAD_TOO_LARGE",
                           f"upload exceeds {config.max_upload_bytes} bytes")
        request_id = uuid.uuid4().hex

        start = time.perf_counter()
        wav_bytes = _decode_upload(data, audio.filename or "")
        try:
            clip = decode_audio(wav_bytes, source_id=request_id)
        except MalformedAudio as exc:
            raise ApiError(400, "MALFORMED_AUDIO", str(exc))
        except UnsupportedFormat as exc:
            raise ApiError(400, "UNSUPPORTED_FORMAT", str(exc))
        clip = resample(clip, PIPELINE_RATE_HZ)
        decode_ms = (time.perf_counter() - start) * 1000.0

        chosen_id = model_id or store.best_model_id()
        if chosen_id is None:
            raise ApiError(404, "MODEL_NOT_FOUND", "no models in the store")
        try:
            model = store.load(chosen_id)
        except UnknownModel as exc:
            raise ApiError(404, "MODEL_NOT_FOUND", str(exc))

        try:
            outcome = predict_clip(clip, model, t_backend, e_backend)
        except (BackendFailure, ClipTooShort) as exc:
            status = 503 if isinstance(exc, BackendFailure) else 400
            code = "BACKEND_UNAVAILABLE" if status == 503 else "CLIP_TOO_SHORT"
            raise ApiError(status, code, str(exc))

        outcome["timing_ms"]["decode"] = decode_ms
        result = {
            "request_id": request_id,
            "label": outcome["label"],
            "probability": outcome["probability"],
            "model_id": chosen_id,
            "feature_kind": outcome["feature_kind"],
            "linguistic_snapshot": outcome["linguistic_snapshot"],
            "timing_ms": outcome["timing_ms"],
            "created_at": _utc_now_iso(),
        }
        if config.retain_audio:
            audio_dir = config.audio_dir or (config.log_path.parent / "uploads")
            audio_dir.mkdir(parents=True, exist_ok=True)
            (audio_dir / f"{request_id}.wav").write_bytes(wav_bytes)
        log.append(result)  # write-ahead: logged before the response leaves
        return result

    @app.get("/api/models")
    def models():
        try:
            entries = store.entries()
        except Exception as exc:
            raise ApiError(500, "STORE_UNREADABLE", str(exc))
        return [
            {
                "model_id": e.model_id,
                "family": e.family,
                "feature_kind": e.feature_kind,
                "mean_accuracy": e.mean_accuracy,
                "mean_macro_f1": e.mean_macro_f1,
                "created_at": e.created_at,
            }
            for e in entries
        ]

    @app.get("/api/predictions")
    def predictions(limit: int = 20):
        if limit < 1 or limit > 1000:
            raise ApiError(400, "INVALID_LIMIT", "limit must be in [1, 1000]")
        return log.tail(limit)

    @app.get("/api/health")
    def health():
        if config.backends == "stub":
            flags = {"transcription": "stub", "embedding": "stub"}
        else:
            flags = {
                "transcription": "ready" if t_backend.available() else "unavailable",
                "embedding": "ready" if e_backend.available() else "unavailable",
            }
        degraded = any(v == "unavailable" for v in flags.values())
        return {
            "status": "degraded" if degraded else "ok",
            "backends": flags,
            "model_count": len(store),
            "capabilities": {"transcode": _transcoder_available(config)},
        }

    if config.static_dir is not None and Path(config.static_dir).is_dir():
        app.mount("/", StaticFiles(directory=config.static_dir, html=True), name="ui")

    return app
