"""Model artifact container and the on-disk model store.

An artifact is a zip holding meta.json (format version, spec, training
metadata, optional evaluation metrics) and weights.bin (torch state dict
or pickled sklearn estimator). Artifacts are immutable; the store names
them by a 12-hex-char content hash.
"""

from __future__ import annotations

import hashlib
import io
import json
import pickle
import zipfile
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

import torch

from .classifiers import NEURAL_FAMILIES, ModelSpec, TrainedModel, build_net
from .errors import UnknownModel

FORMAT_VERSION = "neuro-model/1"
ARTIFACT_SUFFIX = ".neuro"

# Fixed zip timestamps keep artifact bytes a function of content alone.
_ZIP_DATE = (2020, 1, 1, 0, 0, 0)


def _utc_now_iso() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def artifact_bytes(model: TrainedModel, metrics: dict | None = None,
                   created_at: str | None = None) -> bytes:
    meta = {
        "format": FORMAT_VERSION,
        "spec": model.spec.to_dict(),
        "train_metadata": model.train_metadata,
        "metrics": metrics,
        "created_at": created_at or _utc_now_iso(),
    }
    buf = io.BytesIO()
    with zipfile.ZipFile(buf, "w", compression=zipfile.ZIP_DEFLATED) as zf:
        for name, payload in (("meta.json", json.dumps(meta, indent=2).encode()),
                              ("weights.bin", model.weight_payload())):
            info = zipfile.ZipInfo(name, date_time=_ZIP_DATE)
            info.compress_type = zipfile.ZIP_DEFLATED
            zf.writestr(info, payload)
    return buf.getvalue()


def save_model(model: TrainedModel, path: str | Path,
               metrics: dict | None = None, created_at: str | None = None) -> None:
    Path(path).write_bytes(artifact_bytes(model, metrics, created_at))


def load_artifact(path: str | Path) -> tuple[TrainedModel, dict]:
    """Load one artifact; returns (model, meta). Reload is bit-exact."""
    with zipfile.ZipFile(path) as zf:
        meta = json.loads(zf.read("meta.json"))
        weights = zf.read("weights.bin")
    if meta.get("format") != FORMAT_VERSION:
        raise ValueError(f"{path}: unsupported artifact format {meta.get('format')!r}")
    spec = ModelSpec.from_dict(meta["spec"])
    if spec.family in NEURAL_FAMILIES:
        net = build_net(spec)
        net.load_state_dict(torch.load(io.BytesIO(weights), weights_only=True))
        net.eval()
        impl = net
    else:
        impl = pickle.loads(weights)
    model = TrainedModel(spec=spec, train_metadata=meta["train_metadata"], _impl=impl)
    return model, meta


def load_model(path: str | Path) -> TrainedModel:
    return load_artifact(path)[0]


@dataclass(frozen=True)
class StoreEntry:
    model_id: str
    family: str
    feature_kind: str
    mean_accuracy: float | None
    mean_macro_f1: float | None
    created_at: str


class ModelStore:
    """Directory of immutable artifacts keyed by content-hash ids."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def _path(self, model_id: str) -> Path:
        return self.root / f"{model_id}{ARTIFACT_SUFFIX}"

    def save(self, model: TrainedModel, metrics: dict | None = None) -> str:
        blob = artifact_bytes(model, metrics)
        model_id = hashlib.sha256(blob).hexdigest()[:12]
        target = self._path(model_id)
        if not target.exists():
            tmp = target.with_suffix(".tmp")
            tmp.write_bytes(blob)
            tmp.replace(target)
        return model_id

    def load(self, model_id: str) -> TrainedModel:
        path = self._path(model_id)
        if not path.exists():
            raise UnknownModel(f"model {model_id!r} is not in the store")
        return load_model(path)

    def meta(self, model_id: str) -> dict:
        path = self._path(model_id)
        if not path.exists():
            raise UnknownModel(f"model {model_id!r} is not in the store")
        with zipfile.ZipFile(path) as zf:
            return json.loads(zf.read("meta.json"))

    def entries(self) -> list[StoreEntry]:
        """One entry per artifact, newest first."""
        rows = []
        for path in self.root.glob(f"*{ARTIFACT_SUFFIX}"):
            meta = self.meta(path.stem)
            metrics = meta.get("metrics") or {}
            rows.append(StoreEntry(
                model_id=path.stem,
                family=meta["spec"]["family"],
                feature_kind=meta["spec"]["feature_kind"],
                mean_accuracy=metrics.get("mean_accuracy"),
                mean_macro_f1=metrics.get("mean_macro_f1"),
                created_at=meta["created_at"],
            ))
        rows.sort(key=lambda e: (e.created_at, e.model_id), reverse=True)
        return rows

    def __len__(self) -> int:
        return len(list(self.root.glob(f"*{ARTIFACT_SUFFIX}")))

    def best_model_id(self) -> str | None:
        """Stored model with the highest mean_macro_f1; newest breaks ties.

        Models without metrics rank below any model with metrics.
        """
        entries = self.entries()
        if not entries:
            return None
        ranked = sorted(
            entries,
            key=lambda e: (e.mean_macro_f1 is not None, e.mean_macro_f1 or 0.0,
                           e.created_at),
            reverse=True,
        )
        return ranked[0].model_id
