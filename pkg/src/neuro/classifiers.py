"""The five classifier families, feature fusion, training, and prediction.

SVM and RF are scikit-learn estimators at their default settings; RNN,
CNN, and Transformer are small torch networks trained with Adam on binary
cross-entropy. Every model standardizes features with statistics fit on
its training data only, and every stochastic step derives from the spec
seed, so training is reproducible bit-for-bit.
"""

from __future__ import annotations

import io
import pickle
from dataclasses import dataclass, field
from enum import Enum, IntEnum
from typing import Any, Mapping, Sequence

import numpy as np
import torch
from sklearn.ensemble import RandomForestClassifier
from sklearn.svm import SVC

from . import nets
from .errors import DegenerateLabels, DimensionMismatch, NonFiniteInput
from .linguistic import LINGUISTIC_DIM, LinguisticFeatures
from .paralinguistic import ParalinguisticEmbedding


class ModelFamily(str, Enum):
    SVM = "SVM"
    RF = "RF"
    RNN = "RNN"
    CNN = "CNN"
    TRANSFORMER = "TRANSFORMER"


NEURAL_FAMILIES = (ModelFamily.RNN, ModelFamily.CNN, ModelFamily.TRANSFORMER)


class FeatureKind(str, Enum):
    LINGUISTIC = "LINGUISTIC"
    PARALINGUISTIC = "PARALINGUISTIC"
    FUSED = "FUSED"


class Label(IntEnum):
    """PT encodes to 1 and HC to 0, fixed project-wide."""

    HC = 0
    PT = 1


_NEURAL_TRAIN_DEFAULTS = {"epochs": 50, "learning_rate": 1e-3, "batch_size": 16}

FAMILY_DEFAULTS: dict[ModelFamily, dict[str, Any]] = {
    ModelFamily.SVM: {"c": 1.0, "kernel": "rbf", "gamma": "scale"},
    ModelFamily.RF: {"n_trees": 100, "criterion": "gini", "max_depth": None},
    ModelFamily.RNN: {"hidden_units": 50, **_NEURAL_TRAIN_DEFAULTS},
    ModelFamily.CNN: {"filters": 64, "kernel_width": 3, "dense_units": 128,
                      **_NEURAL_TRAIN_DEFAULTS},
    ModelFamily.TRANSFORMER: {"heads": 4, "ff_units": 128, "model_width": 32,
                              **_NEURAL_TRAIN_DEFAULTS},
}


@dataclass(frozen=True)
class ModelSpec:
    family: ModelFamily
    feature_kind: FeatureKind
    input_dim: int
    hyperparams: Mapping[str, Any] = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if self.input_dim < 1:
            raise ValueError("input_dim must be positive")
        unknown = set(self.hyperparams) - set(FAMILY_DEFAULTS[self.family])
        if unknown:
            raise ValueError(f"unknown hyperparams for {self.family.value}: {sorted(unknown)}")

    def resolved_hyperparams(self) -> dict[str, Any]:
        merged = dict(FAMILY_DEFAULTS[self.family])
        merged.update(self.hyperparams)
        return merged

    def to_dict(self) -> dict:
        return {
            "family": self.family.value,
            "feature_kind": self.feature_kind.value,
            "input_dim": self.input_dim,
            "hyperparams": dict(self.hyperparams),
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "ModelSpec":
        return cls(
            family=ModelFamily(payload["family"]),
            feature_kind=FeatureKind(payload["feature_kind"]),
            input_dim=int(payload["input_dim"]),
            hyperparams=dict(payload.get("hyperparams", {})),
            seed=int(payload.get("seed", 0)),
        )


@dataclass(eq=False)
class TrainedModel:
    """Spec plus fitted weights; immutable after training, safe to share."""

    spec: ModelSpec
    train_metadata: dict
    _impl: Any

    def _standardize(self, X: np.ndarray) -> np.ndarray:
        std = self.train_metadata["standardizer"]
        return (X - np.asarray(std["mean"])) / np.asarray(std["std"])

    def predict_proba_batch(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.spec.input_dim:
            raise DimensionMismatch(
                f"expected (n, {self.spec.input_dim}) features, got {X.shape}")
        if not np.isfinite(X).all():
            raise NonFiniteInput("non-finite feature values at predict time")
        Xs = self._standardize(X)
        if self.spec.family in NEURAL_FAMILIES:
            self._impl.eval()
            with torch.no_grad():
                proba = self._impl(torch.tensor(Xs, dtype=torch.float32)).numpy()
            proba = proba.astype(np.float64)
        else:
            proba = self._impl.predict_proba(Xs)[:, 1]
        return np.clip(proba, 0.0, 1.0)

    def predict_proba(self, x: Sequence[float] | np.ndarray) -> float:
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 1 or x.shape[0] != self.spec.input_dim:
            raise DimensionMismatch(
                f"expected a {self.spec.input_dim}-dim vector, got shape {x.shape}")
        return float(self.predict_proba_batch(x[None, :])[0])

    def classify(self, x: Sequence[float] | np.ndarray) -> Label:
        return Label.PT if self.predict_proba(x) >= 0.5 else Label.HC

    def parameter_count(self) -> int | None:
        if self.spec.family in NEURAL_FAMILIES:
            return nets.parameter_count(self._impl)
        return None

    def weight_payload(self) -> bytes:
        """Opaque serializable weights; see artifacts for the container."""
        if self.spec.family in NEURAL_FAMILIES:
            buf = io.BytesIO()
            torch.save(self._impl.state_dict(), buf)
            return buf.getvalue()
        return pickle.dumps(self._impl)


def fuse_features(ling: LinguisticFeatures,
                  para: ParalinguisticEmbedding) -> np.ndarray:
    """Concatenate [linguistic (8) || paralinguistic (D)], linguistic first."""
    vector = np.concatenate([ling.to_vector(), para.values])
    if not np.isfinite(vector).all():
        raise NonFiniteInput("fused feature vector contains non-finite values")
    return vector


def build_net(spec: ModelSpec) -> torch.nn.Module:
    hp = spec.resolved_hyperparams()
    if spec.family is ModelFamily.RNN:
        return nets.RnnClassifier(hidden_units=hp["hidden_units"])
    if spec.family is ModelFamily.CNN:
        return nets.CnnClassifier(filters=hp["filters"], kernel_width=hp["kernel_width"],
                                  dense_units=hp["dense_units"])
    if spec.family is ModelFamily.TRANSFORMER:
        return nets.TransformerClassifier(input_dim=spec.input_dim, heads=hp["heads"],
                                          ff_units=hp["ff_units"],
                                          model_width=hp["model_width"])
    raise ValueError(f"{spec.family} is not a neural family")


def _as_label_array(labels: Sequence[Label] | np.ndarray) -> np.ndarray:
    y = np.asarray([int(v) for v in labels], dtype=np.int64)
    if not np.isin(y, (0, 1)).all():
        raise ValueError("labels must be Label values (PT=1, HC=0)")
    return y


def _bce(proba: np.ndarray, y: np.ndarray) -> float:
    p = np.clip(proba, 1e-7, 1 - 1e-7)
    return float(-np.mean(y * np.log(p) + (1 - y) * np.log(1 - p)))


def _train_neural(spec: ModelSpec, Xs: np.ndarray, y: np.ndarray) -> tuple[Any, int, float]:
    hp = spec.resolved_hyperparams()
    torch.manual_seed(spec.seed & 0x7FFFFFFFFFFFFFFF)
    net = build_net(spec)
    optimizer = torch.optim.Adam(net.parameters(), lr=hp["learning_rate"])
    loss_fn = torch.nn.BCELoss()
    Xt = torch.tensor(Xs, dtype=torch.float32)
    yt = torch.tensor(y, dtype=torch.float32)
    shuffle_rng = np.random.default_rng(spec.seed)
    n = len(y)
    batch = hp["batch_size"]
    net.train()
    for _ in range(hp["epochs"]):
        order = shuffle_rng.permutation(n)
        for start in range(0, n, batch):
            idx = torch.from_numpy(order[start:start + batch].copy())
            optimizer.zero_grad()
            loss = loss_fn(net(Xt[idx]), yt[idx])
            loss.backward()
            optimizer.step()
    net.eval()
    with torch.no_grad():
        final_loss = _bce(net(Xt).numpy().astype(np.float64), y)
    return net, hp["epochs"], final_loss


def _train_sklearn(spec: ModelSpec, Xs: np.ndarray, y: np.ndarray) -> tuple[Any, float]:
    hp = spec.resolved_hyperparams()
    seed = spec.seed % (2 ** 32)
    if spec.family is ModelFamily.SVM:
        est = SVC(C=hp["c"], kernel=hp["kernel"], gamma=hp["gamma"],
                  probability=True, random_state=seed)
    else:
        est = RandomForestClassifier(n_estimators=hp["n_trees"],
                                     criterion=hp["criterion"],
                                     max_depth=hp["max_depth"], random_state=seed)
    est.fit(Xs, y)
    return est, _bce(est.predict_proba(Xs)[:, 1], y)


def train(spec: ModelSpec, features: np.ndarray,
          labels: Sequence[Label] | np.ndarray) -> TrainedModel:
    """Fit one model; the standardizer is fit on `features` only.

    Neural families run exactly the configured number of epochs (default
    50) of shuffled minibatches. Raises DegenerateLabels when one class is
    absent and NonFiniteInput on NaN/inf features.
    """
    X = np.asarray(features, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 2:
        raise ValueError(f"features must be (n >= 2, input_dim), got {X.shape}")
    if X.shape[1] != spec.input_dim:
        raise DimensionMismatch(
            f"spec.input_dim is {spec.input_dim} but features have {X.shape[1]} columns")
    if not np.isfinite(X).all():
        raise NonFiniteInput("non-finite feature values in training data")
    y = _as_label_array(labels)
    if len(y) != len(X):
        raise ValueError("features and labels must have equal length")
    if len(np.unique(y)) < 2:
        raise DegenerateLabels("training data contains a single class")

    mean = X.mean(axis=0)
    std = X.std(axis=0)
    std[std == 0.0] = 1.0
    Xs = (X - mean) / std

    if spec.family in NEURAL_FAMILIES:
        impl, epochs_run, final_loss = _train_neural(spec, Xs, y)
    else:
        impl, final_loss = _train_sklearn(spec, Xs, y)
        epochs_run = 0

    metadata = {
        "epochs_run": epochs_run,
        "final_loss": final_loss,
        "n_train": int(len(y)),
        "standardizer": {"mean": mean.tolist(), "std": std.tolist()},
    }
    return TrainedModel(spec=spec, train_metadata=metadata, _impl=impl)


def predict_proba(model: TrainedModel, x) -> float:
    """P(label = PT) for one feature vector."""
    return model.predict_proba(x)


def classify(model: TrainedModel, x) -> Label:
    """PT when predict_proba >= 0.5, else HC (ties favor screening sensitivity)."""
    return model.classify(x)
