"""Linear classifiers and repeated stratified cross-validation.

Both models are trained by full-batch gradient descent on an L2-regularised
loss (log-loss for LOGISTIC, hinge for HINGE) with a ``lr / sqrt(t)`` step.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from enum import Enum

import numpy as np

from .errors import (
    DimensionMismatch,
    EmptyInput,
    LengthMismatch,
    SingleClassData,
    TooFewSamples,
)
from .matrix import FeatureMatrix
from .records import Label


class ModelKind(str, Enum):
    LOGISTIC = "lr"
    HINGE = "svm"


@dataclass
class Hyper:
    l2: float = 1e-4
    epochs: int = 200
    learning_rate: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if self.l2 < 0 or self.epochs < 1 or self.learning_rate <= 0:
            raise ValueError("l2 must be >= 0, epochs >= 1 and learning_rate > 0")


@dataclass
class Dataset:
    ids: list[str]
    X: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=float)
        self.y = np.asarray(self.y, dtype=int)
        if self.X.ndim != 2 or len(self.X) != len(self.y):
            raise DimensionMismatch(f"{len(self.y)} labels for feature array of shape {self.X.shape}")
        if len(self.ids) != len(self.y):
            raise DimensionMismatch("ids and labels differ in length")
        if len(np.unique(self.y)) < 2:
            raise SingleClassData("both classes must be present")

    @classmethod
    def from_matrix(cls, feats: FeatureMatrix, labels: dict[str, Label], ids=None) -> "Dataset":
        """Rows of ``feats`` for the labelled ``ids`` (all labelled ids by default, in matrix order)."""
        if ids is None:
            ids = [a for a in feats.ids if a in labels]
        y = [1 if labels[a] is Label.PONZI else 0 for a in ids]
        return cls(list(ids), feats.select(ids).values, np.array(y))


@dataclass
class LinearModel:
    weights: np.ndarray
    bias: float
    kind: ModelKind
    loss_history: list[float] = field(default_factory=list)

    def decision(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != len(self.weights):
            raise DimensionMismatch(f"model expects {len(self.weights)} features, got {X.shape[1]}")
        return X @ self.weights + self.bias


def _sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def loss_and_grad(w, b, X, y, kind, l2):
    """Mean loss and its (sub)gradient in ``(w, b)``; ``y`` in {0, 1}."""
    kind = ModelKind(kind)
    s = 2.0 * y - 1.0
    z = X @ w + b
    n = len(y)
    if kind is ModelKind.LOGISTIC:
        m = s * z
        loss = np.mean(np.logaddexp(0.0, -m))
        coef = -s * _sigmoid(-m)
    else:
        m = s * z
        active = m < 1.0
        loss = np.mean(np.where(active, 1.0 - m, 0.0))
        coef = np.where(active, -s, 0.0)
    loss += 0.5 * l2 * float(w @ w)
    gw = X.T @ coef / n + l2 * w
    gb = float(coef.sum() / n)
    return float(loss), gw, gb


def fit(ds: Dataset, kind=ModelKind.LOGISTIC, hyper: Hyper = Hyper()) -> LinearModel:
    kind = ModelKind(kind)
    X, y = ds.X, ds.y
    if len(np.unique(y)) < 2:
        raise SingleClassData("both classes must be present")
    w = np.zeros(X.shape[1])
    b = 0.0
    history = []
    for t in range(1, hyper.epochs + 1):
        loss, gw, gb = loss_and_grad(w, b, X, y, kind, hyper.l2)
        history.append(loss)
        step = hyper.learning_rate / np.sqrt(t)
        w = w - step * gw
        b = b - step * gb
    history.append(loss_and_grad(w, b, X, y, kind, hyper.l2)[0])
    return LinearModel(w, b, kind, history)


def predict(m: LinearModel, X) -> np.ndarray:
    """1 where the score is on the positive side; the boundary counts as positive."""
    return (m.decision(X) >= 0.0).astype(int)


def micro_f1(pred, truth) -> float:
    """Micro-averaged F1 over both classes."""
    pred, truth = np.asarray(pred), np.asarray(truth)
    if len(pred) != len(truth):
        raise LengthMismatch(f"{len(pred)} predictions for {len(truth)} labels")
    if len(pred) == 0:
        raise EmptyInput("micro_f1 of empty input")
    tp = fp = fn = 0
    for c in (0, 1):
        tp += int(np.sum((pred == c) & (truth == c)))
        fp += int(np.sum((pred == c) & (truth != c)))
        fn += int(np.sum((pred != c) & (truth == c)))
    denom = 2 * tp + fp + fn
    return 2 * tp / denom if denom else 0.0


@dataclass
class Standardizer:
    mean: np.ndarray
    scale: np.ndarray

    @classmethod
    def fit(cls, X) -> "Standardizer":
        mean = X.mean(axis=0)
        std = X.std(axis=0)
        return cls(mean, np.where(std > 0, std, 1.0))

    def transform(self, X) -> np.ndarray:
        return (X - self.mean) / self.scale


def stratified_folds(y, k: int, seed: int) -> list[np.ndarray]:
    """Test-index arrays of ``k`` folds; each class is shuffled and dealt round-robin."""
    y = np.asarray(y)
    rng = np.random.default_rng(seed)
    folds = [[] for _ in range(k)]
    offset = 0
    for c in np.unique(y):
        idx = np.flatnonzero(y == c)
        rng.shuffle(idx)
        for r, i in enumerate(idx):
            folds[(r + offset) % k].append(i)
        # continue dealing where the previous class stopped to balance fold sizes
        offset = (offset + len(idx)) % k
    return [np.sort(np.array(f, dtype=int)) for f in folds]


@dataclass
class CVReport:
    per_fold_scores: list[float]
    mean: float
    std: float
    config: dict
    scalers: list | None = field(default=None, repr=False)

    def to_json(self) -> dict:
        d = asdict(self)
        d.pop("scalers")
        return d

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, d: dict) -> "CVReport":
        return cls(list(d["per_fold_scores"]), d["mean"], d["std"], d.get("config", {}))

    def table(self) -> str:
        c = self.config
        return (
            f"model={c.get('model')} k={c.get('k')} repeats={c.get('repeats')} seed={c.get('seed')}\n"
            f"micro-F1 mean={100 * self.mean:.2f}  std={100 * self.std:.2f}  "
            f"folds={len(self.per_fold_scores)}"
        )


def cross_validate(
    ds: Dataset,
    kind=ModelKind.LOGISTIC,
    hyper: Hyper = Hyper(),
    k: int = 5,
    repeats: int = 10,
    seed: int = 0,
    standardize: bool = True,
    keep_scalers: bool = False,
) -> CVReport:
    """Repeated stratified k-fold CV; repeat ``r`` shuffles with ``seed + r``."""
    kind = ModelKind(kind)
    _, counts = np.unique(ds.y, return_counts=True)
    if len(counts) < 2:
        raise SingleClassData("both classes must be present")
    if counts.min() < k:
        raise TooFewSamples(f"smallest class has {counts.min()} members, need >= {k}")
    scores = []
    scalers = [] if keep_scalers else None
    for r in range(repeats):
        for test in stratified_folds(ds.y, k, seed + r):
            train = np.setdiff1d(np.arange(len(ds.y)), test)
            Xtr, Xte = ds.X[train], ds.X[test]
            if standardize:
                sc = Standardizer.fit(Xtr)
                Xtr, Xte = sc.transform(Xtr), sc.transform(Xte)
                if keep_scalers:
                    scalers.append(sc)
            model = fit(Dataset([ds.ids[i] for i in train], Xtr, ds.y[train]), kind, hyper)
            scores.append(micro_f1(predict(model, Xte), ds.y[test]))
    config = {
        "model": kind.value,
        "k": k,
        "repeats": repeats,
        "seed": seed,
        "standardize": standardize,
        "hyper": asdict(hyper),
        "n_samples": len(ds.y),
        "n_positive": int(ds.y.sum()),
    }
    arr = np.array(scores)
    return CVReport([float(s) for s in scores], float(arr.mean()), float(arr.std()), config, scalers)


def gain(raw_score: float, aug_score: float) -> float:
    """Relative improvement in percent."""
    if raw_score == 0:
        raise ZeroDivisionError("gain relative to a zero raw score")
    return 100.0 * (aug_score - raw_score) / raw_score
