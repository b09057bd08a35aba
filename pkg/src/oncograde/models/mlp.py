"""Fully connected ReLU network with a softmax head, trained by
mini-batch gradient descent with momentum and validation-based early
stopping.

Initialization is He-style (normal scaled by sqrt(2 / fan_in)) drawn from
the caller's stream; batch order is reshuffled from the same stream every
epoch, so training is fully deterministic given (data, hyperparams, seed).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..core import RngStream, as_matrix, shuffle
from ..dataset import N_CLASSES
from .base import Hyperparams, proba_to_labels

_MOMENTUM = 0.9
_PATIENCE = 20
# mean cross-entropy over 3 classes sits near ln(3) at init; anything this
# large means the optimizer is oscillating out of control
_LOSS_BLOWUP = 50.0


@dataclass
class TrainHistory:
    train_loss: list[float] = field(default_factory=list)
    val_loss: list[float] = field(default_factory=list)
    train_accuracy: list[float] = field(default_factory=list)
    val_accuracy: list[float] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.train_loss)


@dataclass
class MlpModel:
    family = "mlp"
    weights: list[np.ndarray]
    biases: list[np.ndarray]
    history: TrainHistory

    @property
    def n_features(self) -> int:
        return self.weights[0].shape[0]

    def predict_proba(self, X) -> np.ndarray:
        X = as_matrix(X)
        if X.shape[1] != self.n_features:
            raise ValueError(
                f"dimension mismatch: model expects {self.n_features} features, got {X.shape[1]}"
            )
        logits = forward(self.weights, self.biases, X)
        return softmax(logits)

    def predict(self, X) -> np.ndarray:
        return proba_to_labels(self.predict_proba(X))

    def to_params(self) -> dict:
        return {
            "weights": [w.tolist() for w in self.weights],
            "biases": [b.tolist() for b in self.biases],
            "history": {
                "train_loss": self.history.train_loss,
                "val_loss": self.history.val_loss,
                "train_accuracy": self.history.train_accuracy,
                "val_accuracy": self.history.val_accuracy,
            },
        }

    @classmethod
    def from_params(cls, params: dict) -> "MlpModel":
        return cls(
            weights=[np.asarray(w, dtype=float) for w in params["weights"]],
            biases=[np.asarray(b, dtype=float) for b in params["biases"]],
            history=TrainHistory(**params["history"]),
        )


def init_params(layer_sizes: list[int], stream: RngStream):
    weights, biases = [], []
    for fan_in, fan_out in zip(layer_sizes[:-1], layer_sizes[1:]):
        scale = np.sqrt(2.0 / fan_in)
        w = np.empty((fan_in, fan_out))
        for r in range(fan_in):
            for c in range(fan_out):
                w[r, c] = scale * stream.normal()
        weights.append(w)
        biases.append(np.zeros(fan_out))
    return weights, biases


def forward(weights, biases, X) -> np.ndarray:
    a = X
    for w, b in zip(weights[:-1], biases[:-1]):
        a = np.maximum(a @ w + b, 0.0)
    return a @ weights[-1] + biases[-1]


def softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def _log_softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))


def mean_cross_entropy(weights, biases, X, y) -> float:
    logp = _log_softmax(forward(weights, biases, X))
    return float(-logp[np.arange(len(y)), y].mean())


def loss_and_grads(weights, biases, X, y):
    """Mean cross-entropy and its gradients w.r.t. every weight and bias."""
    activations = [X]
    a = X
    for w, b in zip(weights[:-1], biases[:-1]):
        a = np.maximum(a @ w + b, 0.0)
        activations.append(a)
    logits = a @ weights[-1] + biases[-1]

    n = X.shape[0]
    logp = _log_softmax(logits)
    loss = float(-logp[np.arange(n), y].mean())

    delta = softmax(logits)
    delta[np.arange(n), y] -= 1.0
    delta /= n

    grads_w = [None] * len(weights)
    grads_b = [None] * len(biases)
    for layer in range(len(weights) - 1, -1, -1):
        grads_w[layer] = activations[layer].T @ delta
        grads_b[layer] = delta.sum(axis=0)
        if layer > 0:
            delta = (delta @ weights[layer].T) * (activations[layer] > 0)
    return loss, grads_w, grads_b


def train_mlp(Xtr, ytr, Xval, yval, hp: Hyperparams, stream: RngStream) -> MlpModel:
    """Train with momentum SGD; early stopping on validation loss with
    patience 20, restoring the best-epoch weights."""
    Xtr, Xval = as_matrix(Xtr), as_matrix(Xval)
    ytr = np.asarray(ytr, dtype=np.int64)
    yval = np.asarray(yval, dtype=np.int64)
    if np.unique(ytr).size < 2:
        raise ValueError("training set contains a single class")

    sizes = [Xtr.shape[1]] + list(hp.hidden_layers) + [N_CLASSES]
    weights, biases = init_params(sizes, stream)
    vel_w = [np.zeros_like(w) for w in weights]
    vel_b = [np.zeros_like(b) for b in biases]

    history = TrainHistory()
    best_val = np.inf
    best_snapshot = None
    stale = 0
    n = Xtr.shape[0]

    for _epoch in range(hp.epochs):
        order = shuffle(range(n), stream)
        for start in range(0, n, hp.batch_size):
            batch = order[start : start + hp.batch_size]
            _, gw, gb = loss_and_grads(weights, biases, Xtr[batch], ytr[batch])
            for layer in range(len(weights)):
                vel_w[layer] = _MOMENTUM * vel_w[layer] - hp.learning_rate * gw[layer]
                vel_b[layer] = _MOMENTUM * vel_b[layer] - hp.learning_rate * gb[layer]
                weights[layer] = weights[layer] + vel_w[layer]
                biases[layer] = biases[layer] + vel_b[layer]

        train_loss = mean_cross_entropy(weights, biases, Xtr, ytr)
        val_loss = mean_cross_entropy(weights, biases, Xval, yval)
        if not (np.isfinite(train_loss) and np.isfinite(val_loss)) or train_loss > _LOSS_BLOWUP:
            raise ValueError(
                f"training diverged (exploding loss) at learning_rate={hp.learning_rate}"
            )
        model = MlpModel(weights, biases, history)
        history.train_loss.append(train_loss)
        history.val_loss.append(val_loss)
        history.train_accuracy.append(float((model.predict(Xtr) == ytr).mean()))
        history.val_accuracy.append(float((model.predict(Xval) == yval).mean()))

        if val_loss < best_val:
            best_val = val_loss
            best_snapshot = ([w.copy() for w in weights], [b.copy() for b in biases])
            stale = 0
        else:
            stale += 1
            if stale >= _PATIENCE:
                break

    weights, biases = best_snapshot
    return MlpModel(weights=weights, biases=biases, history=history)
