"""Linear classifiers trained by Pegasos-style primal SGD over sparse rows.

Both losses share one kernel: hinge loss gives the primal SVM, log loss gives
logistic regression. The weight vector is kept as ``a * v`` so the per-step
shrinkage ``(1 - 1/t)`` costs O(1) instead of O(arity). The bias is an extra
always-one feature and is regularized like any other weight. After each step
the weights are projected onto the ball known to contain the optimum
(radius ``1/sqrt(lam)`` for hinge, ``sqrt(2 ln 2 / lam)`` for log loss), which
keeps the early large-step iterates from overshooting.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List

import numpy as np
from numba import njit
from scipy import sparse

from ..container import read_container, write_container
from ..errors import ArtifactError, SingleClassTraining

MAGIC = "CPLIN1"
LOSSES = ("hinge", "log")


def as_csr(X) -> sparse.csr_matrix:
    X = getattr(X, "X", X)
    X = sparse.csr_matrix(X, dtype=np.float64)
    X.sum_duplicates()
    X.sort_indices()
    return X


@njit(cache=True)
def _sgd_epoch(indptr, indices, data, y, order, v, state, lam, logistic, radius):
    # state = [a (scale), t (step counter), vb (scaled bias), |v|^2 + vb^2]
    a = state[0]
    t = state[1]
    vb = state[2]
    sq = state[3]
    for r in order:
        t += 1.0
        eta = 1.0 / (lam * t)
        m = vb
        for j in range(indptr[r], indptr[r + 1]):
            m += v[indices[j]] * data[j]
        m *= a * y[r]
        if logistic:
            if m > 0:
                g = math.exp(-m) / (1.0 + math.exp(-m))
            else:
                g = 1.0 / (1.0 + math.exp(m))
        else:
            g = 1.0 if m < 1.0 else 0.0
        shrink = 1.0 - 1.0 / t
        if shrink <= 0.0:
            for j in range(v.shape[0]):
                v[j] = 0.0
            vb = 0.0
            sq = 0.0
            a = 1.0
        else:
            a *= shrink
        if g > 0.0:
            c = eta * g * y[r] / a
            for j in range(indptr[r], indptr[r + 1]):
                old = v[indices[j]]
                new = old + c * data[j]
                v[indices[j]] = new
                sq += new * new - old * old
            sq += (vb + c) * (vb + c) - vb * vb
            vb += c
        norm = a * math.sqrt(max(sq, 0.0))
        if norm > radius:
            a *= radius / norm
        if a < 1e-9:
            sq = 0.0
            for j in range(v.shape[0]):
                v[j] *= a
                sq += v[j] * v[j]
            vb *= a
            sq += vb * vb
            a = 1.0
    state[0] = a
    state[1] = t
    state[2] = vb
    state[3] = sq


def hinge_loss(margins):
    return np.maximum(0.0, 1.0 - margins)


def log_loss(margins):
    return np.logaddexp(0.0, -margins)


def objective(w, b, X, y, lam, loss="hinge") -> float:
    """Regularized primal objective ``lam/2 (|w|^2 + b^2) + mean loss``."""
    m = y * (as_csr(X) @ w + b)
    fn = hinge_loss if loss == "hinge" else log_loss
    return 0.5 * lam * (float(w @ w) + b * b) + float(fn(m).mean())


def log_loss_grad(w, b, X, y, lam):
    """Analytic gradient of the logistic objective, for gradient checks."""
    X = as_csr(X)
    m = y * (X @ w + b)
    s = -y / (1.0 + np.exp(m)) / len(y)
    return lam * w + X.T @ s, lam * b + float(s.sum())


@dataclass
class LinearConfig:
    loss: str = "hinge"
    lam: float = 1e-4
    epochs: int = 50
    seed: int = 0

    def __post_init__(self):
        if self.loss not in LOSSES:
            raise ValueError(f"loss must be one of {LOSSES}")
        if self.lam <= 0 or self.epochs < 1:
            raise ValueError("lam > 0 and epochs >= 1 required")


@dataclass
class LinearModel:
    config: LinearConfig
    weights: np.ndarray
    bias: float
    history: List[float] = field(default_factory=list)
    blocks: tuple = ()
    threshold: float = 0.0

    @property
    def arity(self) -> int:
        return self.weights.shape[0]

    def decision_score(self, X) -> np.ndarray:
        X = as_csr(X)
        if X.shape[1] != self.arity:
            raise ValueError(f"expected {self.arity} features, got {X.shape[1]}")
        return X @ self.weights + self.bias

    def predict(self, X) -> np.ndarray:
        return np.where(self.decision_score(X) > self.threshold, 1, -1)


def _labels(y) -> np.ndarray:
    y = np.where(np.asarray(y) > 0, 1.0, -1.0)
    if y.size == 0 or np.all(y == y[0]):
        raise SingleClassTraining("training data must contain both classes")
    return y


def train_linear(X, y, config: LinearConfig = None, blocks=()) -> LinearModel:
    """Fit ``sign(w.x + b)``.

    The returned weights average the iterates at the end of every epoch, and
    ``history`` holds the objective of that average after each epoch.
    """
    config = config or LinearConfig()
    X = as_csr(X)
    y = _labels(y)
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(config.seed)))
    v = np.zeros(X.shape[1])
    state = np.array([1.0, 0.0, 0.0, 0.0])
    logistic = config.loss == "log"
    radius = math.sqrt((2.0 * math.log(2.0) if logistic else 1.0) / config.lam)
    history = []
    w_avg = np.zeros(X.shape[1])
    b_avg = 0.0
    for e in range(1, config.epochs + 1):
        order = rng.permutation(X.shape[0]).astype(np.int64)
        _sgd_epoch(X.indptr.astype(np.int64), X.indices.astype(np.int64), X.data, y, order,
                   v, state, config.lam, logistic, radius)
        # running mean of epoch-end iterates; the last iterate alone is too noisy
        w_avg += (v * state[0] - w_avg) / e
        b_avg += (state[2] * state[0] - b_avg) / e
        history.append(objective(w_avg, b_avg, X, y, config.lam, config.loss))
    return LinearModel(config, w_avg, float(b_avg), history, tuple(blocks))


def save_linear(model: LinearModel, path, extra: dict = None) -> None:
    header = {
        "loss": model.config.loss, "lam": model.config.lam, "epochs": model.config.epochs,
        "seed": model.config.seed, "arity": model.arity, "threshold": model.threshold,
        "blocks": [list(b) for b in model.blocks], "extra": extra or {},
    }
    packed = np.r_[model.weights, model.bias]
    write_container(path, MAGIC, header, {"weights": ("f32", packed)})


def load_linear(path):
    """Returns ``(model, extra)``; weights come back at float32 precision."""
    header, arrays = read_container(path, MAGIC)
    packed = arrays["weights"].astype(np.float64)
    if packed.shape[0] != header["arity"] + 1:
        raise ArtifactError("weight vector does not match declared arity")
    cfg = LinearConfig(header["loss"], header["lam"], header["epochs"], header["seed"])
    model = LinearModel(cfg, packed[:-1], float(packed[-1]), [],
                        tuple(tuple(b) for b in header["blocks"]), header["threshold"])
    return model, header.get("extra", {})
