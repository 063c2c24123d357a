"""Multinomial logistic regression with l1 or squared-l2 penalty.

The training objective is penalty(W) + C * sum of per-example negative
log-softmax losses, where C is the strength hyperparameter (a flag flips the
convention so strength scales the penalty instead).  An always-on intercept
per class is appended and excluded from the penalty.  Optimization starts
from zero weights, uses L-BFGS-B, and stops when the projected gradient
infinity norm falls below tolerance times the smooth-loss gradient norm at
zero, so runs are deterministic.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
import scipy.optimize
import scipy.sparse
from scipy.special import logsumexp

from .textrep import SparseVector

log = logging.getLogger(__name__)

PENALTIES = ("l1", "l2")

LabeledVector = tuple[SparseVector, str]


@dataclass(frozen=True)
class TrainConfig:
    penalty: str
    strength: float
    tolerance: float
    max_iterations: int = 1000
    strength_applies_to: str = "loss"  # or "penalty"

    def __post_init__(self) -> None:
        if self.penalty not in PENALTIES:
            raise ValueError(f"unknown penalty {self.penalty!r}, expected one of {PENALTIES}")
        if not 1e-5 <= self.strength <= 1e5:
            raise ValueError(f"strength must be in [1e-5, 1e5], got {self.strength}")
        if not 0.0 < self.tolerance < 1.0:
            raise ValueError(f"tolerance must be in (0, 1), got {self.tolerance}")
        if self.max_iterations < 1:
            raise ValueError(f"max_iterations must be positive, got {self.max_iterations}")
        if self.strength_applies_to not in ("loss", "penalty"):
            raise ValueError(f"strength_applies_to must be 'loss' or 'penalty'")

    @property
    def loss_weight(self) -> float:
        return self.strength if self.strength_applies_to == "loss" else 1.0

    @property
    def penalty_weight(self) -> float:
        return 1.0 if self.strength_applies_to == "loss" else self.strength


@dataclass
class Model:
    """Per-class weight vectors realizing argmax-of-linear-scores classification."""

    labels: tuple[str, ...]
    coef: np.ndarray  # (n_classes, n_features)
    intercept: np.ndarray  # (n_classes,)
    converged: bool = True

    def save(self, path: str | Path) -> None:
        """Write labels, feature count, and per-class weight arrays as an .npz file."""
        with open(path, "wb") as fh:
            np.savez(
                fh,
                labels=np.asarray(self.labels, dtype=str),
                coef=self.coef,
                intercept=self.intercept,
                converged=np.asarray([self.converged]),
            )

    @classmethod
    def load(cls, path: str | Path) -> "Model":
        with np.load(path, allow_pickle=False) as data:
            return cls(
                labels=tuple(str(x) for x in data["labels"]),
                coef=data["coef"],
                intercept=data["intercept"],
                converged=bool(data["converged"][0]),
            )


def _stack(data: Sequence[LabeledVector], dim: int) -> scipy.sparse.csr_matrix:
    indptr = np.zeros(len(data) + 1, dtype=np.int64)
    for row, (vec, _) in enumerate(data):
        indptr[row + 1] = indptr[row] + vec.indices.size
    indices = np.concatenate([vec.indices for vec, _ in data]) if data else np.empty(0, np.int64)
    values = np.concatenate([vec.values for vec, _ in data]) if data else np.empty(0)
    return scipy.sparse.csr_matrix((values, indices, indptr), shape=(len(data), dim))


def _label_indices(data: Sequence[LabeledVector], labels: Sequence[str]) -> np.ndarray:
    positions = {label: i for i, label in enumerate(labels)}
    try:
        return np.asarray([positions[label] for _, label in data], dtype=np.int64)
    except KeyError as exc:
        raise ValueError(f"label {exc} not in label set {tuple(labels)}") from exc


def _smooth_loss_grad(
    coef: np.ndarray,
    intercept: np.ndarray,
    x: scipy.sparse.csr_matrix,
    y_idx: np.ndarray,
    loss_weight: float,
) -> tuple[float, np.ndarray, np.ndarray]:
    """Weighted negative log-softmax loss with gradients for coef and intercept."""
    scores = x @ coef.T + intercept
    lse = logsumexp(scores, axis=1)
    loss = loss_weight * float(np.sum(lse - scores[np.arange(len(y_idx)), y_idx]))
    delta = np.exp(scores - lse[:, None])
    delta[np.arange(len(y_idx)), y_idx] -= 1.0
    grad_coef = loss_weight * np.asarray((x.T @ delta).T)
    grad_intercept = loss_weight * delta.sum(axis=0)
    return loss, grad_coef, grad_intercept


def objective_and_gradient(
    weights: np.ndarray,
    data: Sequence[LabeledVector],
    config: TrainConfig,
    labels: Sequence[str],
) -> tuple[float, np.ndarray]:
    """Training objective and gradient at ``weights`` of shape (n_classes, N + 1).

    The last column of ``weights`` is the unpenalized intercept.  For the l1
    penalty the returned gradient covers the smooth part only; subgradient
    handling belongs to the solver.
    """
    weights = np.asarray(weights, dtype=float)
    if weights.ndim != 2 or weights.shape[0] != len(labels):
        raise ValueError(f"expected weights of shape ({len(labels)}, N + 1)")
    dim = weights.shape[1] - 1
    for vec, _ in data:
        if vec.dim != dim:
            raise ValueError(f"vector dimension {vec.dim} != weight dimension {dim}")
    x = _stack(data, dim)
    y_idx = _label_indices(data, labels)
    coef, intercept = weights[:, :dim], weights[:, dim]
    loss, grad_coef, grad_intercept = _smooth_loss_grad(
        coef, intercept, x, y_idx, config.loss_weight
    )
    if config.penalty == "l2":
        value = loss + config.penalty_weight * 0.5 * float(np.sum(coef * coef))
        grad_coef = grad_coef + config.penalty_weight * coef
    else:
        value = loss + config.penalty_weight * float(np.sum(np.abs(coef)))
    if not np.isfinite(value):
        raise FloatingPointError("non-finite objective value")
    gradient = np.concatenate([grad_coef, grad_intercept[:, None]], axis=1)
    return value, gradient


def _solve_l2(
    x: scipy.sparse.csr_matrix, y_idx: np.ndarray, k: int, config: TrainConfig
) -> tuple[np.ndarray, np.ndarray, bool]:
    n_features = x.shape[1]

    def fun(flat: np.ndarray) -> tuple[float, np.ndarray]:
        w = flat.reshape(k, n_features + 1)
        coef, intercept = w[:, :n_features], w[:, n_features]
        loss, g_coef, g_int = _smooth_loss_grad(coef, intercept, x, y_idx, config.loss_weight)
        value = loss + config.penalty_weight * 0.5 * float(np.sum(coef * coef))
        g_coef = g_coef + config.penalty_weight * coef
        return value, np.concatenate([g_coef, g_int[:, None]], axis=1).ravel()

    x0 = np.zeros(k * (n_features + 1))
    _, g0 = fun(x0)
    g0_norm = float(np.max(np.abs(g0)))
    if g0_norm == 0.0:
        return np.zeros((k, n_features)), np.zeros(k), True
    result = scipy.optimize.minimize(
        fun,
        x0,
        jac=True,
        method="L-BFGS-B",
        options={
            "maxiter": config.max_iterations,
            "maxfun": 10**8,
            "ftol": 0.0,
            "gtol": config.tolerance * g0_norm,
        },
    )
    w = result.x.reshape(k, n_features + 1)
    return w[:, :n_features], w[:, n_features], bool(result.status == 0)


def _solve_l1(
    x: scipy.sparse.csr_matrix, y_idx: np.ndarray, k: int, config: TrainConfig
) -> tuple[np.ndarray, np.ndarray, bool]:
    # Split W = U - V with U, V >= 0; the l1 penalty becomes the smooth linear
    # term sum(U + V) under bound constraints, solvable by L-BFGS-B.
    n_features = x.shape[1]
    block = k * n_features

    def fun(z: np.ndarray) -> tuple[float, np.ndarray]:
        u, v, intercept = z[:block], z[block : 2 * block], z[2 * block :]
        coef = (u - v).reshape(k, n_features)
        loss, g_coef, g_int = _smooth_loss_grad(coef, intercept, x, y_idx, config.loss_weight)
        value = loss + config.penalty_weight * float(np.sum(u) + np.sum(v))
        g = g_coef.ravel()
        grad = np.concatenate([g + config.penalty_weight, -g + config.penalty_weight, g_int])
        return value, grad

    x0 = np.zeros(2 * block + k)
    _, g_coef0, g_int0 = _smooth_loss_grad(
        np.zeros((k, n_features)), np.zeros(k), x, y_idx, config.loss_weight
    )
    g0_norm = float(max(np.max(np.abs(g_coef0)), np.max(np.abs(g_int0)), 0.0))
    if g0_norm == 0.0:
        return np.zeros((k, n_features)), np.zeros(k), True
    bounds = [(0.0, None)] * (2 * block) + [(None, None)] * k
    result = scipy.optimize.minimize(
        fun,
        x0,
        jac=True,
        method="L-BFGS-B",
        bounds=bounds,
        options={
            "maxiter": config.max_iterations,
            "maxfun": 10**8,
            "ftol": 0.0,
            "gtol": config.tolerance * g0_norm,
        },
    )
    u, v, intercept = (
        result.x[:block],
        result.x[block : 2 * block],
        result.x[2 * block :],
    )
    return (u - v).reshape(k, n_features), intercept, bool(result.status == 0)


def train(
    data: Sequence[LabeledVector],
    config: TrainConfig,
    dim: int,
    labels: Sequence[str],
) -> Model:
    """Fit the model from zero initialization; deterministic for fixed inputs."""
    if not data:
        raise ValueError("empty training data")
    labels = tuple(labels)
    x = _stack(data, dim)
    y_idx = _label_indices(data, labels)
    solver = _solve_l2 if config.penalty == "l2" else _solve_l1
    coef, intercept, converged = solver(x, y_idx, len(labels), config)
    if not converged:
        log.warning("solver hit the iteration cap before reaching tolerance")
    return Model(labels, coef, intercept, converged)


def _scores(model: Model, x: scipy.sparse.csr_matrix) -> np.ndarray:
    return x @ model.coef.T + model.intercept


def predict(model: Model, vec: SparseVector) -> str:
    """Label with the highest linear score; ties break toward the earlier label."""
    if vec.dim != model.coef.shape[1]:
        raise ValueError(f"vector dimension {vec.dim} != model dimension {model.coef.shape[1]}")
    scores = model.coef[:, vec.indices] @ vec.values + model.intercept
    return model.labels[int(np.argmax(scores))]


def evaluate_accuracy(model: Model, dataset: Sequence[LabeledVector]) -> float:
    """Fraction of correct predictions over the dataset."""
    if not dataset:
        raise ValueError("empty evaluation dataset")
    x = _stack(dataset, model.coef.shape[1])
    predicted = np.argmax(_scores(model, x), axis=1)
    actual = _label_indices_lenient(dataset, model.labels)
    return float(np.mean(predicted == actual))


def _label_indices_lenient(dataset: Sequence[LabeledVector], labels: tuple[str, ...]) -> np.ndarray:
    # Labels unseen at training time can never be predicted; map them to -1.
    positions = {label: i for i, label in enumerate(labels)}
    return np.asarray([positions.get(label, -1) for _, label in dataset], dtype=np.int64)
