"""Gaussian naive Bayes over region signatures, evaluated in log space."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import N_CLASSES, ClassId
from .errors import ClassUnderrepresented, DimensionMismatch

VARIANCE_FLOOR = 1e-6
_HALF_LOG_2PI = 0.5 * math.log(2 * math.pi)


@dataclass(frozen=True, eq=False)
class GaussianNbModel:
    priors: np.ndarray     # (n_classes,)
    feat_mean: np.ndarray  # (n_classes, dim)
    feat_var: np.ndarray   # (n_classes, dim), each >= variance_floor
    variance_floor: float = VARIANCE_FLOOR

    def __post_init__(self):
        priors = np.array(self.priors, dtype=np.float64)
        mean = np.array(self.feat_mean, dtype=np.float64)
        var = np.array(self.feat_var, dtype=np.float64)
        if mean.ndim != 2 or mean.shape != var.shape or mean.shape[0] != len(priors):
            raise DimensionMismatch("inconsistent naive Bayes parameter shapes")
        if np.any(priors <= 0) or abs(priors.sum() - 1.0) > 1e-12:
            raise ValueError("priors must be positive and sum to 1")
        if np.any(var < self.variance_floor):
            raise ValueError("variance below floor")
        for name, arr in (("priors", priors), ("feat_mean", mean), ("feat_var", var)):
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @property
    def n_classes(self) -> int:
        return len(self.priors)

    @property
    def feature_dim(self) -> int:
        return self.feat_mean.shape[1]

    def __eq__(self, other):
        if not isinstance(other, GaussianNbModel):
            return NotImplemented
        return (self.variance_floor == other.variance_floor
                and all(np.array_equal(getattr(self, f), getattr(other, f))
                        for f in ("priors", "feat_mean", "feat_var")))


def fit(signatures, labels, n_classes: int = N_CLASSES,
        variance_floor: float = VARIANCE_FLOOR) -> GaussianNbModel:
    """Class frequencies as priors; per-class mean and population variance per feature."""
    try:
        x = np.asarray(signatures, dtype=np.float64)
    except ValueError as exc:  # ragged rows
        raise DimensionMismatch("signatures must share one dimension") from exc
    y = np.asarray([int(c) for c in labels], dtype=np.int64)
    if x.ndim != 2:
        raise DimensionMismatch("signatures must share one dimension")
    if len(x) != len(y):
        raise DimensionMismatch(f"{len(x)} signatures but {len(y)} labels")
    counts = np.bincount(y[y >= 0], minlength=n_classes)[:n_classes]
    if np.any(y < 0) or np.any(y >= n_classes):
        raise ValueError("labels must be semantic class ordinals")
    if np.any(counts < 2):
        short = [ClassId(i).name for i in np.flatnonzero(counts < 2)] if n_classes == N_CLASSES \
            else np.flatnonzero(counts < 2).tolist()
        raise ClassUnderrepresented(f"fewer than 2 training samples for {short}")

    mean = np.empty((n_classes, x.shape[1]))
    var = np.empty_like(mean)
    for c in range(n_classes):
        xc = x[y == c]
        mean[c] = xc.mean(axis=0)
        var[c] = ((xc - mean[c]) ** 2).mean(axis=0)
    priors = counts / counts.sum()
    return GaussianNbModel(priors, mean, np.maximum(var, variance_floor), variance_floor)


def _as_matrix(model: GaussianNbModel, x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != model.feature_dim:
        raise DimensionMismatch(f"feature dim {x.shape[-1]} != model dim {model.feature_dim}")
    return x


def log_posterior_scores(model: GaussianNbModel, x) -> np.ndarray:
    """Unnormalized log posterior per class; ``(n_classes,)`` or ``(n, n_classes)`` for a batch."""
    x = _as_matrix(model, x)
    # (..., 1, dim) against (n_classes, dim)
    diff = x[..., None, :] - model.feat_mean
    log_lik = -(_HALF_LOG_2PI + 0.5 * np.log(model.feat_var)) - diff ** 2 / (2.0 * model.feat_var)
    return np.log(model.priors) + log_lik.sum(axis=-1)


def predict(model: GaussianNbModel, x):
    """Most probable class; ties go to the lowest class ordinal."""
    scores = log_posterior_scores(model, x)
    best = scores.argmax(axis=-1)
    if np.ndim(best) == 0:
        return ClassId(int(best)) if model.n_classes == N_CLASSES else int(best)
    return best
