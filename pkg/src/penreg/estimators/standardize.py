"""Centering and scaling so that ``mean(y) = 0``, ``X'1 = 0`` and
``diag(X'X/n) = I``."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DegenerateColumnError, ValidationError
from ..linalg import as_vector
from ._types import Dataset

# A column whose 1/n standard deviation falls below this fraction of its
# largest magnitude is treated as constant.
_DEGENERATE_RTOL = 1e-12


@dataclass(frozen=True)
class StandardizeTransform:
    x_bar: np.ndarray
    y_bar: float
    scales: np.ndarray


def standardize(d: Dataset) -> tuple[Dataset, StandardizeTransform]:
    X, y = d.X, d.y
    n = d.n
    x_bar = X.mean(axis=0)
    y_bar = float(y.mean())
    Xc = X - x_bar
    scales = np.sqrt((Xc * Xc).sum(axis=0) / n)
    ref = np.maximum(np.abs(X).max(axis=0), np.finfo(float).tiny)
    for j in range(d.p):
        if not scales[j] > _DEGENERATE_RTOL * ref[j]:
            raise DegenerateColumnError(d.column_name(j))
    Xs = Xc / scales
    return Dataset(y=y - y_bar, X=Xs, names=d.names), StandardizeTransform(x_bar, y_bar, scales)


def destandardize(d: Dataset, t: StandardizeTransform) -> Dataset:
    """Undo :func:`standardize` on a dataset."""
    return Dataset(y=d.y + t.y_bar, X=d.X * t.scales + t.x_bar, names=d.names)


def to_original_scale(theta_std, t: StandardizeTransform) -> np.ndarray:
    """Map standardized-scale coefficients to the original column units."""
    theta_std = as_vector(theta_std, "theta", len(t.scales))
    return theta_std / t.scales


def recover_intercept(theta, t: StandardizeTransform) -> float:
    """Intercept ``y_bar - x_bar' theta`` for original-scale coefficients."""
    theta = as_vector(theta, "theta")
    if theta.shape[0] != t.x_bar.shape[0]:
        raise ValidationError(
            f"theta has length {theta.shape[0]}, transform has {t.x_bar.shape[0]} columns"
        )
    return float(t.y_bar - t.x_bar @ theta)
