"""Estimators: least squares, ridgeless, ridge, lasso and brute-force l0.

The low-level solvers (``fit_ridgeless``, ``fit_lasso_cd``, ...) operate on
the data as given.  :func:`fit` is the public front door: it optionally
standardizes, fits, maps coefficients back to the original column units and
attaches the intercept.
"""

from __future__ import annotations

from dataclasses import replace

from ..errors import ValidationError
from ._types import CdOptions, Dataset, EstimatorKind, FitResult, LambdaPath
from .closed_form import (
    OnlineLsState,
    fit_ls,
    fit_ridge,
    fit_ridgeless,
    online_ls_init,
    online_ls_update,
    predict,
    ridge_from_ridgeless,
    ridge_theta_spectral,
    ridgeless_from_ridge,
    squared_loss,
)
from .l0 import fit_l0_brute
from .lasso import (
    fit_lasso_cd,
    kkt_violation,
    lambda_grid,
    lambda_max,
    lasso_objective,
    lasso_path,
    soft_threshold,
)
from .standardize import (
    StandardizeTransform,
    destandardize,
    recover_intercept,
    standardize,
    to_original_scale,
)

__all__ = [
    "CdOptions",
    "Dataset",
    "EstimatorKind",
    "FitResult",
    "LambdaPath",
    "OnlineLsState",
    "StandardizeTransform",
    "destandardize",
    "fit",
    "fit_l0_brute",
    "fit_lasso_cd",
    "fit_ls",
    "fit_ridge",
    "fit_ridgeless",
    "kkt_violation",
    "lambda_grid",
    "lambda_max",
    "lasso_objective",
    "lasso_path",
    "online_ls_init",
    "online_ls_update",
    "predict",
    "recover_intercept",
    "ridge_from_ridgeless",
    "ridge_theta_spectral",
    "ridgeless_from_ridge",
    "soft_threshold",
    "squared_loss",
    "standardize",
    "standardized_path",
    "to_original_scale",
]


def _fit_raw(d: Dataset, kind: EstimatorKind, lam, radius, opts) -> FitResult:
    if kind is EstimatorKind.LS:
        return fit_ls(d)
    if kind is EstimatorKind.RIDGELESS:
        return fit_ridgeless(d)
    if kind is EstimatorKind.RIDGE:
        if lam is None:
            raise ValidationError("ridge requires lambda")
        return fit_ridge(d, lam)
    if kind is EstimatorKind.LASSO:
        if lam is None:
            raise ValidationError("lasso requires lambda")
        return fit_lasso_cd(d, lam, opts)
    if radius is None:
        raise ValidationError("l0 requires a support radius R")
    return fit_l0_brute(d, radius)


def fit(
    d: Dataset,
    kind: EstimatorKind | str,
    lam: float | None = None,
    *,
    radius: int | None = None,
    standardize_data: bool = False,
    opts: CdOptions | None = None,
) -> FitResult:
    """Fit one estimator, optionally on standardized data.

    With ``standardize_data=True`` the solver sees centered, unit-variance
    columns and a centered response; the returned ``theta`` is on the
    original column scale and ``intercept`` is ``y_bar - x_bar' theta``.
    ``objective`` and ``kkt_violation`` refer to the standardized problem.
    """
    kind = EstimatorKind(kind)
    if not standardize_data:
        return _fit_raw(d, kind, lam, radius, opts)
    ds, t = standardize(d)
    res = _fit_raw(ds, kind, lam, radius, opts)
    theta = to_original_scale(res.theta, t)
    return replace(res, theta=theta, intercept=recover_intercept(theta, t), standardized=True)


def standardized_path(
    d: Dataset, n_lambda: int, ratio: float, opts: CdOptions | None = None
) -> tuple[LambdaPath, StandardizeTransform]:
    """Lasso path on standardized data, coefficients mapped to original scale."""
    ds, t = standardize(d)
    path = lasso_path(ds, n_lambda, ratio, opts)
    fits = []
    for f in path.fits:
        theta = to_original_scale(f.theta, t)
        fits.append(replace(f, theta=theta, intercept=recover_intercept(theta, t), standardized=True))
    return replace(path, fits=tuple(fits)), t
