"""Cyclical coordinate descent for the lasso and its pathwise driver.

The objective is ``||y - X theta||^2 / (2n) + lam ||theta||_1``.  Solvers work
on the data exactly as given; callers that want an intercept standardize
first (see :func:`penreg.estimators.fit`).
"""

from __future__ import annotations

import numpy as np

from ..errors import DegenerateColumnError, ValidationError
from ._types import CdOptions, Dataset, EstimatorKind, FitResult, LambdaPath
from .closed_form import fit_ridge, fit_ridgeless


def soft_threshold(eta, lam):
    """``sign(eta) * max(|eta| - lam, 0)``; works on scalars and arrays."""
    if np.any(np.asarray(lam) < 0):
        raise ValidationError("threshold must be >= 0")
    out = np.sign(eta) * np.maximum(np.abs(eta) - lam, 0.0)
    return float(out) if np.ndim(out) == 0 else out


def _correlations(d: Dataset) -> np.ndarray:
    # Shared by lambda_max and the solver so the zero solution is exact at lambda_max.
    return d.X.T @ d.y / d.n


def lambda_max(d: Dataset) -> float:
    """Smallest penalty whose lasso solution is the zero vector: ``max_j |X_j'y/n|``."""
    return float(np.max(np.abs(_correlations(d))))


def lasso_objective(d: Dataset, theta, lam: float) -> float:
    r = d.y - d.X @ theta
    return float(r @ r) / (2 * d.n) + lam * float(np.abs(theta).sum())


def kkt_violation(d: Dataset, theta, lam: float) -> float:
    """Largest violation of the lasso subgradient conditions at ``theta``.

    Zero coordinates need ``|X_j'r/n| <= lam``; nonzero ones need
    ``X_j'r/n = lam * sign(theta_j)``, with ``r = y - X theta``.
    """
    theta = np.asarray(theta, dtype=float)
    g = d.X.T @ (d.y - d.X @ theta) / d.n
    active = theta != 0
    v_zero = np.maximum(np.abs(g[~active]) - lam, 0.0)
    v_active = np.abs(g[active] - lam * np.sign(theta[active]))
    return float(max(v_zero.max(initial=0.0), v_active.max(initial=0.0)))


def _initial_theta(d: Dataset, opts: CdOptions) -> np.ndarray:
    init = opts.init
    if isinstance(init, np.ndarray):
        if init.shape[0] != d.p:
            raise ValidationError(f"warm start has length {init.shape[0]}, expected {d.p}")
        return init.astype(float, copy=True)
    if init == "ridge":
        return fit_ridge(d, opts.init_lambda).theta.copy()
    if init == "ridgeless":
        return fit_ridgeless(d).theta.copy()
    return np.zeros(d.p)


def fit_lasso_cd(
    d: Dataset,
    lam: float,
    opts: CdOptions | None = None,
    *,
    track_objective: bool = False,
) -> FitResult:
    """Lasso by cyclical coordinate descent in natural column order.

    Each sweep applies the exact coordinate minimizer
    ``theta_j <- S_lam(X_j'e_j/n) / (X_j'X_j/n)`` with ``e_j`` the partial
    residual.  The sweep stops once no coordinate moved by more than
    ``opts.tol`` and the KKT conditions hold to ``opts.kkt_tol`` (scaled by
    ``max(1, lambda_max)``).  Running out of sweeps is reported through
    ``converged=False``, never raised.
    """
    opts = opts or CdOptions()
    lam = float(lam)
    if not lam > 0 or not np.isfinite(lam):
        raise ValidationError(f"lambda must be a finite positive number, got {lam}")
    X = d.X
    G = X.T @ X / d.n
    diag = G.diagonal().copy()
    bad = np.flatnonzero(~(diag > 0))
    if bad.size:
        name = d.column_name(int(bad[0]))
        raise DegenerateColumnError(name, f"column {name!r} has zero norm")
    c = _correlations(d)
    kkt_tol = opts.kkt_tol * max(1.0, float(np.max(np.abs(c))))

    theta = _initial_theta(d, opts)
    # grad = X'(y - X theta)/n, kept current under single-coordinate moves
    grad = c - G @ theta
    history = [lasso_objective(d, theta, lam)] if track_objective else []
    p = d.p
    converged = False
    kkt = float("nan")
    it = 0
    while it < opts.max_iterations:
        it += 1
        max_change = 0.0
        for j in range(p):
            old = theta[j]
            z = grad[j] + diag[j] * old
            if z > lam:
                new = (z - lam) / diag[j]
            elif z < -lam:
                new = (z + lam) / diag[j]
            else:
                new = 0.0
            delta = new - old
            if delta != 0.0:
                theta[j] = new
                grad -= G[:, j] * delta
                if abs(delta) > max_change:
                    max_change = abs(delta)
        if track_objective:
            history.append(lasso_objective(d, theta, lam))
        if max_change < opts.tol:
            grad = c - G @ theta
            kkt = kkt_violation(d, theta, lam)
            if kkt <= kkt_tol:
                converged = True
                break
    if not converged:
        kkt = kkt_violation(d, theta, lam)
    return FitResult(
        EstimatorKind.LASSO,
        theta,
        objective=lasso_objective(d, theta, lam),
        lam=lam,
        iterations=it,
        converged=converged,
        kkt_violation=kkt,
        objective_history=tuple(history),
    )


def lambda_grid(lam_max: float, n_lambda: int, ratio: float) -> np.ndarray:
    """Log-spaced decreasing grid from ``lam_max`` to ``ratio * lam_max``."""
    if n_lambda < 2:
        raise ValidationError("n_lambda must be >= 2")
    if not 0 < ratio < 1:
        raise ValidationError("ratio must lie in (0, 1)")
    if not lam_max > 0:
        raise ValidationError("lambda_max is zero: y is orthogonal to every column")
    grid = lam_max * ratio ** (np.arange(n_lambda) / (n_lambda - 1))
    grid[0] = lam_max
    return grid


def lasso_path(
    d: Dataset,
    n_lambda: int = 100,
    ratio: float = 1e-3,
    opts: CdOptions | None = None,
) -> LambdaPath:
    """Pathwise coordinate descent, each fit warm-started from the previous one."""
    opts = opts or CdOptions()
    lam_max = lambda_max(d)
    grid = lambda_grid(lam_max, n_lambda, ratio)
    fits = []
    warm = np.zeros(d.p)
    for lam in grid:
        fit = fit_lasso_cd(
            d,
            lam,
            CdOptions(max_iterations=opts.max_iterations, tol=opts.tol, kkt_tol=opts.kkt_tol, init=warm),
        )
        fits.append(fit)
        warm = fit.theta
    return LambdaPath(grid=grid, fits=tuple(fits), lambda_max=lam_max)
