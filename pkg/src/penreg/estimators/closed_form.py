"""Least squares, ridgeless and ridge fits, the ridge/ridgeless transfer
identities, and the rank-one online least-squares update."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import PreconditionError, SingularityError, ValidationError
from ..linalg import as_matrix, as_vector, min_norm_solve_svd, pinv, svd
from ._types import Dataset, EstimatorKind, FitResult


def predict(X, theta) -> np.ndarray:
    X = as_matrix(X, "X")
    theta = as_vector(theta, "theta")
    if theta.shape[0] != X.shape[1]:
        raise ValidationError(
            f"X has {X.shape[1]} columns but theta has length {theta.shape[0]}"
        )
    return X @ theta


def squared_loss(d: Dataset, theta) -> float:
    """``||y - X theta||^2 / 2``."""
    r = d.y - d.X @ theta
    return 0.5 * float(r @ r)


def fit_ridgeless(d: Dataset, tol: float | None = None) -> FitResult:
    """Minimum-norm least-squares fit ``X^+ y``."""
    f = svd(d.X, tol)
    theta = min_norm_solve_svd(f, d.y)
    return FitResult(EstimatorKind.RIDGELESS, theta, objective=squared_loss(d, theta))


def fit_ls(d: Dataset, tol: float | None = None) -> FitResult:
    """Least squares for a full column rank design.

    Raises :class:`PreconditionError` when ``Rank(X) < p``; the solution set
    is then an affine subspace and :func:`fit_ridgeless` picks its
    minimum-norm element.
    """
    f = svd(d.X, tol)
    if f.rank < d.p:
        raise PreconditionError(
            f"least squares is not unique: rank(X) = {f.rank} < p = {d.p}; use ridgeless"
        )
    theta = min_norm_solve_svd(f, d.y)
    return FitResult(EstimatorKind.LS, theta, objective=squared_loss(d, theta))


def _check_lambda(lam) -> float:
    lam = float(lam)
    if not lam > 0 or not np.isfinite(lam):
        raise ValidationError(f"lambda must be a finite positive number, got {lam}")
    return lam


def ridge_theta_spectral(f, y: np.ndarray, lam: float) -> np.ndarray:
    """``sum_j s_j / (s_j^2 + lam) v_j u_j' y`` over the numerical rank."""
    s = f.s_r
    return f.V_r @ ((s / (s * s + lam)) * (f.U_r.T @ y))


def fit_ridge(d: Dataset, lam: float, tol: float | None = None) -> FitResult:
    """Ridge fit ``(X'X + lam I)^{-1} X'y``, evaluated in the singular basis."""
    lam = _check_lambda(lam)
    f = svd(d.X, tol)
    theta = ridge_theta_spectral(f, d.y, lam)
    objective = squared_loss(d, theta) + 0.5 * lam * float(theta @ theta)
    return FitResult(EstimatorKind.RIDGE, theta, objective=objective, lam=lam)


def ridge_from_ridgeless(d: Dataset, ridgeless_theta, lam: float) -> np.ndarray:
    """``(X'X + lam I)^{-1} X'X theta_rl``."""
    lam = _check_lambda(lam)
    theta = as_vector(ridgeless_theta, "ridgeless_theta", d.p)
    G = d.X.T @ d.X
    return np.linalg.solve(G + lam * np.eye(d.p), G @ theta)


def ridgeless_from_ridge(d: Dataset, ridge_theta, lam: float) -> np.ndarray:
    """``(X'X)^+ (X'X + lam I) theta_r``."""
    lam = _check_lambda(lam)
    theta = as_vector(ridge_theta, "ridge_theta", d.p)
    G = d.X.T @ d.X
    return pinv(G) @ ((G + lam * np.eye(d.p)) @ theta)


@dataclass(frozen=True)
class OnlineLsState:
    """``inv`` is ``(X'X)^{-1}`` of the rows seen so far, ``theta`` their LSE."""

    inv: np.ndarray
    theta: np.ndarray
    n: int = 0


def online_ls_init(X, y) -> OnlineLsState:
    """Batch start for the online recursion; ``X`` must have full column rank."""
    d = Dataset(y=y, X=X)
    f = svd(d.X)
    if f.rank < d.p:
        raise PreconditionError(f"initial block has rank {f.rank} < p = {d.p}")
    inv = (f.V / f.s**2) @ f.V.T
    return OnlineLsState(inv=inv, theta=min_norm_solve_svd(f, d.y), n=d.n)


def online_ls_update(state: OnlineLsState, x_new, y_new: float) -> OnlineLsState:
    """Append one observation via the Sherman-Morrison rank-one update."""
    p = state.theta.shape[0]
    x = as_vector(x_new, "x_new", p)
    eta = state.inv @ x
    a = float(x @ eta)
    if 1.0 + a <= 1e-12:
        raise SingularityError(f"rank-one update is singular (1 + a = {1.0 + a:g})")
    u = float(y_new) - float(x @ state.theta)
    inv = state.inv - np.outer(eta, eta) / (1.0 + a)
    inv = 0.5 * (inv + inv.T)
    theta = state.theta + (u / (1.0 + a)) * eta
    return OnlineLsState(inv=inv, theta=theta, n=state.n + 1)
