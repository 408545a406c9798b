"""Risk functionals and exact fixed-design risk of LSE, ridgeless and ridge.

Conventions
-----------
``lambda_j`` denotes the eigenvalues of ``X'X/n``, obtained as ``s_j**2 / n``
from the SVD of ``X``.  Ridge penalties ``lam`` are on the unscaled problem
``||y - X theta||^2/2 + lam/2 ||theta||^2``, so they enter the spectral
formulas as ``lam / n``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .errors import PreconditionError, ValidationError
from .estimators import EstimatorKind
from .linalg import (
    ProjectorKind,
    as_matrix,
    as_vector,
    pinv,
    projector,
    projector_from_svd,
    svd,
)

_SYM_TOL = 1e-10


@dataclass(frozen=True)
class RiskReport:
    """Bias/variance/MSE/MPR summary of one estimator configuration.

    For theoretical reports ``mse == bias_norm_sq + trace_var`` and
    ``mpr == pred_bias_sq + pred_var``.  Empirical reports carry standard
    errors (sample std over replications divided by sqrt(R)).
    """

    kind: str
    bias_norm_sq: float
    trace_var: float
    mse: float
    mpr: float
    source: str = "theoretical"
    pred_bias_sq: float | None = None
    pred_var: float | None = None
    lam: float | None = None
    replications: int | None = None
    mse_se: float | None = None
    mpr_se: float | None = None
    bias: np.ndarray | None = field(default=None, repr=False)
    mean_theta: np.ndarray | None = field(default=None, repr=False)
    mean_theta_se: np.ndarray | None = field(default=None, repr=False)
    conditional_on_design: bool = False


@dataclass(frozen=True)
class Estimand:
    """Population target ``theta0_rl = E[xx']^+ E[xy]`` and noise level."""

    theta0_rl: np.ndarray
    sigma: float
    second_moment: np.ndarray
    rank0: int | None = None

    def __post_init__(self):
        M = as_matrix(self.second_moment, "second_moment")
        theta = as_vector(self.theta0_rl, "theta0_rl", M.shape[1])
        _check_psd(M)
        if not self.sigma > 0:
            raise ValidationError(f"sigma must be > 0, got {self.sigma}")
        f = svd(M)
        P = projector_from_svd(f, ProjectorKind.RANGE_XT)
        resid = np.linalg.norm(theta - P @ theta)
        if resid > 1e-9 * max(1.0, np.linalg.norm(theta)):
            raise ValidationError("theta0_rl is not in the range of the second moment")
        object.__setattr__(self, "second_moment", M)
        object.__setattr__(self, "theta0_rl", theta)
        object.__setattr__(self, "rank0", f.rank)

    @classmethod
    def from_design(cls, X, theta0, sigma: float) -> "Estimand":
        """Fixed-design estimand: second moment ``X'X/n``, target ``P_{Range(X')} theta0``."""
        X = as_matrix(X, "X")
        theta0 = as_vector(theta0, "theta0", X.shape[1])
        M = X.T @ X / X.shape[0]
        return cls(projector(X, ProjectorKind.RANGE_XT) @ theta0, sigma, M)

    @classmethod
    def from_population(cls, second_moment, theta0, sigma: float) -> "Estimand":
        """Population target for ``y = x'theta0 + eps`` with ``E[x eps] = 0``."""
        M = as_matrix(second_moment, "second_moment")
        theta0 = as_vector(theta0, "theta0", M.shape[1])
        sol = ridgeless_estimand(M, M @ theta0)
        return cls(sol.theta, sigma, M)


def _check_psd(M: np.ndarray) -> None:
    if M.shape[0] != M.shape[1]:
        raise ValidationError(f"second moment must be square, got {M.shape}")
    scale = max(1.0, float(np.abs(M).max()))
    if np.abs(M - M.T).max() > _SYM_TOL * scale:
        raise ValidationError("second moment is not symmetric")
    if np.linalg.eigvalsh(0.5 * (M + M.T)).min() < -_SYM_TOL * scale:
        raise ValidationError("second moment is not positive semi-definite")


def empirical_risks(theta_hat, theta0, X) -> tuple[float, float]:
    """Estimation risk ``||theta_hat - theta0||^2`` and predictive risk
    ``||X (theta_hat - theta0)||^2 / n``."""
    X = as_matrix(X, "X")
    diff = as_vector(theta_hat, "theta_hat", X.shape[1]) - as_vector(theta0, "theta0", X.shape[1])
    Xd = X @ diff
    return float(diff @ diff), float(Xd @ Xd) / X.shape[0]


class RidgelessEstimand(NamedTuple):
    theta: np.ndarray
    solution_set_empty: bool


def ridgeless_estimand(second_moment, cross_moment) -> RidgelessEstimand:
    """``E[xx']^+ E[xy]``.

    ``solution_set_empty`` is set when ``E[xy]`` has a component outside
    ``Range(E[xx'])`` (relative residual above 1e-8), in which case no
    coefficient satisfies the population normal equations.
    """
    M = as_matrix(second_moment, "second_moment")
    c = as_vector(cross_moment, "cross_moment", M.shape[0])
    _check_psd(M)
    f = svd(M)
    theta = f.V_r @ ((f.U_r.T @ c) / f.s_r)
    resid = c - f.U_r @ (f.U_r.T @ c)
    empty = bool(np.linalg.norm(resid) > 1e-8 * max(np.linalg.norm(c), np.finfo(float).tiny))
    return RidgelessEstimand(theta, empty)


def linear_estimator_moments(A, X, theta0, sigma: float, kind: str = "linear") -> RiskReport:
    """Exact moments of ``theta_hat = A y`` when ``y = X theta0 + eps``,
    ``Var[eps] = sigma^2 I``."""
    A = as_matrix(A, "A")
    X = as_matrix(X, "X")
    n, p = X.shape
    if A.shape != (p, n):
        raise ValidationError(f"A must be {p}x{n}, got {A.shape[0]}x{A.shape[1]}")
    theta0 = as_vector(theta0, "theta0", p)
    if not sigma > 0:
        raise ValidationError("sigma must be > 0")
    bias = A @ (X @ theta0) - theta0
    AAt = A @ A.T
    trace_var = sigma**2 * float(np.trace(AAt))
    Xb = X @ bias
    pred_bias = float(Xb @ Xb) / n
    pred_var = sigma**2 * float(np.trace(X.T @ X @ AAt)) / n
    bias_sq = float(bias @ bias)
    return RiskReport(
        kind=kind,
        bias_norm_sq=bias_sq,
        trace_var=trace_var,
        mse=bias_sq + trace_var,
        mpr=pred_bias + pred_var,
        pred_bias_sq=pred_bias,
        pred_var=pred_var,
        bias=bias,
    )


def theoretical_risk(
    kind: EstimatorKind | str, X, est: Estimand, lam: float | None = None
) -> RiskReport:
    """Closed-form fixed-design risk of LSE, ridgeless or ridge(``lam``).

    The bias is measured against ``est.theta0_rl``.  For ridge the predictive
    risk includes the squared prediction bias ``||X (I - Q) theta0||^2 / n``
    in addition to the variance term ``(sigma^2/n) sum lambda_j^2 /
    (lambda_j + lam/n)^2`` (reported separately as ``pred_var``).
    """
    kind = EstimatorKind(kind)
    X = as_matrix(X, "X")
    n, p = X.shape
    theta0 = est.theta0_rl
    if theta0.shape[0] != p:
        raise ValidationError(f"estimand has length {theta0.shape[0]}, X has {p} columns")
    sigma2 = est.sigma**2
    f = svd(X)
    eig = f.s_r**2 / n
    r = f.rank

    if kind is EstimatorKind.LS:
        if r < p:
            raise PreconditionError(f"LSE risk needs rank(X) = p; got rank {r} < {p}")
        trace_var = sigma2 / n * float(np.sum(1.0 / eig))
        return RiskReport("ls", 0.0, trace_var, trace_var, p * sigma2 / n,
                          pred_bias_sq=0.0, pred_var=p * sigma2 / n, bias=np.zeros(p))

    if kind is EstimatorKind.RIDGELESS:
        bias = -projector_from_svd(f, ProjectorKind.KER_X) @ theta0
        bias_sq = float(bias @ bias)
        trace_var = sigma2 / n * float(np.sum(1.0 / eig))
        return RiskReport("ridgeless", bias_sq, trace_var, bias_sq + trace_var, r * sigma2 / n,
                          pred_bias_sq=0.0, pred_var=r * sigma2 / n, bias=bias)

    if kind is EstimatorKind.RIDGE:
        if lam is None or not lam > 0:
            raise ValidationError("ridge risk requires lambda > 0")
        shrink = eig / (eig + lam / n)
        V = f.V_r
        bias = V @ (shrink * (V.T @ theta0)) - theta0  # (Q - I) theta0
        bias_sq = float(bias @ bias)
        trace_var = sigma2 / n * float(np.sum(eig / (eig + lam / n) ** 2))
        Xb = X @ bias
        pred_bias = float(Xb @ Xb) / n
        pred_var = sigma2 / n * float(np.sum(shrink**2))
        return RiskReport("ridge", bias_sq, trace_var, bias_sq + trace_var, pred_bias + pred_var,
                          pred_bias_sq=pred_bias, pred_var=pred_var, lam=float(lam), bias=bias)

    raise ValidationError(f"no closed-form risk for {kind.value}")


def estimator_matrix(kind: EstimatorKind | str, X, lam: float | None = None) -> np.ndarray:
    """The ``p x n`` matrix ``A`` with ``theta_hat = A y``."""
    kind = EstimatorKind(kind)
    X = as_matrix(X, "X")
    if kind is EstimatorKind.LS:
        return np.linalg.solve(X.T @ X, X.T)
    if kind is EstimatorKind.RIDGELESS:
        return pinv(X)
    if kind is EstimatorKind.RIDGE:
        return np.linalg.solve(X.T @ X + lam * np.eye(X.shape[1]), X.T)
    raise ValidationError(f"{kind.value} is not a linear estimator")


def find_lambda_star(X, est: Estimand, grid: Sequence[float]) -> float | None:
    """Grid point minimizing the ridge MSE if it beats the ridgeless MSE."""
    grid = [float(g) for g in grid]
    if not grid or any(not g > 0 for g in grid):
        raise ValidationError("grid must be a non-empty list of positive values")
    base = theoretical_risk(EstimatorKind.RIDGELESS, X, est).mse
    mses = [theoretical_risk(EstimatorKind.RIDGE, X, est, g).mse for g in grid]
    k = int(np.argmin(mses))
    return grid[k] if mses[k] < base else None
