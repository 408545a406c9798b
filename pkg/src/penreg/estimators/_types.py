from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from ..errors import ValidationError
from ..linalg import as_matrix, as_vector


class EstimatorKind(str, enum.Enum):
    LS = "ls"
    RIDGELESS = "ridgeless"
    RIDGE = "ridge"
    LASSO = "lasso"
    L0_BRUTE = "l0"


@dataclass(frozen=True)
class Dataset:
    """Response ``y`` (length n) and dense design ``X`` (n x p)."""

    y: np.ndarray
    X: np.ndarray
    names: tuple[str, ...] | None = None

    def __post_init__(self):
        X = as_matrix(self.X, "X")
        y = as_vector(self.y, "y")
        if y.shape[0] != X.shape[0]:
            raise ValidationError(
                f"y has {y.shape[0]} rows but X has {X.shape[0]}"
            )
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        if self.names is not None:
            names = tuple(str(s) for s in self.names)
            if len(names) != X.shape[1]:
                raise ValidationError(
                    f"{len(names)} column names for {X.shape[1]} columns"
                )
            object.__setattr__(self, "names", names)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    def column_name(self, j: int) -> str:
        return self.names[j] if self.names else f"x{j + 1}"


@dataclass(frozen=True)
class FitResult:
    kind: EstimatorKind
    theta: np.ndarray
    objective: float
    intercept: float | None = None
    lam: float | None = None
    radius: int | None = None
    iterations: int = 0
    converged: bool = True
    kkt_violation: float | None = None
    standardized: bool = False
    support: tuple[int, ...] | None = None
    objective_history: tuple[float, ...] = field(default=(), repr=False)

    def __post_init__(self):
        theta = np.asarray(self.theta, dtype=np.float64)
        if not np.all(np.isfinite(theta)):
            raise ValidationError("fitted coefficients are not finite")
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "kind", EstimatorKind(self.kind))
        if self.kind in (EstimatorKind.LASSO, EstimatorKind.RIDGE):
            if self.lam is None or not self.lam > 0:
                raise ValidationError(f"{self.kind.value} fit requires lambda > 0")

    @property
    def nonzero(self) -> int:
        return int(np.count_nonzero(self.theta))

    @property
    def l1_norm(self) -> float:
        return float(np.abs(self.theta).sum())


@dataclass(frozen=True)
class CdOptions:
    """Coordinate descent settings.

    ``init`` is ``"zeros"``, ``"ridge"`` (uses ``init_lambda``),
    ``"ridgeless"``, or an explicit warm-start vector.
    """

    max_iterations: int = 10_000
    tol: float = 1e-10
    kkt_tol: float = 1e-8
    init: str | np.ndarray = "zeros"
    init_lambda: float = 1.0

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValidationError("max_iterations must be >= 1")
        if not self.tol > 0 or not self.kkt_tol > 0:
            raise ValidationError("tolerances must be > 0")
        if isinstance(self.init, str):
            if self.init not in ("zeros", "ridge", "ridgeless"):
                raise ValidationError(f"unknown init {self.init!r}")
            if self.init == "ridge" and not self.init_lambda > 0:
                raise ValidationError("init_lambda must be > 0")
        else:
            object.__setattr__(self, "init", as_vector(self.init, "warm start"))


@dataclass(frozen=True)
class LambdaPath:
    grid: np.ndarray
    fits: tuple[FitResult, ...]
    lambda_max: float

    def coefficients(self) -> np.ndarray:
        """Coefficient matrix, one row per grid point."""
        return np.vstack([f.theta for f in self.fits])
