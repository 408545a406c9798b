"""Exhaustive best-subset (l0-constrained) least squares for small p."""

from __future__ import annotations

from itertools import combinations

import numpy as np

from ..errors import SizeLimitError, ValidationError
from ..linalg import min_norm_solve
from ._types import Dataset, EstimatorKind, FitResult

MAX_P = 15


def fit_l0_brute(d: Dataset, R: int) -> FitResult:
    """Minimize ``||y - X theta||^2 / 2`` subject to ``||theta||_0 <= R``.

    Every support of size at most ``R`` is enumerated and solved by a
    minimum-norm least-squares fit on its columns.  Equal objectives (to a
    relative ``1e-12``) are resolved in favor of the lexicographically
    smallest support tuple.
    """
    p = d.p
    if p > MAX_P:
        raise SizeLimitError(f"exhaustive l0 search supports p <= {MAX_P}, got p = {p}")
    R = int(R)
    if not 0 <= R <= p:
        raise ValidationError(f"R must lie in [0, {p}], got {R}")
    tie_tol = 1e-12 * max(1.0, float(d.y @ d.y))

    best_support: tuple[int, ...] = ()
    best_theta = np.zeros(p)
    best_obj = 0.5 * float(d.y @ d.y)
    for size in range(1, R + 1):
        for support in combinations(range(p), size):
            cols = list(support)
            coef = min_norm_solve(d.X[:, cols], d.y)
            r = d.y - d.X[:, cols] @ coef
            obj = 0.5 * float(r @ r)
            better = obj < best_obj - tie_tol
            tied = abs(obj - best_obj) <= tie_tol and support < best_support
            if better or tied:
                best_obj, best_support = obj, support
                best_theta = np.zeros(p)
                best_theta[cols] = coef
    return FitResult(
        EstimatorKind.L0_BRUTE,
        best_theta,
        objective=best_obj,
        radius=R,
        support=best_support,
    )
