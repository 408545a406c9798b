"""Dense SVD, Moore-Penrose pseudoinverse, orthogonal projectors and
minimum-norm solves.

Everything here is a pure function of its inputs.  Matrices are plain 2-D
``numpy.ndarray`` objects of dtype float64; vectors are 1-D arrays.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import NumericalError, ValidationError

# Relative factor in the default rank cutoff s_1 * max(n, p) * 2**-45.
DEFAULT_TOL_FACTOR = 2.0**-45

# Entries below this magnitude are skipped when fixing singular-vector signs.
_SIGN_EPS = 1e-12


class ProjectorKind(enum.Enum):
    RANGE_XT = "range_xt"  # onto Range(X') = M^+ M
    KER_X = "ker_x"  # onto Ker(X) = I - M^+ M
    RANGE_X = "range_x"  # onto Range(X) = M M^+
    KER_XT = "ker_xt"  # onto Ker(X') = I - M M^+


@dataclass(frozen=True)
class SvdFactors:
    """Full singular value decomposition ``M = U @ S @ V.T``.

    ``singular_values`` has length ``min(n, p)`` and is sorted non-increasing.
    ``rank`` counts the singular values strictly above ``tol``.
    """

    U: np.ndarray
    singular_values: np.ndarray
    V: np.ndarray
    rank: int
    tol: float

    @property
    def shape(self) -> tuple[int, int]:
        return self.U.shape[0], self.V.shape[0]

    @property
    def s(self) -> np.ndarray:
        return self.singular_values

    def S(self) -> np.ndarray:
        """The ``n x p`` rectangular diagonal matrix of singular values."""
        n, p = self.shape
        out = np.zeros((n, p))
        k = len(self.singular_values)
        out[np.arange(k), np.arange(k)] = self.singular_values
        return out

    def reconstruct(self) -> np.ndarray:
        return self.U @ self.S() @ self.V.T

    @property
    def U_r(self) -> np.ndarray:
        return self.U[:, : self.rank]

    @property
    def V_r(self) -> np.ndarray:
        return self.V[:, : self.rank]

    @property
    def s_r(self) -> np.ndarray:
        return self.singular_values[: self.rank]


def as_matrix(M, name: str = "matrix") -> np.ndarray:
    """Validate and convert ``M`` to a finite float64 2-D array."""
    try:
        A = np.asarray(M, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"{name} is not numeric: {exc}") from None
    if A.ndim != 2:
        raise ValidationError(f"{name} must be 2-D, got shape {A.shape}")
    if A.shape[0] < 1 or A.shape[1] < 1:
        raise ValidationError(f"{name} must be non-empty, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValidationError(f"{name} contains non-finite entries")
    return A


def as_vector(v, name: str = "vector", length: int | None = None) -> np.ndarray:
    """Validate and convert ``v`` to a finite float64 1-D array."""
    try:
        a = np.asarray(v, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"{name} is not numeric: {exc}") from None
    if a.ndim == 0:
        a = a.reshape(1)
    if a.ndim != 1:
        raise ValidationError(f"{name} must be 1-D, got shape {a.shape}")
    if length is not None and a.shape[0] != length:
        raise ValidationError(f"{name} has length {a.shape[0]}, expected {length}")
    if not np.all(np.isfinite(a)):
        raise ValidationError(f"{name} contains non-finite entries")
    return a


def default_tol(s1: float, shape: tuple[int, int]) -> float:
    return float(s1) * max(shape) * DEFAULT_TOL_FACTOR


def svd(M, tol: float | None = None) -> SvdFactors:
    """Full SVD of ``M`` with a deterministic sign convention.

    Parameters
    ----------
    M : array_like, shape (n, p)
    tol : float, optional
        Rank-truncation threshold.  ``None`` or ``0`` selects
        ``s_1 * max(n, p) * 2**-45``.

    Returns
    -------
    SvdFactors
        Each right singular vector has its first non-negligible entry
        non-negative; the matching left singular vector is flipped with it.
    """
    A = as_matrix(M)
    n, p = A.shape
    if tol is not None and tol < 0:
        raise ValidationError(f"tol must be >= 0, got {tol}")
    try:
        U, s, Vt = np.linalg.svd(A, full_matrices=True)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"SVD did not converge for a {n}x{p} matrix: {exc}") from None
    V = Vt.T.copy()
    k = len(s)
    for i in range(p):
        col = V[:, i]
        big = np.flatnonzero(np.abs(col) > _SIGN_EPS)
        if big.size and col[big[0]] < 0:
            V[:, i] = -col
            if i < k:
                U[:, i] = -U[:, i]
    if not tol:
        tol = default_tol(s[0] if k else 0.0, (n, p))
    rank = int(np.count_nonzero(s > tol))
    return SvdFactors(U=U, singular_values=s, V=V, rank=rank, tol=float(tol))


def pinv(M, tol: float | None = None) -> np.ndarray:
    """Moore-Penrose inverse ``V @ S^+ @ U.T`` with rank truncation at ``tol``."""
    f = svd(M, tol)
    return pinv_from_svd(f)


def pinv_from_svd(f: SvdFactors) -> np.ndarray:
    return (f.V_r / f.s_r) @ f.U_r.T


def projector(M, kind: ProjectorKind | str, tol: float | None = None) -> np.ndarray:
    """Orthogonal projector onto one of the four fundamental subspaces of ``M``.

    The range projectors are assembled as ``V_r V_r'`` and ``U_r U_r'`` (equal
    to ``M^+ M`` and ``M M^+``) so they are symmetric to the last bit; the
    kernel projectors are their complements.
    """
    kind = ProjectorKind(kind)
    f = svd(M, tol)
    return projector_from_svd(f, kind)


def projector_from_svd(f: SvdFactors, kind: ProjectorKind) -> np.ndarray:
    n, p = f.shape
    if kind in (ProjectorKind.RANGE_XT, ProjectorKind.KER_X):
        P = f.V_r @ f.V_r.T
        return P if kind is ProjectorKind.RANGE_XT else np.eye(p) - P
    P = f.U_r @ f.U_r.T
    return P if kind is ProjectorKind.RANGE_X else np.eye(n) - P


def min_norm_solve(A, b, tol: float | None = None) -> np.ndarray:
    """Return ``A^+ b``, the minimum-norm least-squares solution of ``A x = b``."""
    A = as_matrix(A, "A")
    b = as_vector(b, "b")
    if b.shape[0] != A.shape[0]:
        raise ValidationError(
            f"dimension mismatch: A is {A.shape[0]}x{A.shape[1]} but b has length {b.shape[0]}"
        )
    f = svd(A, tol)
    return min_norm_solve_svd(f, b)


def min_norm_solve_svd(f: SvdFactors, b: np.ndarray) -> np.ndarray:
    return f.V_r @ ((f.U_r.T @ b) / f.s_r)


def numerical_rank(M, tol: float | None = None) -> int:
    return svd(M, tol).rank
