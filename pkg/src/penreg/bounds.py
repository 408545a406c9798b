"""Finite-sample lasso guarantees.

Oracle penalty level, cone membership, a sampled restricted-eigenvalue
estimate, the deterministic audit of the basic lasso inequalities, and the
deterministic / sub-Gaussian risk bounds.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import PreconditionError, ValidationError
from .estimators import Dataset, EstimatorKind, FitResult
from .linalg import as_matrix, as_vector

# Relative slack applied to every audited inequality.  Fits are solved to
# ~1e-10, so honest violations are many orders of magnitude larger.
AUDIT_RTOL = 1e-9


class BoundMode(str, enum.Enum):
    DETERMINISTIC = "deterministic"
    SUBGAUSSIAN = "subgaussian"


class KappaSource(str, enum.Enum):
    EXACT = "exact"  # known from the design construction
    SAMPLED = "sampled"  # upper bound on the cone minimum; anti-conservative


@dataclass(frozen=True)
class ConeSpec:
    """``C_alpha(S) = {v : ||v_{S^c}||_1 <= alpha ||v_S||_1}`` (0-based indices)."""

    support: tuple[int, ...]
    alpha: float = 3.0

    def __post_init__(self):
        support = tuple(int(i) for i in self.support)
        if len(set(support)) != len(support):
            raise ValidationError("cone support indices must be distinct")
        if any(i < 0 for i in support):
            raise ValidationError("cone support indices must be >= 0")
        if not self.alpha >= 1:
            raise ValidationError(f"alpha must be >= 1, got {self.alpha}")
        object.__setattr__(self, "support", tuple(sorted(support)))

    def masks(self, p: int) -> tuple[np.ndarray, np.ndarray]:
        if self.support and self.support[-1] >= p:
            raise ValidationError(f"cone index {self.support[-1]} out of range for p = {p}")
        on = np.zeros(p, dtype=bool)
        on[list(self.support)] = True
        return on, ~on

    @classmethod
    def for_theta(cls, theta0, alpha: float = 3.0) -> "ConeSpec":
        return cls(tuple(int(i) for i in np.flatnonzero(np.asarray(theta0))), alpha)


def lambda_oracle(X, eps) -> float:
    """``2 ||X' eps / n||_inf``."""
    X = as_matrix(X, "X")
    eps = as_vector(eps, "eps", X.shape[0])
    return 2.0 * float(np.max(np.abs(X.T @ eps))) / X.shape[0]


def cone_membership(v, cone: ConeSpec) -> bool:
    v = as_vector(v, "v")
    on, off = cone.masks(v.shape[0])
    return bool(np.abs(v[off]).sum() <= cone.alpha * np.abs(v[on]).sum() + 1e-12)


def _project_to_cone(v: np.ndarray, on: np.ndarray, off: np.ndarray, alpha: float) -> np.ndarray:
    # Shrink the off-support block onto the cone boundary when it is too large.
    budget = alpha * np.abs(v[on]).sum()
    mass = np.abs(v[off]).sum()
    if mass > budget:
        v = v.copy()
        v[off] *= budget / mass
    return v


def re_constant_bound(
    X,
    cone: ConeSpec,
    n_samples: int = 2000,
    refine_steps: int = 400,
    seed: int = 0,
    n_refine: int = 5,
) -> float:
    """Sampled upper bound on ``min ||X eta||^2 / (n ||eta||^2)`` over the cone.

    Candidates are drawn with a Gaussian block on ``S`` and a Gaussian
    direction on ``S^c`` rescaled to ``u * alpha * ||eta_S||_1`` with
    ``u ~ U[0, 1]``.  The ``n_refine`` best candidates are then improved by a
    pattern search over single-coordinate perturbations, each step projected
    back into the cone.  Every evaluated point lies in the cone, so the
    returned minimum can only overestimate the true constant.
    """
    X = as_matrix(X, "X")
    n, p = X.shape
    if n_samples < 1:
        raise ValidationError("n_samples must be >= 1")
    on, off = cone.masks(p)
    if not on.any():
        raise ValidationError("degenerate cone: empty support admits only the zero vector")
    rng = np.random.default_rng(seed)
    G = X.T @ X / n

    def quotient(eta):
        return float(eta @ G @ eta) / float(eta @ eta)

    eta = np.zeros((n_samples, p))
    eta[:, on] = rng.standard_normal((n_samples, int(on.sum())))
    if off.any():
        w = rng.standard_normal((n_samples, int(off.sum())))
        u = rng.uniform(0.0, 1.0, n_samples)
        target = u * cone.alpha * np.abs(eta[:, on]).sum(axis=1)
        w *= (target / np.maximum(np.abs(w).sum(axis=1), np.finfo(float).tiny))[:, None]
        eta[:, off] = w
    eta /= np.linalg.norm(eta, axis=1, keepdims=True)
    q = np.einsum("ij,jk,ik->i", eta, G, eta)
    best = float(q.min())

    for idx in np.argsort(q, kind="stable")[:n_refine]:
        v = eta[idx].copy()
        val = float(q[idx])
        step = 0.5
        for _ in range(refine_steps):
            improved = False
            for j in range(p):
                for sgn in (1.0, -1.0):
                    cand = v.copy()
                    cand[j] += sgn * step
                    cand = _project_to_cone(cand, on, off, cone.alpha)
                    nrm = np.linalg.norm(cand)
                    if nrm == 0 or not np.abs(cand[on]).sum() > 0:
                        continue
                    cand /= nrm
                    cq = quotient(cand)
                    if cq < val:
                        v, val, improved = cand, cq, True
            if not improved:
                step *= 0.5
                if step < 1e-12:
                    break
        best = min(best, val)
    return max(best, 0.0)


@dataclass(frozen=True)
class BoundInputs:
    lam: float
    s0: int
    kappa: float
    theta0_l1: float
    C: float
    sigma: float
    delta: float
    p: int
    n: int
    kappa_source: KappaSource = KappaSource.EXACT

    def __post_init__(self):
        checks = {
            "lambda": self.lam > 0,
            "kappa": self.kappa > 0,
            "C": self.C > 0,
            "sigma": self.sigma > 0,
            "delta": self.delta > 0,
        }
        for name, ok in checks.items():
            if not ok:
                raise ValidationError(f"{name} must be > 0")
        if self.s0 < 0 or self.theta0_l1 < 0:
            raise ValidationError("s0 and ||theta0||_1 must be >= 0")
        if self.p < 1 or self.n < 1:
            raise ValidationError("n and p must be >= 1")
        object.__setattr__(self, "kappa_source", KappaSource(self.kappa_source))


@dataclass(frozen=True)
class ObservedRisks:
    est_risk: float
    pred_risk: float
    cone_ok: bool
    satisfied: dict[str, bool]


@dataclass(frozen=True)
class BoundReport:
    mode: BoundMode
    lam: float
    lemma_pr_bound: float  # 12 lam ||theta0||_1 (the slow rate in sub-Gaussian mode)
    est_bound: float
    pr_bound: float
    probability_floor: float
    kappa: float
    kappa_source: KappaSource
    C: float | None = None
    observed: ObservedRisks | None = None

    @property
    def violated(self) -> bool:
        return self.observed is not None and not all(self.observed.satisfied.values())


def subgaussian_lambda(C: float, sigma: float, p: int, n: int, delta: float) -> float:
    """``2 C sigma (sqrt(2 ln p / n) + delta)``."""
    return 2.0 * C * sigma * (math.sqrt(2.0 * math.log(p) / n) + delta)


def column_norm_bound(X) -> float:
    """``max_j ||X_j||_2 / sqrt(n)``."""
    X = as_matrix(X, "X")
    return float(np.sqrt((X * X).sum(axis=0)).max() / math.sqrt(X.shape[0]))


def lasso_bound_report(inputs: BoundInputs, mode: BoundMode | str) -> BoundReport:
    """Evaluate the right-hand sides of the lasso risk bounds."""
    mode = BoundMode(mode)
    b = inputs
    if mode is BoundMode.DETERMINISTIC:
        lam = b.lam
        return BoundReport(
            mode=mode,
            lam=lam,
            lemma_pr_bound=12.0 * lam * b.theta0_l1,
            est_bound=9.0 * b.s0 * lam**2 / b.kappa**2,
            pr_bound=9.0 * b.s0 * lam**2 / b.kappa,
            probability_floor=1.0,
            kappa=b.kappa,
            kappa_source=b.kappa_source,
            C=b.C,
        )
    rate = math.sqrt(2.0 * math.log(b.p) / b.n)
    lam = subgaussian_lambda(b.C, b.sigma, b.p, b.n, b.delta)
    fast = 72.0 * b.C**2 * b.sigma**2 * b.s0 * (2.0 * math.log(b.p) / b.n + b.delta**2)
    return BoundReport(
        mode=mode,
        lam=lam,
        lemma_pr_bound=24.0 * b.C * b.theta0_l1 * b.sigma * (rate + b.delta),
        est_bound=fast / b.kappa**2,
        pr_bound=fast / b.kappa,
        probability_floor=1.0 - 2.0 * math.exp(-b.n * b.delta**2 / 2.0),
        kappa=b.kappa,
        kappa_source=b.kappa_source,
        C=b.C,
    )


def _leq(lhs: float, rhs: float) -> bool:
    return lhs <= rhs + AUDIT_RTOL * max(1.0, abs(rhs))


def observe(report: BoundReport, X, theta_hat, theta0) -> BoundReport:
    """Attach observed risks and per-bound satisfied flags to ``report``."""
    X = as_matrix(X, "X")
    p = X.shape[1]
    theta_hat = as_vector(theta_hat, "theta_hat", p)
    theta0 = as_vector(theta0, "theta0", p)
    eta = theta_hat - theta0
    est = float(eta @ eta)
    Xe = X @ eta
    pred = float(Xe @ Xe) / X.shape[0]
    satisfied = {
        "lemma_pr": _leq(pred, report.lemma_pr_bound),
        "est": _leq(est, report.est_bound),
        "pr": _leq(pred, report.pr_bound),
    }
    cone_ok = cone_membership(eta, ConeSpec.for_theta(theta0, 3.0)) if np.any(theta0) else True
    return replace(report, observed=ObservedRisks(est, pred, cone_ok, satisfied))


@dataclass(frozen=True)
class AuditCheck:
    lhs: float
    rhs: float
    passed: bool

    @property
    def slack(self) -> float:
        return self.rhs - self.lhs


@dataclass(frozen=True)
class LemmaAudit:
    lam: float
    lam_oracle: float
    checks: dict[str, AuditCheck] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks.values())


def lemma_audit(d: Dataset, fit: FitResult, theta0, eps) -> LemmaAudit:
    """Check the five deterministic consequences of ``lam >= lambda_oracle > 0``.

    (a) ``PR <= 12 lam ||theta0||_1``; (b) ``||theta_hat||_1 <= 3 ||theta0||_1``;
    (c) ``||eta||_1 <= 4 ||theta0||_1``; (d) ``eta`` in ``C_3(supp theta0)``;
    (e) ``||X eta||^2/n <= 3 sqrt(s0) lam ||eta||_2``.
    """
    X, y = d.X, d.y
    p = d.p
    theta0 = as_vector(theta0, "theta0", p)
    eps = as_vector(eps, "eps", d.n)
    if fit.kind is not EstimatorKind.LASSO or fit.standardized:
        raise PreconditionError("lemma audit needs a lasso fit on the raw data")
    if not fit.converged:
        raise PreconditionError("lemma audit needs a converged lasso fit")
    resid = y - X @ theta0 - eps
    if np.abs(resid).max() > 1e-9 * max(1.0, float(np.abs(y).max())):
        raise PreconditionError("y = X theta0 + eps does not hold for the supplied triple")
    lam_or = lambda_oracle(X, eps)
    lam = float(fit.lam)
    if not lam_or > 0:
        raise PreconditionError("oracle penalty is zero (eps orthogonal to every column)")
    if lam < lam_or:
        raise PreconditionError(f"lambda {lam:g} is below the oracle level {lam_or:g}")

    eta = fit.theta - theta0
    l1_0 = float(np.abs(theta0).sum())
    s0 = int(np.count_nonzero(theta0))
    Xe = X @ eta
    pr = float(Xe @ Xe) / d.n
    cone = ConeSpec.for_theta(theta0, 3.0)
    on, off = cone.masks(p)
    cone_lhs = float(np.abs(eta[off]).sum())
    cone_rhs = 3.0 * float(np.abs(eta[on]).sum())
    pairs = {
        "a_pred_risk": (pr, 12.0 * lam * l1_0),
        "b_l1_fit": (fit.l1_norm, 3.0 * l1_0),
        "c_l1_error": (float(np.abs(eta).sum()), 4.0 * l1_0),
        "d_cone": (cone_lhs, cone_rhs),
        "e_pred_vs_l2": (pr, 3.0 * math.sqrt(s0) * lam * float(np.linalg.norm(eta))),
    }
    checks = {k: AuditCheck(lhs, rhs, _leq(lhs, rhs)) for k, (lhs, rhs) in pairs.items()}
    return LemmaAudit(lam=lam, lam_oracle=lam_or, checks=checks)
