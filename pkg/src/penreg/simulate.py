"""Data-generating processes and the Monte Carlo engine.

Every replication draws from its own generator seeded by
``SeedSequence([seed, replication])``, so results do not depend on how
replications are split across worker processes.  Per-replication outputs are
gathered into arrays indexed by replication and reduced in that fixed order,
which makes aggregates bit-identical for any worker count.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Union

import numpy as np

from .bounds import (
    BoundInputs,
    BoundMode,
    KappaSource,
    column_norm_bound,
    ConeSpec,
    lambda_oracle,
    lasso_bound_report,
    lemma_audit,
    observe,
    re_constant_bound,
    subgaussian_lambda,
)
from .errors import NumericalError, PenregError, PreconditionError, ValidationError
from .estimators import CdOptions, Dataset, EstimatorKind, FitResult, fit, fit_lasso_cd
from .linalg import ProjectorKind, as_matrix, as_vector, projector
from .risk import Estimand, RiskReport, empirical_risks, theoretical_risk


# -- designs -----------------------------------------------------------------


@dataclass(frozen=True)
class FixedDesign:
    X: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "X", as_matrix(self.X, "X"))

    @property
    def p(self) -> int:
        return self.X.shape[1]


@dataclass(frozen=True)
class GaussianDesign:
    """Rows drawn i.i.d. from ``N(mean, cov)``; ``cov`` may be singular."""

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        cov = as_matrix(self.cov, "cov")
        mean = as_vector(self.mean, "mean", cov.shape[0])
        if cov.shape[0] != cov.shape[1] or np.abs(cov - cov.T).max() > 1e-10 * max(1.0, np.abs(cov).max()):
            raise ValidationError("covariance must be square and symmetric")
        w, V = np.linalg.eigh(0.5 * (cov + cov.T))
        if w.min() < -1e-10 * max(1.0, abs(w).max()):
            raise ValidationError("covariance must be positive semi-definite")
        object.__setattr__(self, "cov", cov)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "_factor", V * np.sqrt(np.clip(w, 0.0, None)))

    @property
    def p(self) -> int:
        return self.cov.shape[0]

    def draw(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return self.mean + rng.standard_normal((n, self.p)) @ self._factor.T


@dataclass(frozen=True)
class CollinearDesign:
    """Rows ``x = L z`` with ``z ~ N(0, I_k)``: ``k`` base predictors and a
    ``p x k`` loading (dependency) map ``L``.  ``E[xx'] = L L'`` has rank at
    most ``k``."""

    loadings: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "loadings", as_matrix(self.loadings, "loadings"))

    @property
    def p(self) -> int:
        return self.loadings.shape[0]

    def draw(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return rng.standard_normal((n, self.loadings.shape[1])) @ self.loadings.T


Design = Union[FixedDesign, GaussianDesign, CollinearDesign]


def gaussian_design(n: int, p: int, seed: int = 0) -> np.ndarray:
    return np.random.default_rng(seed).standard_normal((n, p))


def orthonormal_design(n: int, p: int, seed: int = 0) -> np.ndarray:
    """Design with ``X'X/n = I`` exactly up to rounding (requires ``n >= p``)."""
    if n < p:
        raise ValidationError("orthonormal design needs n >= p")
    Q, _ = np.linalg.qr(np.random.default_rng(seed).standard_normal((n, p)))
    return math.sqrt(n) * Q


def rank_deficient_design(n: int, p: int, r: int, seed: int = 0) -> np.ndarray:
    """Gaussian ``n x r`` factor times a Gaussian ``r x p`` mixing matrix."""
    rng = np.random.default_rng(seed)
    return rng.standard_normal((n, r)) @ rng.standard_normal((r, p))


# -- errors ------------------------------------------------------------------


@dataclass(frozen=True)
class ErrorFamily:
    """Mean-zero sub-Gaussian error law.

    ``gaussian``: ``N(0, scale^2)``; ``bernoulli``: ``+-scale`` with equal
    probability; ``uniform``: ``U[-scale, scale]``.  In every case
    ``scale`` serves as the variance proxy.
    """

    kind: str = "gaussian"
    scale: float = 1.0

    def __post_init__(self):
        if self.kind not in ("gaussian", "bernoulli", "uniform"):
            raise ValidationError(f"unknown error family {self.kind!r}")
        if not self.scale >= 0:
            raise ValidationError("error scale must be >= 0")

    @property
    def variance_proxy(self) -> float:
        return float(self.scale)

    @property
    def std(self) -> float:
        return self.scale / math.sqrt(3.0) if self.kind == "uniform" else float(self.scale)

    def draw(self, n: int, rng: np.random.Generator) -> np.ndarray:
        if self.kind == "gaussian":
            return self.scale * rng.standard_normal(n)
        if self.kind == "bernoulli":
            return self.scale * (2.0 * rng.integers(0, 2, n) - 1.0)
        return rng.uniform(-self.scale, self.scale, n)


@dataclass(frozen=True)
class DgpSpec:
    design: Design
    theta0: np.ndarray
    error: ErrorFamily = field(default_factory=ErrorFamily)
    n: int | None = None
    seed: int = 0

    def __post_init__(self):
        theta0 = as_vector(self.theta0, "theta0", self.design.p)
        object.__setattr__(self, "theta0", theta0)
        n = self.n
        if isinstance(self.design, FixedDesign):
            if n is not None and n != self.design.X.shape[0]:
                raise ValidationError(f"n = {n} disagrees with the fixed design's {self.design.X.shape[0]} rows")
            n = self.design.X.shape[0]
        if n is None or n < 1:
            raise ValidationError("random designs need n >= 1")
        if self.seed < 0:
            raise ValidationError("seed must be >= 0")
        object.__setattr__(self, "n", int(n))

    @property
    def p(self) -> int:
        return self.design.p

    @property
    def is_fixed(self) -> bool:
        return isinstance(self.design, FixedDesign)

    def second_moment(self) -> np.ndarray:
        """``E[xx']``; for a fixed design the empirical ``X'X/n``."""
        d = self.design
        if isinstance(d, FixedDesign):
            return d.X.T @ d.X / d.X.shape[0]
        if isinstance(d, GaussianDesign):
            return d.cov + np.outer(d.mean, d.mean)
        return d.loadings @ d.loadings.T

    def estimand(self) -> Estimand:
        """Ridgeless estimand with ``sigma`` the error standard deviation."""
        sigma = self.error.std if self.error.scale > 0 else 1.0
        if isinstance(self.design, FixedDesign):
            return Estimand.from_design(self.design.X, self.theta0, sigma)
        return Estimand.from_population(self.second_moment(), self.theta0, sigma)


def replication_rng(seed: int, replication: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(replication)]))


def sample_dgp(spec: DgpSpec, replication: int) -> tuple[Dataset, np.ndarray]:
    """Draw replication ``replication``: returns the dataset and its errors."""
    if replication < 0:
        raise ValidationError("replication index must be >= 0")
    rng = replication_rng(spec.seed, replication)
    if isinstance(spec.design, FixedDesign):
        X = spec.design.X
    else:
        X = spec.design.draw(spec.n, rng)
    eps = spec.error.draw(spec.n, rng)
    return Dataset(y=X @ spec.theta0 + eps, X=X), eps


# -- Monte Carlo plumbing ------------------------------------------------------


@dataclass(frozen=True)
class McConfig:
    replications: int = 1000
    workers: int = 1
    base_seed: int | None = None

    def __post_init__(self):
        if self.replications < 2:
            raise ValidationError("need at least 2 replications")
        if self.workers < 1:
            raise ValidationError("workers must be >= 1")


@dataclass(frozen=True)
class EstimatorConfig:
    kind: EstimatorKind
    lam: float | None = None
    radius: int | None = None
    standardize: bool = False
    cd: CdOptions = field(default_factory=CdOptions)

    def __post_init__(self):
        object.__setattr__(self, "kind", EstimatorKind(self.kind))

    def fit(self, d: Dataset) -> FitResult:
        return fit(d, self.kind, self.lam, radius=self.radius, standardize_data=self.standardize, opts=self.cd)


def _at_replication(exc: PenregError, rep: int) -> PenregError:
    cls = NumericalError if isinstance(exc, NumericalError) else ValidationError
    err = cls(f"replication {rep}: {exc}")
    err.replication = rep
    return err


def _chunks(R: int, workers: int) -> list[tuple[int, int]]:
    k = min(workers, R)
    edges = np.linspace(0, R, k + 1).astype(int)
    return [(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]) if b > a]


def _map_replications(func, args: tuple, R: int, workers: int) -> list[dict]:
    """Run ``func(*args, start, stop)`` over contiguous blocks; keep order."""
    blocks = _chunks(R, workers)
    if workers == 1 or len(blocks) == 1:
        return [func(*args, a, b) for a, b in blocks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(func, *args, a, b) for a, b in blocks]
        return [f.result() for f in futures]


def _concat(parts: list[dict]) -> dict:
    return {k: np.concatenate([p[k] for p in parts]) for k in parts[0]}


def _with_seed(spec: DgpSpec, cfg: McConfig) -> DgpSpec:
    return spec if cfg.base_seed is None else replace(spec, seed=cfg.base_seed)


def default_workers() -> int:
    return max(1, os.cpu_count() or 1)


# -- risk -------------------------------------------------------------------

_CLOSED_FORM = (EstimatorKind.LS, EstimatorKind.RIDGELESS, EstimatorKind.RIDGE)


def _risk_block(spec: DgpSpec, est: EstimatorConfig, target: np.ndarray, start: int, stop: int) -> dict:
    m = stop - start
    out = {
        "est": np.empty(m),
        "pred": np.empty(m),
        "theta": np.empty((m, spec.p)),
        "theory_mse": np.full(m, np.nan),
        "theory_mpr": np.full(m, np.nan),
    }
    conditional = not spec.is_fixed and est.kind in _CLOSED_FORM and not est.standardize
    estimand = spec.estimand() if conditional else None
    for i, rep in enumerate(range(start, stop)):
        d, _ = sample_dgp(spec, rep)
        try:
            res = est.fit(d)
        except PenregError as exc:
            raise _at_replication(exc, rep) from exc
        out["est"][i], out["pred"][i] = empirical_risks(res.theta, target, d.X)
        out["theta"][i] = res.theta
        if conditional:
            th = theoretical_risk(est.kind, d.X, estimand, est.lam)
            out["theory_mse"][i], out["theory_mpr"][i] = th.mse, th.mpr
    return out


@dataclass(frozen=True)
class McRiskResult:
    empirical: RiskReport
    theoretical: RiskReport | None
    target: np.ndarray
    conditional_on_design: bool = False


def _se(x: np.ndarray) -> float:
    return float(np.std(x, ddof=1) / math.sqrt(len(x)))


def mc_risk(spec: DgpSpec, est: EstimatorConfig, cfg: McConfig) -> McRiskResult:
    """Empirical MSE/MPR of an estimator over ``cfg.replications`` draws.

    Risks are measured against the ridgeless estimand (``P_{Range(X')}
    theta0`` for a fixed design, ``E[xx']^+ E[xy]`` for random designs).  For
    random designs the theoretical counterpart is the average of the
    closed-form risks conditional on each realized design.
    """
    spec = _with_seed(spec, cfg)
    estimand = spec.estimand()
    target = estimand.theta0_rl
    parts = _map_replications(_risk_block, (spec, est, target), cfg.replications, cfg.workers)
    agg = _concat(parts)
    R = cfg.replications
    thetas = agg["theta"]
    mean_theta = thetas.mean(axis=0)
    bias = mean_theta - target
    var = thetas.var(axis=0, ddof=1)
    empirical = RiskReport(
        kind=est.kind.value,
        bias_norm_sq=float(bias @ bias),
        trace_var=float(var.sum()),
        mse=float(agg["est"].mean()),
        mpr=float(agg["pred"].mean()),
        source="empirical",
        lam=est.lam,
        replications=R,
        mse_se=_se(agg["est"]),
        mpr_se=_se(agg["pred"]),
        bias=bias,
        mean_theta=mean_theta,
        mean_theta_se=np.sqrt(var / R),
        conditional_on_design=not spec.is_fixed,
    )
    theoretical = None
    if est.kind in _CLOSED_FORM and not est.standardize and spec.error.scale > 0:
        if spec.is_fixed:
            theoretical = theoretical_risk(est.kind, spec.design.X, estimand, est.lam)
        else:
            theoretical = RiskReport(
                kind=est.kind.value,
                bias_norm_sq=float("nan"),
                trace_var=float("nan"),
                mse=float(agg["theory_mse"].mean()),
                mpr=float(agg["theory_mpr"].mean()),
                lam=est.lam,
                conditional_on_design=True,
            )
    return McRiskResult(empirical, theoretical, target, conditional_on_design=not spec.is_fixed)


# -- bound coverage -----------------------------------------------------------


@dataclass(frozen=True)
class BoundConfig:
    mode: BoundMode = BoundMode.DETERMINISTIC
    delta: float = 0.3
    kappa: float | None = None
    kappa_source: KappaSource | None = None
    alpha: float = 3.0
    re_samples: int = 2000
    re_refine_steps: int = 200
    audit: bool = True
    cd: CdOptions = field(default_factory=CdOptions)

    def __post_init__(self):
        object.__setattr__(self, "mode", BoundMode(self.mode))
        if self.kappa_source is not None:
            object.__setattr__(self, "kappa_source", KappaSource(self.kappa_source))
        if not self.delta > 0:
            raise ValidationError("delta must be > 0")


def design_kappa(X, theta0, cfg: BoundConfig, seed: int = 0) -> tuple[float, KappaSource]:
    """Restricted-eigenvalue constant for the audit.

    An explicit ``cfg.kappa`` is used as given.  Otherwise the smallest
    eigenvalue of ``X'X/n`` is a valid constant whenever it is positive
    (``exact``); failing that the cone minimum is estimated by sampling
    (``sampled``, an overestimate).
    """
    if cfg.kappa is not None:
        return float(cfg.kappa), cfg.kappa_source or KappaSource.EXACT
    X = as_matrix(X, "X")
    lam_min = float(np.linalg.eigvalsh(X.T @ X / X.shape[0]).min())
    if cfg.kappa_source is not KappaSource.SAMPLED and lam_min > 1e-10:
        return lam_min, KappaSource.EXACT
    cone = ConeSpec.for_theta(theta0, cfg.alpha)
    k = re_constant_bound(X, cone, cfg.re_samples, cfg.re_refine_steps, seed)
    return k, KappaSource.SAMPLED


_BOUND_KEYS = ("lemma_pr", "est", "pr")


def _coverage_block(spec: DgpSpec, cfg: BoundConfig, kappa, kappa_source, start: int, stop: int) -> dict:
    m = stop - start
    out = {
        "lam": np.empty(m),
        "est": np.empty(m),
        "pred": np.empty(m),
        "violated": np.zeros(m, dtype=bool),
        "lemma_failed": np.zeros(m, dtype=bool),
        "cone_ok": np.zeros(m, dtype=bool),
        "converged": np.zeros(m, dtype=bool),
        "skipped": np.zeros(m, dtype=bool),
        "kappa": np.empty(m),
        "C": np.empty(m),
    }
    for key in _BOUND_KEYS:
        out["viol_" + key] = np.zeros(m, dtype=bool)
    theta0 = spec.theta0
    s0 = int(np.count_nonzero(theta0))
    l1 = float(np.abs(theta0).sum())
    proxy = spec.error.variance_proxy
    for i, rep in enumerate(range(start, stop)):
        d, eps = sample_dgp(spec, rep)
        if kappa is None:
            k, src = design_kappa(d.X, theta0, cfg, seed=rep)
        else:
            k, src = kappa, kappa_source
        C = column_norm_bound(d.X)
        if cfg.mode is BoundMode.DETERMINISTIC:
            lam = lambda_oracle(d.X, eps)
            if not lam > 0:
                out["skipped"][i] = True
                out["lam"][i] = out["est"][i] = out["pred"][i] = np.nan
                out["kappa"][i], out["C"][i] = k, C
                continue
        else:
            lam = subgaussian_lambda(C, proxy, spec.p, spec.n, cfg.delta)
        try:
            res = fit_lasso_cd(d, lam, cfg.cd)
        except PenregError as exc:
            raise _at_replication(exc, rep) from exc
        inputs = BoundInputs(lam=lam, s0=s0, kappa=k, theta0_l1=l1, C=C, sigma=max(proxy, 1e-300),
                             delta=cfg.delta, p=spec.p, n=spec.n, kappa_source=src)
        rep_report = observe(lasso_bound_report(inputs, cfg.mode), d.X, res.theta, theta0)
        obs = rep_report.observed
        out["lam"][i] = rep_report.lam
        out["est"][i], out["pred"][i] = obs.est_risk, obs.pred_risk
        out["cone_ok"][i] = obs.cone_ok
        out["converged"][i] = res.converged
        out["violated"][i] = rep_report.violated
        out["kappa"][i], out["C"][i] = k, C
        for key in _BOUND_KEYS:
            out["viol_" + key][i] = not obs.satisfied[key]
        if cfg.audit and cfg.mode is BoundMode.DETERMINISTIC and res.converged:
            out["lemma_failed"][i] = not lemma_audit(d, res, theta0, eps).passed
    return out


@dataclass(frozen=True)
class CoverageRecord:
    mode: BoundMode
    replications: int
    evaluated: int
    violations: int
    frequency: float
    ceiling: float
    binomial_se: float
    consistent: bool
    violations_by_bound: dict[str, int]
    lemma_failures: int
    cone_failures: int
    non_converged: int
    kappa: float
    kappa_source: KappaSource
    C_mean: float
    lam_mean: float
    est_risk_mean: float
    pred_risk_mean: float
    est_bound_mean: float | None = None
    pr_bound_mean: float | None = None


def mc_bound_coverage(spec: DgpSpec, bcfg: BoundConfig, cfg: McConfig) -> CoverageRecord:
    """Frequency with which the lasso risk bounds fail over replications.

    Deterministic mode uses ``lam = lambda_oracle(X, eps)`` per replication,
    under which the bounds cannot fail (ceiling 0).  Sub-Gaussian mode uses
    the plug-in penalty and compares the failure frequency with
    ``2 exp(-n delta^2 / 2)`` plus three binomial standard errors.
    """
    spec = _with_seed(spec, cfg)
    s0 = int(np.count_nonzero(spec.theta0))
    if bcfg.mode is BoundMode.SUBGAUSSIAN and not s0 < spec.p:
        raise PreconditionError("fast-rate bounds need a hard-sparse theta0 (s0 < p)")
    if spec.error.scale == 0 and bcfg.mode is BoundMode.SUBGAUSSIAN:
        raise PreconditionError("sub-Gaussian bounds need a positive variance proxy")
    if spec.is_fixed:
        kappa, source = design_kappa(spec.design.X, spec.theta0, bcfg, seed=spec.seed)
    else:
        kappa, source = None, None
    parts = _map_replications(_coverage_block, (spec, bcfg, kappa, source), cfg.replications, cfg.workers)
    agg = _concat(parts)
    R = cfg.replications
    ok = ~agg["skipped"]
    evaluated = int(ok.sum())
    violations = int(agg["violated"][ok].sum())
    freq = violations / evaluated if evaluated else 0.0
    if bcfg.mode is BoundMode.DETERMINISTIC:
        ceiling = 0.0
    else:
        ceiling = min(1.0, 2.0 * math.exp(-spec.n * bcfg.delta**2 / 2.0))
    se = math.sqrt(ceiling * (1.0 - ceiling) / max(evaluated, 1))
    consistent = freq <= ceiling + 3.0 * se
    kap = agg["kappa"]
    lam = agg["lam"][ok]
    if evaluated:
        ref = lasso_bound_report(
            BoundInputs(lam=float(lam.mean()), s0=s0, kappa=float(kap.mean()),
                        theta0_l1=float(np.abs(spec.theta0).sum()), C=float(agg["C"].mean()),
                        sigma=max(spec.error.variance_proxy, 1e-300), delta=bcfg.delta,
                        p=spec.p, n=spec.n),
            bcfg.mode,
        )
        est_b, pr_b = ref.est_bound, ref.pr_bound
    else:
        est_b = pr_b = None
    return CoverageRecord(
        mode=bcfg.mode,
        replications=R,
        evaluated=evaluated,
        violations=violations,
        frequency=freq,
        ceiling=ceiling,
        binomial_se=se,
        consistent=bool(consistent),
        violations_by_bound={k: int(agg["viol_" + k][ok].sum()) for k in _BOUND_KEYS},
        lemma_failures=int(agg["lemma_failed"].sum()),
        cone_failures=int((~agg["cone_ok"][ok]).sum()),
        non_converged=int((~agg["converged"][ok]).sum()),
        kappa=float(kap.mean()),
        kappa_source=source or (KappaSource.EXACT if kappa is None else KappaSource.SAMPLED),
        C_mean=float(agg["C"].mean()),
        lam_mean=float(lam.mean()) if evaluated else float("nan"),
        est_risk_mean=float(agg["est"][ok].mean()) if evaluated else float("nan"),
        pred_risk_mean=float(agg["pred"][ok].mean()) if evaluated else float("nan"),
        est_bound_mean=est_b,
        pr_bound_mean=pr_b,
    )
