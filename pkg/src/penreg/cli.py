"""Batch command-line front end: ``penreg {fit,path,risk,bounds,mc}``.

Input is either a CSV file (``--input``) or an inline data-generating process
under the ``"dgp"`` key of a JSON config (``--config``).  Flags override
config fields.  Reports are JSON (default) or CSV, with every float written
to 17 significant digits so outputs are byte-stable and round-trip exactly.

Config schema (all keys optional unless the subcommand needs them)::

    {
      "input": "data.csv", "header": true, "target": "y",
      "estimator": "lasso", "lambda": 0.1, "radius": 2,
      "standardize": null, "n_lambda": 100, "ratio": null,
      "tol": 1e-10, "max_iter": 10000, "kkt_tol": 1e-8,
      "seed": 0, "workers": null, "out": null, "format": "json",
      "theta0": [..], "sigma": 1.0, "lambda_grid": [..],
      "replications": 1000, "experiment": "risk",
      "bounds": {"mode": "deterministic", "delta": 0.3, "kappa": null,
                 "kappa_source": null, "alpha": 3.0},
      "dgp": {
        "design": {"type": "gaussian" | "orthonormal" | "rank_deficient"
                           | "matrix" | "random_gaussian" | "random_collinear",
                   "n": .., "p": .., "r": .., "seed": .., "X": [[..]],
                   "mean": [..], "cov": [[..]], "loadings": [[..]]},
        "n": .., "theta0": [..] | {"s0": 3, "value": 1.0, "p": ..},
        "error": {"family": "gaussian", "scale": 1.0}
      }
    }
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .bounds import (
    BoundInputs,
    BoundMode,
    column_norm_bound,
    lambda_oracle,
    lasso_bound_report,
    lemma_audit,
    observe,
    subgaussian_lambda,
)
from .errors import InputOutputError, NumericalError, PenregError, ValidationError
from .estimators import (
    CdOptions,
    Dataset,
    EstimatorKind,
    FitResult,
    fit,
    fit_lasso_cd,
    lasso_path,
    standardized_path,
)
from .risk import Estimand, RiskReport, find_lambda_star, theoretical_risk
from .simulate import (
    BoundConfig,
    CollinearDesign,
    DgpSpec,
    ErrorFamily,
    EstimatorConfig,
    FixedDesign,
    GaussianDesign,
    McConfig,
    default_workers,
    design_kappa,
    gaussian_design,
    mc_bound_coverage,
    mc_risk,
    orthonormal_design,
    rank_deficient_design,
    sample_dgp,
)

SUBCOMMANDS = ("fit", "path", "risk", "bounds", "mc")


# -- CSV ingestion -------------------------------------------------------------


def _resolve_target(target, names: list[str] | None, ncol: int) -> int:
    if target is None:
        return 0
    if isinstance(target, str) and names is not None and target in names:
        return names.index(target)
    try:
        idx = int(target)
    except (TypeError, ValueError):
        raise ValidationError(f"target column {target!r} not found") from None
    if not 1 <= idx <= ncol:
        raise ValidationError(f"target column index {idx} outside 1..{ncol}")
    return idx - 1


def load_csv(path, has_header: bool = True, target=None) -> Dataset:
    """Read a numeric table; ``y`` is the target column, ``X`` the rest.

    ``target`` is a header name or a 1-based column index (default: first
    column).  Blank lines at the end of the file are ignored.  Row and column
    numbers in error messages are 1-based and count data rows only.
    """
    try:
        with open(path, newline="", encoding="utf-8-sig") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise InputOutputError(f"cannot read {path}: {exc.strerror or exc}") from exc
    except UnicodeDecodeError as exc:
        raise ValidationError(f"{path} is not valid UTF-8") from exc
    while rows and not any(c.strip() for c in rows[-1]):
        rows.pop()
    names = None
    if has_header:
        if not rows:
            raise ValidationError(f"{path} is empty")
        names = [c.strip() for c in rows[0]]
        rows = rows[1:]
    if not rows:
        raise ValidationError(f"{path} has no data rows")
    ncol = len(names) if names is not None else len(rows[0])
    if ncol < 2:
        raise ValidationError("need a target column and at least one predictor")
    data = np.empty((len(rows), ncol))
    for i, row in enumerate(rows, start=1):
        if len(row) != ncol:
            raise ValidationError(f"row {i} has {len(row)} fields, expected {ncol}")
        for j, cell in enumerate(row, start=1):
            try:
                data[i - 1, j - 1] = float(cell)
            except ValueError:
                raise ValidationError(f"non-numeric cell {cell.strip()!r} at (row {i}, col {j})") from None
    t = _resolve_target(target, names, ncol)
    keep = [j for j in range(ncol) if j != t]
    x_names = tuple(names[j] for j in keep) if names is not None else None
    return Dataset(y=data[:, t], X=data[:, keep], names=x_names)


# -- serialization -------------------------------------------------------------


def _num(x: float) -> str:
    x = float(x)
    if not math.isfinite(x):
        return "null"
    return format(x, ".17g")


def _plain(v: Any) -> Any:
    if isinstance(v, np.ndarray):
        return [_plain(x) for x in v.tolist()]
    if isinstance(v, (np.floating,)):
        return float(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, np.bool_):
        return bool(v)
    if hasattr(v, "value") and isinstance(getattr(v, "value"), str):
        return v.value
    if isinstance(v, dict):
        return {str(k): _plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    return v


def dumps_json(obj: Any, indent: int = 0) -> str:
    """JSON with floats at 17 significant digits; non-finite floats → null."""
    obj = _plain(obj)
    pad = "  " * (indent + 1)
    end = "  " * indent
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return _num(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(k)}: {dumps_json(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, list):
        if all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in obj):
            return "[" + ", ".join(dumps_json(x) for x in obj) + "]"
        if not obj:
            return "[]"
        return "[\n" + ",\n".join(pad + dumps_json(x, indent + 1) for x in obj) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _flatten(record: dict, prefix: str = "") -> dict:
    out = {}
    for k, v in _plain(record).items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flatten(v, key + "."))
        elif isinstance(v, list):
            for j, x in enumerate(v, start=1):
                out[f"{key}.{j}"] = x
        else:
            out[key] = v
    return out


def dumps_csv(records: list[dict]) -> str:
    """One row per record; nested fields become dotted columns."""
    flat = [_flatten(r) for r in records]
    cols: list[str] = []
    for r in flat:
        cols.extend(k for k in r if k not in cols)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in flat:
        row = []
        for c in cols:
            v = r.get(c)
            if v is None:
                row.append("")
            elif isinstance(v, bool):
                row.append("true" if v else "false")
            elif isinstance(v, float):
                row.append("" if not math.isfinite(v) else _num(v))
            else:
                row.append(v)
        w.writerow(row)
    return buf.getvalue()


# -- configuration --------------------------------------------------------------


@dataclass
class RunConfig:
    subcommand: str
    input: str | None = None
    dgp: dict | None = None
    header: bool = True
    target: Any = None
    estimator: str | None = None
    lam: float | None = None
    radius: int | None = None
    standardize: bool | None = None
    n_lambda: int = 100
    ratio: float | None = None
    tol: float = 1e-10
    max_iter: int = 10000
    kkt_tol: float = 1e-8
    seed: int = 0
    workers: int | None = None
    out: str | None = None
    format: str = "json"
    theta0: list | None = None
    sigma: float | None = None
    lambda_grid: list | None = None
    replications: int | None = None
    experiment: str = "risk"
    bounds: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.subcommand not in SUBCOMMANDS:
            raise ValidationError(f"unknown subcommand {self.subcommand!r}")
        if (self.input is None) == (self.dgp is None):
            raise ValidationError("exactly one input source is required: --input CSV or a config 'dgp' block")
        if self.format not in ("json", "csv"):
            raise ValidationError(f"unknown format {self.format!r}")
        if self.lam is not None and not self.lam > 0:
            raise ValidationError("lambda must be > 0")
        if self.n_lambda < 1:
            raise ValidationError("n_lambda must be >= 1")
        if self.seed < 0:
            raise ValidationError("seed must be >= 0")

    @property
    def cd(self) -> CdOptions:
        return CdOptions(max_iterations=self.max_iter, tol=self.tol, kkt_tol=self.kkt_tol)

    @property
    def kind(self) -> EstimatorKind:
        try:
            return EstimatorKind(self.estimator or ("lasso" if self.subcommand in ("path", "bounds") else "ridgeless"))
        except ValueError:
            raise ValidationError(f"unknown estimator {self.estimator!r}") from None

    @property
    def use_standardize(self) -> bool:
        if self.standardize is not None:
            return self.standardize
        return self.kind is EstimatorKind.LASSO

    @property
    def n_workers(self) -> int:
        return self.workers or default_workers()


_CONFIG_KEYS = {
    "input", "dgp", "header", "target", "estimator", "lambda", "radius", "standardize",
    "n_lambda", "ratio", "tol", "max_iter", "kkt_tol", "seed", "workers", "out", "format",
    "theta0", "sigma", "lambda_grid", "replications", "experiment", "bounds",
}


def _load_config(path: str) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputOutputError(f"cannot read config {path}: {exc.strerror or exc}") from exc
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ValidationError("config must be a JSON object")
    unknown = sorted(set(cfg) - _CONFIG_KEYS)
    if unknown:
        raise ValidationError(f"unknown config keys: {', '.join(unknown)}")
    return cfg


def build_config(args: argparse.Namespace) -> RunConfig:
    """Merge the JSON config (if any) with command-line flags; flags win."""
    cfg = _load_config(args.config) if args.config else {}
    flags = {
        "input": args.input, "target": args.target, "estimator": args.estimator,
        "lambda": args.lam, "radius": args.radius, "standardize": args.standardize,
        "n_lambda": args.n_lambda, "ratio": args.ratio, "tol": args.tol,
        "max_iter": args.max_iter, "seed": args.seed, "workers": args.workers,
        "out": args.out, "format": args.format, "header": args.header,
        "replications": args.replications, "experiment": args.experiment,
    }
    for k, v in flags.items():
        if v is not None:
            cfg[k] = v
    if args.input is not None:
        cfg.pop("dgp", None)
    if "lambda" in cfg:
        cfg["lam"] = cfg.pop("lambda")
    if cfg.get("workers") is not None and cfg["workers"] < 1:
        raise ValidationError("workers must be >= 1")
    try:
        return RunConfig(subcommand=args.subcommand, **cfg)
    except TypeError as exc:
        raise ValidationError(f"bad config: {exc}") from exc


# -- DGP construction -------------------------------------------------------------


def _theta0_from(spec, p: int) -> np.ndarray:
    if isinstance(spec, dict):
        s0 = int(spec.get("s0", 0))
        if not 0 <= s0 <= p:
            raise ValidationError(f"s0 must lie in [0, {p}]")
        theta = np.zeros(p)
        theta[:s0] = float(spec.get("value", 1.0))
        return theta
    return np.asarray(spec, dtype=float)


def dgp_from_config(block: dict, seed: int) -> DgpSpec:
    """Build a :class:`DgpSpec` from the ``"dgp"`` config block."""
    if not isinstance(block, dict) or "design" not in block or "theta0" not in block:
        raise ValidationError("dgp block needs 'design' and 'theta0'")
    des = block["design"]
    kind = des.get("type")
    dseed = int(des.get("seed", seed))
    n = block.get("n", des.get("n"))
    try:
        if kind == "matrix":
            design = FixedDesign(np.asarray(des["X"], dtype=float))
        elif kind == "gaussian":
            design = FixedDesign(gaussian_design(int(des["n"]), int(des["p"]), dseed))
        elif kind == "orthonormal":
            design = FixedDesign(orthonormal_design(int(des["n"]), int(des["p"]), dseed))
        elif kind == "rank_deficient":
            design = FixedDesign(rank_deficient_design(int(des["n"]), int(des["p"]), int(des["r"]), dseed))
        elif kind == "random_gaussian":
            design = GaussianDesign(np.asarray(des["mean"], dtype=float), np.asarray(des["cov"], dtype=float))
        elif kind == "random_collinear":
            design = CollinearDesign(np.asarray(des["loadings"], dtype=float))
        else:
            raise ValidationError(f"unknown design type {kind!r}")
    except KeyError as exc:
        raise ValidationError(f"design {kind!r} is missing field {exc.args[0]!r}") from None
    err = block.get("error", {})
    error = ErrorFamily(err.get("family", "gaussian"), float(err.get("scale", 1.0)))
    theta0 = _theta0_from(block["theta0"], design.p)
    return DgpSpec(design, theta0, error, n=None if isinstance(design, FixedDesign) else n, seed=seed)


# -- subcommands ---------------------------------------------------------------------


def _dataset(cfg: RunConfig) -> tuple[Dataset, DgpSpec | None, np.ndarray | None]:
    if cfg.input is not None:
        return load_csv(cfg.input, cfg.header, cfg.target), None, None
    spec = dgp_from_config(cfg.dgp, cfg.seed)
    d, eps = sample_dgp(spec, 0)
    return d, spec, eps


def _coefs(d: Dataset, theta: np.ndarray) -> dict:
    return {d.column_name(j): float(theta[j]) for j in range(d.p)}


def _fit_record(d: Dataset, res: FitResult) -> dict:
    return {
        "estimator": res.kind.value,
        "lambda": res.lam,
        "radius": res.radius,
        "standardized": res.standardized,
        "converged": res.converged,
        "iterations": res.iterations,
        "kkt_violation": res.kkt_violation,
        "objective": res.objective,
        "intercept": res.intercept,
        "nonzero": res.nonzero,
        "l1_norm": res.l1_norm,
        "support": None if res.support is None else [j + 1 for j in res.support],
        "coefficients": _coefs(d, res.theta),
    }


def cmd_fit(cfg: RunConfig) -> list[dict]:
    d, _, _ = _dataset(cfg)
    res = fit(d, cfg.kind, cfg.lam, radius=cfg.radius, standardize_data=cfg.use_standardize, opts=cfg.cd)
    return [_fit_record(d, res)]


def cmd_path(cfg: RunConfig) -> list[dict]:
    d, _, _ = _dataset(cfg)
    if cfg.kind is not EstimatorKind.LASSO:
        raise ValidationError("path is only defined for the lasso")
    ratio = cfg.ratio if cfg.ratio is not None else (1e-3 if d.n > d.p else 1e-2)
    if cfg.use_standardize:
        path, _ = standardized_path(d, cfg.n_lambda, ratio, cfg.cd)
    else:
        path = lasso_path(d, cfg.n_lambda, ratio, cfg.cd)
    rows = []
    for k, (lam, res) in enumerate(zip(path.grid, path.fits)):
        rec = {"index": k, "lambda": float(lam), "lambda_max": path.lambda_max}
        rec.update(_fit_record(d, res))
        del rec["estimator"], rec["radius"], rec["support"]
        rows.append(rec)
    return rows


def _risk_record(rep: RiskReport, **extra) -> dict:
    rec = {
        "source": rep.source,
        "estimator": rep.kind,
        "lambda": rep.lam,
        "bias_norm_sq": rep.bias_norm_sq,
        "trace_var": rep.trace_var,
        "mse": rep.mse,
        "mpr": rep.mpr,
        "pred_bias_sq": rep.pred_bias_sq,
        "pred_var": rep.pred_var,
        "replications": rep.replications,
        "mse_se": rep.mse_se,
        "mpr_se": rep.mpr_se,
        "conditional_on_design": rep.conditional_on_design,
    }
    rec.update(extra)
    return rec


def _risk_setup(cfg: RunConfig):
    if cfg.input is not None:
        d = load_csv(cfg.input, cfg.header, cfg.target)
        if cfg.theta0 is None or cfg.sigma is None:
            raise ValidationError("risk from a CSV design needs 'theta0' and 'sigma' in the config")
        return d.X, np.asarray(cfg.theta0, dtype=float), float(cfg.sigma), None
    spec = dgp_from_config(cfg.dgp, cfg.seed)
    if not spec.is_fixed:
        raise ValidationError("closed-form risk needs a fixed design; use 'mc' for random designs")
    sigma = float(cfg.sigma) if cfg.sigma is not None else spec.error.std
    return spec.design.X, spec.theta0, sigma, spec


def cmd_risk(cfg: RunConfig) -> list[dict]:
    X, theta0, sigma, spec = _risk_setup(cfg)
    est = Estimand.from_design(X, theta0, sigma)
    kind = cfg.kind
    rows: list[dict] = []
    if kind is EstimatorKind.RIDGE and cfg.lambda_grid:
        star = find_lambda_star(X, est, cfg.lambda_grid)
        rows.append(_risk_record(theoretical_risk(EstimatorKind.RIDGELESS, X, est)))
        for g in cfg.lambda_grid:
            rep = theoretical_risk(kind, X, est, float(g))
            rows.append(_risk_record(rep, is_lambda_star=star is not None and float(g) == star))
    else:
        rows.append(_risk_record(theoretical_risk(kind, X, est, cfg.lam)))
    if spec is not None and cfg.replications:
        res = mc_risk(spec, EstimatorConfig(kind, cfg.lam), McConfig(cfg.replications, cfg.n_workers))
        rows.append(_risk_record(res.empirical))
    return rows


def _bound_config(cfg: RunConfig) -> BoundConfig:
    b = dict(cfg.bounds)
    allowed = {"mode", "delta", "kappa", "kappa_source", "alpha", "re_samples", "re_refine_steps", "audit"}
    unknown = sorted(set(b) - allowed)
    if unknown:
        raise ValidationError(f"unknown bounds keys: {', '.join(unknown)}")
    try:
        return BoundConfig(cd=cfg.cd, **b)
    except ValueError as exc:
        raise ValidationError(str(exc)) from exc


def cmd_bounds(cfg: RunConfig) -> list[dict]:
    bcfg = _bound_config(cfg)
    d, spec, eps = _dataset(cfg)
    if spec is not None:
        theta0, proxy = spec.theta0, spec.error.variance_proxy
    else:
        if cfg.theta0 is None:
            raise ValidationError("bounds from a CSV need 'theta0' in the config")
        theta0 = np.asarray(cfg.theta0, dtype=float)
        if theta0.shape != (d.p,):
            raise ValidationError(f"theta0 must have length {d.p}")
        eps = d.y - d.X @ theta0
        proxy = cfg.sigma
    lam_or = lambda_oracle(d.X, eps)
    C = column_norm_bound(d.X)
    if bcfg.mode is BoundMode.DETERMINISTIC:
        lam = cfg.lam if cfg.lam is not None else lam_or
    else:
        if proxy is None or not proxy > 0:
            raise ValidationError("sub-Gaussian bounds need a positive 'sigma' (variance proxy)")
        lam = subgaussian_lambda(C, proxy, d.p, d.n, bcfg.delta)
    if not lam > 0:
        raise ValidationError("oracle penalty is zero; no bound to evaluate")
    kappa, source = design_kappa(d.X, theta0, bcfg, seed=cfg.seed)
    res = fit_lasso_cd(d, lam, cfg.cd)
    inputs = BoundInputs(lam=lam, s0=int(np.count_nonzero(theta0)), kappa=kappa,
                         theta0_l1=float(np.abs(theta0).sum()), C=C, sigma=proxy or 1.0,
                         delta=bcfg.delta, p=d.p, n=d.n, kappa_source=source)
    rep = observe(lasso_bound_report(inputs, bcfg.mode), d.X, res.theta, theta0)
    audit = None
    if bcfg.mode is BoundMode.DETERMINISTIC and res.converged and lam >= lam_or > 0:
        audit = lemma_audit(d, res, theta0, eps)
    obs = rep.observed
    return [{
        "mode": rep.mode.value,
        "lambda": rep.lam,
        "lambda_oracle": lam_or,
        "lemma_pr_bound": rep.lemma_pr_bound,
        "est_bound": rep.est_bound,
        "pr_bound": rep.pr_bound,
        "probability_floor": rep.probability_floor,
        "kappa": rep.kappa,
        "kappa_source": rep.kappa_source.value,
        "C": rep.C,
        "est_risk": obs.est_risk,
        "pred_risk": obs.pred_risk,
        "cone_ok": obs.cone_ok,
        "satisfied": obs.satisfied,
        "violated": rep.violated,
        "lemma_audit_passed": None if audit is None else audit.passed,
        "converged": res.converged,
        "kkt_violation": res.kkt_violation,
    }]


def cmd_mc(cfg: RunConfig) -> list[dict]:
    if cfg.dgp is None:
        raise ValidationError("mc needs a 'dgp' block in the config")
    spec = dgp_from_config(cfg.dgp, cfg.seed)
    mc = McConfig(cfg.replications or 1000, cfg.n_workers)
    if cfg.experiment == "coverage":
        c = mc_bound_coverage(spec, _bound_config(cfg), mc)
        return [{
            "experiment": "coverage",
            "mode": c.mode.value,
            "replications": c.replications,
            "evaluated": c.evaluated,
            "violations": c.violations,
            "frequency": c.frequency,
            "ceiling": c.ceiling,
            "binomial_se": c.binomial_se,
            "consistent": c.consistent,
            "violations_by_bound": c.violations_by_bound,
            "lemma_failures": c.lemma_failures,
            "cone_failures": c.cone_failures,
            "non_converged": c.non_converged,
            "converged": c.non_converged == 0,
            "kappa": c.kappa,
            "kappa_source": c.kappa_source.value,
            "C_mean": c.C_mean,
            "lambda_mean": c.lam_mean,
            "est_risk_mean": c.est_risk_mean,
            "pred_risk_mean": c.pred_risk_mean,
            "est_bound_mean": c.est_bound_mean,
            "pr_bound_mean": c.pr_bound_mean,
        }]
    if cfg.experiment != "risk":
        raise ValidationError(f"unknown experiment {cfg.experiment!r}")
    est = EstimatorConfig(cfg.kind, cfg.lam, cfg.radius, cfg.use_standardize, cfg.cd)
    res = mc_risk(spec, est, mc)
    rows = [_risk_record(res.empirical, experiment="risk",
                         mean_theta=res.empirical.mean_theta, mean_theta_se=res.empirical.mean_theta_se,
                         target=res.target)]
    if res.theoretical is not None:
        th = res.theoretical
        rows.append(_risk_record(th, experiment="risk", source="theoretical_conditional"
                                 if th.conditional_on_design else "theoretical"))
    return rows


_COMMANDS = {"fit": cmd_fit, "path": cmd_path, "risk": cmd_risk, "bounds": cmd_bounds, "mc": cmd_mc}


def render(cfg: RunConfig, records: list[dict]) -> str:
    if cfg.format == "csv":
        return dumps_csv(records)
    return dumps_json({"subcommand": cfg.subcommand, "records": records}) + "\n"


def run(cfg: RunConfig) -> str:
    """Execute one subcommand and return the rendered report."""
    return render(cfg, _COMMANDS[cfg.subcommand](cfg))


# -- argument parsing -------------------------------------------------------------


def _bool_flag(p: argparse.ArgumentParser, name: str, help: str) -> None:
    p.add_argument(f"--{name}", dest=name.replace("-", "_"), action=argparse.BooleanOptionalAction,
                   default=None, help=help)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file; flags override its fields")
    common.add_argument("--input", help="CSV dataset")
    common.add_argument("--target", help="target column name or 1-based index (default: first column)")
    _bool_flag(common, "header", "CSV has a header row (default: yes)")
    common.add_argument("--estimator", choices=[k.value for k in EstimatorKind])
    common.add_argument("--lambda", dest="lam", type=float, help="penalty level")
    common.add_argument("--radius", type=int, help="support size for the l0 oracle")
    _bool_flag(common, "standardize", "standardize before fitting (default: lasso only)")
    common.add_argument("--n-lambda", type=int, help="path grid size (default 100)")
    common.add_argument("--ratio", type=float, help="lambda_min / lambda_max on the path")
    common.add_argument("--tol", type=float, help="coordinate descent tolerance (default 1e-10)")
    common.add_argument("--max-iter", type=int, help="coordinate descent sweep limit (default 10000)")
    common.add_argument("--seed", type=int, help="base seed (default 0)")
    common.add_argument("--workers", type=int, help="parallel workers for mc (default: all CPUs)")
    common.add_argument("--replications", type=int, help="Monte Carlo replications")
    common.add_argument("--experiment", choices=["risk", "coverage"], help="mc experiment (default risk)")
    common.add_argument("--out", help="write the report here instead of stdout")
    common.add_argument("--format", choices=["json", "csv"])

    parser = argparse.ArgumentParser(prog="penreg", description="Penalized least squares toolkit.")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    helps = {
        "fit": "fit one estimator",
        "path": "lasso regularization path",
        "risk": "closed-form risk of LSE/ridgeless/ridge",
        "bounds": "lasso risk bounds for one dataset",
        "mc": "Monte Carlo risk or bound coverage",
    }
    for name in SUBCOMMANDS:
        sub.add_parser(name, parents=[common], help=helps[name])
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = build_config(args)
        report = run(cfg)
        if cfg.out:
            try:
                Path(cfg.out).write_text(report, encoding="utf-8")
            except OSError as exc:
                raise InputOutputError(f"cannot write {cfg.out}: {exc.strerror or exc}") from exc
        else:
            sys.stdout.write(report)
    except PenregError as exc:
        print(f"penreg {args.subcommand}: error: {exc}", file=sys.stderr)
        return exc.exit_code
    except np.linalg.LinAlgError as exc:
        print(f"penreg {args.subcommand}: numerical error: {exc}", file=sys.stderr)
        return NumericalError.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
