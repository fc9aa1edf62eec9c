"""Experiment harness: configuration, synthetic data, budget ledger, reports.

Every run is reproducible from (config, seed list) alone: each trial derives
one noise stream for data generation and one for the mechanisms from its
seed, and result rows are sorted by (seed, trial) before writing.  The CSV
schema is fixed across tasks: one row per metric with columns
{task, seed, trial, n, d, param-json, metric-name, metric-value}.
"""

from __future__ import annotations

import csv
import json
import math
import time
from dataclasses import dataclass, field, asdict
from pathlib import Path
from typing import Optional

import numpy as np

from . import covariance, covariance_unbounded, mean, metrics, product
from .attacks import run_tracing_attack
from .errors import InvalidParameterError
from .histogram import histogram_zcdp
from .linalg import GaussianParams, sample_gaussian
from .noise import NoiseSource, _mix64
from .privacy import PrivacyBudget

TASKS = ("gaussian-cov", "gaussian-cov-unbounded", "gaussian-mean",
         "gaussian-full", "product", "attack")

CSV_COLUMNS = ("task", "seed", "trial", "n", "d", "param-json",
               "metric-name", "metric-value")


@dataclass
class ExperimentConfig:
    task: str
    n: int = 10000
    d: int = 4
    trials: int = 1
    seeds: Optional[list] = None
    seed: int = 0
    rho: Optional[float] = None
    eps: Optional[float] = None
    delta: Optional[float] = None
    alpha: float = 0.2
    beta: float = 0.05
    R: float = 10.0
    kappa: float = 100.0
    spectrum: Optional[list] = None
    p: Optional[list] = None
    m: Optional[int] = None          # product block-size override
    mechanism: str = "empirical-mean"
    attack_trials: int = 200
    mc_trials: int = 4000
    flip_heavy: bool = False
    zero_noise: bool = False
    data_path: Optional[str] = None
    out: Optional[str] = None
    samples_csv: bool = False
    header: bool = False
    sweep_n: Optional[list] = None

    def __post_init__(self):
        if self.task not in TASKS:
            raise InvalidParameterError(
                f"unknown task {self.task!r}; expected one of {TASKS}")
        if self.trials < 1:
            raise InvalidParameterError("trials must be >= 1")
        has_rho = self.rho is not None
        has_approx = self.eps is not None or self.delta is not None
        if has_rho and has_approx:
            raise InvalidParameterError("set either rho or (eps, delta), not both")
        if not has_rho and not (self.eps is not None and self.delta is not None):
            raise InvalidParameterError("set rho or both of eps and delta")

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        allowed = {f.name for f in cls.__dataclass_fields__.values()}
        unknown = set(raw) - allowed
        if unknown:
            raise InvalidParameterError(f"unknown config keys: {sorted(unknown)}")
        return cls(**raw)

    def trial_seeds(self) -> list[int]:
        if self.seeds is not None:
            return [int(s) for s in self.seeds]
        return [self.seed + t for t in range(self.trials)]

    def param_json(self) -> str:
        keep = {}
        for k in ("rho", "eps", "delta", "alpha", "beta", "R", "kappa",
                  "mechanism", "zero_noise", "m"):
            v = getattr(self, k)
            if v is not None and v is not False:
                keep[k] = v
        return json.dumps(keep, sort_keys=True)


@dataclass
class TrialReport:
    config: ExperimentConfig
    rows: list = field(default_factory=list)
    per_trial: list = field(default_factory=list)
    aggregates: dict = field(default_factory=dict)


def _default_spectrum(d: int, kappa: float) -> np.ndarray:
    """Geometric spread from 1 to kappa across coordinates."""
    if d == 1 or kappa <= 1:
        return np.ones(d) * max(kappa, 1.0)
    return np.geomspace(1.0, kappa, d)


def _truth_gaussian(cfg: ExperimentConfig, data_src: NoiseSource) -> GaussianParams:
    if cfg.spectrum is not None:
        spec = np.asarray(cfg.spectrum, dtype=float)
        if spec.shape[0] != cfg.d:
            raise InvalidParameterError("spectrum length must equal d")
    else:
        spec = _default_spectrum(cfg.d, cfg.kappa)
    mu = np.zeros(cfg.d)
    if cfg.task in ("gaussian-mean", "gaussian-full") and cfg.R > 0:
        raw = data_src.uniform(-1.0, 1.0, size=cfg.d)
        mu = raw * cfg.R / max(1.0, math.sqrt(cfg.d) * 2.0)
    return GaussianParams(mean=mu, cov=np.diag(spec), R=cfg.R, kappa=cfg.kappa)


def _truth_product(cfg: ExperimentConfig) -> np.ndarray:
    if cfg.p is not None:
        p = np.asarray(cfg.p, dtype=float)
        if p.shape[0] != cfg.d:
            raise InvalidParameterError("p length must equal d")
        return p
    # mixed default: a few clearly heavy, a few rare, rest at 1/d
    d = cfg.d
    p = np.full(d, 1.0 / d)
    p[: d // 3] = 0.4
    p[d // 3: 2 * (d // 3)] = 0.05
    return p


def learn_product_flip_heavy(x: np.ndarray, rho: float, alpha: float,
                             beta: float, noise: NoiseSource,
                             m: Optional[int] = None,
                             diagnostics: Optional[dict] = None) -> product.ProductModel:
    """Bit-flip preprocessing for heavy coordinates, then the learner.

    A tenth of the budget votes per coordinate on whether the 1-frequency
    exceeds 1/2 (those columns are flipped and the estimate flipped back);
    the learner runs with the remaining 9/10.
    """
    x = np.asarray(x)
    d = x.shape[1]
    vote_rho = rho / 10.0
    flipped = []
    for j in range(d):
        h = histogram_zcdp(list(x[:, j].astype(int)), [0, 1], vote_rho / d,
                           beta, noise)
        if h.entries.get(1, 0.0) > 0.5:
            flipped.append(j)
    xf = x.copy()
    if flipped:
        xf[:, flipped] = 1 - xf[:, flipped]
    model = product.ppde(xf, 0.9 * rho, alpha, beta, noise, m=m,
                         diagnostics=diagnostics)
    q = model.p.copy()
    if flipped:
        q[flipped] = 1.0 - q[flipped]
    if diagnostics is not None:
        diagnostics["flipped"] = flipped
        diagnostics["budget_spent"] = PrivacyBudget.zcdp(rho)
    return product.ProductModel(p=q)


def _attack_mechanism(cfg: ExperimentConfig, mech_src: NoiseSource):
    """Mean estimators over {-1,+1} rows for the tracing harness."""
    name = cfg.mechanism
    if name == "empirical-mean":
        return lambda x: x.mean(axis=0)
    if name == "true-mean":
        return lambda x: np.zeros(x.shape[1])
    if name == "ppde":
        rho = cfg.rho if cfg.rho is not None else 1.0

        def mech(x):
            x01 = ((x + 1) / 2).astype(int)
            model = product.ppde(x01, rho, cfg.alpha, cfg.beta, mech_src,
                                 m=cfg.m)
            return 2.0 * model.p - 1.0

        return mech
    raise InvalidParameterError(f"unknown mechanism {name!r}")


def _run_trial(cfg: ExperimentConfig, seed: int, trial: int) -> dict:
    data_src = NoiseSource(_mix64(seed * 2 + 1))
    mech_src = NoiseSource(seed, zero_noise=cfg.zero_noise)
    out: dict = {"seed": seed, "trial": trial, "metrics": {}, "extra": {}}
    t0 = time.perf_counter()

    if cfg.task == "gaussian-cov":
        truth = _truth_gaussian(cfg, data_src)
        x = sample_gaussian(truth, cfg.n, data_src)
        est = covariance.pgce(x, cfg.rho, cfg.beta, cfg.kappa, mech_src)
        out["metrics"]["mahalanobis-cov"] = metrics.mahalanobis_mat(
            truth.cov - est.sigma_hat, truth.cov)
        out["budget"] = est.budget_spent
        out["extra"]["dropped"] = est.diagnostics.get("dropped")
        out["samples"] = x if cfg.samples_csv else None

    elif cfg.task == "gaussian-cov-unbounded":
        truth = _truth_gaussian(cfg, data_src)
        x = sample_gaussian(truth, cfg.n, data_src)
        est = covariance_unbounded.pgce_no_bound(x, cfg.eps, cfg.delta,
                                                 cfg.beta, mech_src)
        out["metrics"]["mahalanobis-cov"] = metrics.mahalanobis_mat(
            truth.cov - est.sigma_hat, truth.cov)
        out["budget"] = est.budget_spent
        out["samples"] = x if cfg.samples_csv else None

    elif cfg.task == "gaussian-mean":
        truth = _truth_gaussian(cfg, data_src)
        x = sample_gaussian(truth, cfg.n, data_src)
        est = mean.pme(x, cfg.rho, cfg.alpha, cfg.beta, cfg.R, cfg.kappa,
                       mech_src)
        out["budget"] = est.budget_spent
        if est.aborted:
            out["metrics"]["aborted"] = 1.0
        else:
            out["metrics"]["aborted"] = 0.0
            out["metrics"]["mahalanobis-mean"] = metrics.mahalanobis_vec(
                truth.mean - est.mu_hat, truth.cov)
        out["samples"] = x if cfg.samples_csv else None

    elif cfg.task == "gaussian-full":
        truth = _truth_gaussian(cfg, data_src)
        x = sample_gaussian(truth, cfg.n, data_src)
        m_est, c_est = mean.learn_gaussian(x, cfg.rho, cfg.alpha, cfg.beta,
                                           cfg.R, cfg.kappa, mech_src)
        out["budget"] = PrivacyBudget.zcdp(
            m_est.budget_spent.rho + c_est.budget_spent.rho)
        if m_est.aborted:
            out["metrics"]["aborted"] = 1.0
        else:
            out["metrics"]["aborted"] = 0.0
            out["metrics"]["mahalanobis-mean"] = metrics.mahalanobis_vec(
                truth.mean - m_est.mu_hat, truth.cov)
            out["metrics"]["mahalanobis-cov"] = metrics.mahalanobis_mat(
                truth.cov - c_est.sigma_hat, truth.cov)
            tv, se = metrics.tv_gaussian_mc(
                truth, GaussianParams(mean=m_est.mu_hat, cov=c_est.sigma_hat),
                cfg.mc_trials, data_src)
            out["metrics"]["tv-estimate"] = tv
            out["metrics"]["tv-stderr"] = se
        out["samples"] = x if cfg.samples_csv else None

    elif cfg.task == "product":
        p = _truth_product(cfg)
        x = (data_src.uniform(size=(cfg.n, cfg.d)) < p).astype(np.int8)
        diag: dict = {}
        if cfg.flip_heavy:
            model = learn_product_flip_heavy(x, cfg.rho, cfg.alpha, cfg.beta,
                                             mech_src, m=cfg.m,
                                             diagnostics=diag)
        else:
            model = product.ppde(x, cfg.rho, cfg.alpha, cfg.beta, mech_src,
                                 m=cfg.m, diagnostics=diag)
        out["budget"] = diag.get("budget_spent", PrivacyBudget.zcdp(cfg.rho))
        out["metrics"]["sd-upper"] = metrics.product_sd_upper(p, model.p)
        if cfg.d <= 20:
            out["metrics"]["tv-exact"] = metrics.tv_product_exact(p, model.p)
        else:
            tv, se = metrics.tv_product_mc(p, model.p, cfg.mc_trials, data_src)
            out["metrics"]["tv-estimate"] = tv
            out["metrics"]["tv-stderr"] = se
        out["samples"] = x if cfg.samples_csv else None

    elif cfg.task == "attack":
        mech = _attack_mechanism(cfg, mech_src)
        report = run_tracing_attack(mech, "product", cfg.n, cfg.d,
                                    cfg.attack_trials, data_src, R=cfg.R)
        out["metrics"]["separation"] = report.separation
        out["metrics"]["fp-lemma-lhs"] = report.fp_lemma_lhs
        out["metrics"]["fp-lemma-stderr"] = report.fp_lemma_stderr
        out["metrics"]["failures"] = float(report.failures)
        out["budget"] = None
        out["extra"]["attack_summary"] = report.summary()

    out["runtime_ms"] = 1000.0 * (time.perf_counter() - t0)
    return out


def configured_budget(cfg: ExperimentConfig) -> Optional[PrivacyBudget]:
    """Total budget an estimator should report for this config."""
    if cfg.task == "attack":
        return None
    if cfg.rho is not None:
        if cfg.task == "gaussian-mean":
            return PrivacyBudget.zcdp(2.0 * cfg.rho)
        return PrivacyBudget.zcdp(cfg.rho)
    return None  # unbounded-covariance budgets are run-dependent; checked per run


def budget_ledger_check(report: TrialReport, tol: float = 1e-9) -> tuple[bool, list]:
    """Assert every trial's spent budget matches the configured budget."""
    expected = configured_budget(report.config)
    mismatches = []
    for row in report.per_trial:
        spent = row.get("budget")
        if expected is None or spent is None:
            continue
        if spent.regime != expected.regime:
            mismatches.append((row["seed"], spent, expected))
        elif spent.regime == "zcdp" and abs(spent.rho - expected.rho) > tol:
            mismatches.append((row["seed"], spent, expected))
    return (len(mismatches) == 0, mismatches)


def run_experiment(cfg: ExperimentConfig) -> TrialReport:
    """Run all configured trials; optionally write report.csv / report.json."""
    if cfg.sweep_n:
        return _run_sweep(cfg)
    report = TrialReport(config=cfg)
    seeds = cfg.trial_seeds()
    for trial, seed in enumerate(sorted(seeds)):
        res = _run_trial(cfg, seed, trial)
        report.per_trial.append(res)
        for name, value in sorted(res["metrics"].items()):
            report.rows.append({
                "task": cfg.task, "seed": seed, "trial": trial,
                "n": cfg.n, "d": cfg.d, "param-json": cfg.param_json(),
                "metric-name": name, "metric-value": value,
            })
    _aggregate(report)
    if cfg.out:
        write_report(report, Path(cfg.out))
    return report


def _run_sweep(cfg: ExperimentConfig) -> TrialReport:
    combined = TrialReport(config=cfg)
    for n in cfg.sweep_n:
        sub_raw = {**{k: getattr(cfg, k) for k in cfg.__dataclass_fields__},
                   "n": int(n), "sweep_n": None, "out": None}
        sub = ExperimentConfig.from_dict(sub_raw)
        rep = run_experiment(sub)
        combined.rows.extend(rep.rows)
        combined.per_trial.extend(rep.per_trial)
        for k, v in rep.aggregates.items():
            combined.aggregates[f"n={n}:{k}"] = v
    if cfg.out:
        write_report(combined, Path(cfg.out))
    return combined


def _aggregate(report: TrialReport):
    by_metric: dict[str, list] = {}
    for row in report.rows:
        by_metric.setdefault(row["metric-name"], []).append(row["metric-value"])
    for name, vals in by_metric.items():
        arr = np.asarray(vals, dtype=float)
        arr = arr[np.isfinite(arr)]
        if len(arr) == 0:
            continue
        report.aggregates[name] = {
            "median": float(np.median(arr)),
            "q25": float(np.quantile(arr, 0.25)),
            "q75": float(np.quantile(arr, 0.75)),
            "mean": float(arr.mean()),
        }


def write_report(report: TrialReport, out_dir: Path):
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "report.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_COLUMNS)
        for row in sorted(report.rows,
                          key=lambda r: (r["seed"], r["trial"], r["metric-name"])):
            w.writerow([row[c] if c != "metric-value" else repr(row[c])
                        for c in CSV_COLUMNS])
    cfg_dict = asdict(report.config)
    doc = {
        "config": cfg_dict,
        "aggregates": report.aggregates,
        "trials": [{
            "seed": r["seed"], "trial": r["trial"],
            "runtime_ms": r.get("runtime_ms"),
            "budget": r["budget"].as_dict() if r.get("budget") else None,
            "metrics": r["metrics"],
        } for r in report.per_trial],
    }
    with open(out_dir / "report.json", "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
    if report.config.samples_csv:
        _write_samples(report, out_dir)


def _write_samples(report: TrialReport, out_dir: Path):
    rows = []
    for r in report.per_trial:
        x = r.get("samples")
        if x is None:
            continue
        rows.append((r["seed"], x))
    if not rows:
        return
    with open(out_dir / "samples.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        if report.config.header:
            w.writerow(["seed"] + [f"x{j}" for j in range(report.config.d)])
        for seed, x in rows:
            for sample_row in np.asarray(x):
                w.writerow([seed] + [repr(float(v)) for v in sample_row])
