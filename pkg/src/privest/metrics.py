"""Distances between distributions and parameter-space error measures."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import ndtr

from .errors import InvalidParameterError, TooLargeError
from .linalg import GaussianParams, mahalanobis_mat, mahalanobis_vec
from .noise import NoiseSource

_EXACT_TV_MAX_DIM = 20


@dataclass
class DistanceReport:
    """Bundle of distances between a truth model and an estimate."""

    tv: Optional[float] = None
    tv_stderr: Optional[float] = None
    kl: Optional[float] = None
    chi2: Optional[float] = None
    mahalanobis_mean: Optional[float] = None
    mahalanobis_cov: Optional[float] = None

    def as_dict(self) -> dict:
        return {k: v for k, v in self.__dict__.items() if v is not None}


def tv_gaussian_same_cov(mu1: np.ndarray, mu2: np.ndarray,
                         sigma: np.ndarray) -> float:
    """TV(N(mu1, Sigma), N(mu2, Sigma)) = 2*Phi(||mu1-mu2||_Sigma / 2) - 1."""
    delta = np.asarray(mu1, dtype=float) - np.asarray(mu2, dtype=float)
    dist = mahalanobis_vec(delta, sigma)
    return float(2.0 * ndtr(dist / 2.0) - 1.0)


def _gaussian_logpdf_factory(params: GaussianParams):
    ell = np.linalg.cholesky(params.cov)
    half_logdet = float(np.sum(np.log(np.diag(ell))))
    d = params.dim
    const = -0.5 * d * math.log(2.0 * math.pi) - half_logdet

    def logpdf(x: np.ndarray) -> np.ndarray:
        w = np.linalg.solve(ell, (x - params.mean).T)
        return const - 0.5 * np.sum(w * w, axis=0)

    return logpdf, ell


def tv_gaussian_mc(p: GaussianParams, q: GaussianParams, trials: int,
                   noise: NoiseSource) -> tuple[float, float]:
    """Monte Carlo TV estimate E_{x~P}[max(0, 1 - q(x)/p(x))] with stderr.

    Density ratios are evaluated in log space, so extreme mismatches
    underflow to a contribution of exactly 1 instead of overflowing.
    """
    if trials < 2:
        raise InvalidParameterError("need at least 2 trials")
    logp, ell = _gaussian_logpdf_factory(p)
    logq, _ = _gaussian_logpdf_factory(q)
    z = noise.gaussian(1.0, size=(trials, p.dim))
    x = p.mean + z @ ell.T
    diff = logq(x) - logp(x)
    vals = np.maximum(0.0, -np.expm1(np.minimum(diff, 0.0)))
    est = float(vals.mean())
    stderr = float(vals.std(ddof=1) / math.sqrt(trials))
    return est, stderr


def _product_pmf(p: np.ndarray) -> np.ndarray:
    """Probabilities of all 2^d outcomes, bit j of the index = coordinate j."""
    out = np.array([1.0])
    for pj in p:
        out = np.concatenate([out * (1.0 - pj), out * pj])
    return out


def tv_product_exact(p: np.ndarray, q: np.ndarray) -> float:
    """Exact TV between two product distributions by full enumeration."""
    p = np.asarray(p, dtype=float).ravel()
    q = np.asarray(q, dtype=float).ravel()
    if p.shape != q.shape:
        raise InvalidParameterError("dimension mismatch")
    d = p.shape[0]
    if d > _EXACT_TV_MAX_DIM:
        raise TooLargeError(f"exact TV limited to d <= {_EXACT_TV_MAX_DIM}, got {d}")
    return float(0.5 * np.abs(_product_pmf(p) - _product_pmf(q)).sum())


def tv_product_mc(p: np.ndarray, q: np.ndarray, trials: int,
                  noise: NoiseSource) -> tuple[float, float]:
    """Monte Carlo TV estimate for product distributions of any dimension."""
    p = np.asarray(p, dtype=float).ravel()
    q = np.asarray(q, dtype=float).ravel()
    if trials < 2:
        raise InvalidParameterError("need at least 2 trials")
    u = noise.uniform(size=(trials, p.shape[0]))
    x = u < p
    eps = 1e-300
    logp = np.where(x, np.log(np.maximum(p, eps)), np.log(np.maximum(1 - p, eps))).sum(axis=1)
    logq = np.where(x, np.log(np.maximum(q, eps)), np.log(np.maximum(1 - q, eps))).sum(axis=1)
    vals = np.maximum(0.0, -np.expm1(np.minimum(logq - logp, 0.0)))
    return float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(trials))


def chi2_kl_bernoulli(p: float, q: float) -> tuple[float, float]:
    """(chi-squared, KL) divergence between Ber(p) and Ber(q).

    q at the boundary with p != q yields infinities (signaled, not raised).
    """
    if not (0 <= p <= 1) or not (0 <= q <= 1):
        raise InvalidParameterError("p, q must lie in [0,1]")
    if p == q:
        return 0.0, 0.0
    if q in (0.0, 1.0):
        return math.inf, math.inf

    chi2 = (p - q) ** 2 / (q * (1.0 - q))

    def _term(a: float, b: float) -> float:
        return 0.0 if a == 0.0 else a * math.log(a / b)

    kl = _term(p, q) + _term(1.0 - p, 1.0 - q)
    return chi2, kl


def product_sd_upper(p: np.ndarray, q: np.ndarray) -> float:
    """Subadditive TV upper bound: sum of per-coordinate Bernoulli TVs."""
    p = np.asarray(p, dtype=float).ravel()
    q = np.asarray(q, dtype=float).ravel()
    if p.shape != q.shape:
        raise InvalidParameterError("dimension mismatch")
    if np.any((p < 0) | (p > 1) | (q < 0) | (q > 1)):
        raise InvalidParameterError("coordinates must lie in [0,1]")
    return float(np.abs(p - q).sum())


def gaussian_param_error(truth: GaussianParams,
                         est: GaussianParams) -> tuple[float, float]:
    """(||mu - mu_hat||_Sigma, ||Sigma - Sigma_hat||_Sigma), Sigma = truth.cov."""
    dmu = truth.mean - est.mean
    dcov = truth.cov - est.cov
    return (mahalanobis_vec(dmu, truth.cov), mahalanobis_mat(dcov, truth.cov))
