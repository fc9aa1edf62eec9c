"""Condition-number-free preconditioning and covariance estimation.

No upper bound on ||Sigma||_2 is assumed (only Sigma >= I).  A private vote
over geometric buckets of sample norms localizes the trace to a factor-C
interval; that interval drives a downward sweep of one-step preconditioning
attempts; up to d such rounds reduce the spectrum into a certified
O(d^4) band, after which the bounded-condition-number estimator applies.

Privacy here is approximate (eps, delta)-DP: the norm vote uses the stable
histogram, and the zCDP rounds are converted and composed per run.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .covariance import (CovEstimate, Preconditioner, RoundRecord,
                         clamp_threshold_sq, _split_from_noisy_cov, pgce)
from .errors import (EmptyInputError, EstimationFailedError,
                     InvalidParameterError)
from .histogram import stable_histogram_approx_dp
from .noise import NoiseSource
from .privacy import (PrivacyBudget, compose_approx_dp, sample_gue,
                      zcdp_to_approx_dp)

# Bucket base for the norm vote.  Needs C > 1 + 4*ln(10); 16 is the next
# power of two, so bucket indices are exact in binary.
BUCKET_BASE = 16.0
XI = 1.0 / BUCKET_BASE        # lower certificate factor
BIG_XI = BUCKET_BASE          # upper certificate factor
# Rounds stop once the candidate interval's floor drops below 40*d^3.
FLOOR_COEFF = 40.0
SWEEP_SHRINK = 99.0 / 100.0


@dataclass
class TraceEstimate:
    """A released power of the bucket base localizing the trace.

    ``certificate`` is the interval [xi*T/d, Xi*d*T] claimed to contain
    ||Sigma||_2; the trace itself lies in [T/C, C*T] w.h.p.
    """

    T: float
    C: float
    r: int
    certificate: tuple[float, float]


def _norm_bucket(v: float, r_min: int) -> Optional[int]:
    """Bucket index r with C^{r-1} < v <= C^r; below the universe floor -> None."""
    if v <= 0:
        return None
    lv = math.log(v) / math.log(BUCKET_BASE)
    r = math.ceil(lv - 1e-9)  # exact powers land in their own bucket
    return r if r >= r_min else None


def p_estimate_trace(x: np.ndarray, eps: float, delta: float, beta: float,
                     noise: NoiseSource) -> Optional[TraceEstimate]:
    """Vote on the geometric bucket holding the typical squared sample norm.

    Returns None (the bottom outcome) when no bucket collects a quarter of
    the mass; callers must treat that as a privacy-preserving abort.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or x.shape[0] == 0:
        raise EmptyInputError("need a non-empty 2-d sample array")
    d = x.shape[1]
    # the universe starts one bucket below the trace floor tr(Sigma) >= d
    r_min = math.ceil(math.log(d) / math.log(BUCKET_BASE) - 1e-9) - 1
    norms = np.einsum("ij,ij->i", x, x)
    keys = [_norm_bucket(float(v), r_min) for v in norms]
    hist = stable_histogram_approx_dp(keys, eps, delta, beta, noise)
    best = None
    for key, freq in hist.entries.items():
        if key is None or freq < 0.25:
            continue
        if best is None or freq > hist.entries[best] or (freq == hist.entries[best] and key < best):
            best = key
    if best is None:
        return None
    t = BUCKET_BASE ** best
    return TraceEstimate(T=t, C=BUCKET_BASE, r=best,
                         certificate=(XI * t / d, BIG_XI * d * t))


def weak_ppc_no_bound(x: np.ndarray, rho: float, beta: float,
                      interval: tuple[float, float],
                      noise: NoiseSource) -> Optional[tuple[np.ndarray, np.ndarray]]:
    """Sweep candidate bounds downward until a heavy subspace shows up.

    Tries kappa = b, b*(99/100), ... while kappa > a/2, each attempt a
    one-step preconditioning with K = kappa/d^2 and an even share of the
    budget sized for the worst-case sweep length.  Returns the first
    (V, A) with non-empty V, or None if the sweep exhausts.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or x.shape[0] == 0:
        raise EmptyInputError("need a non-empty 2-d sample array")
    n, d = x.shape
    a, b = interval
    if a <= FLOOR_COEFF * d ** 3:
        raise InvalidParameterError(
            f"interval floor {a} must exceed {FLOOR_COEFF * d**3}")
    if b < a:
        raise InvalidParameterError(f"empty interval [{a}, {b}]")
    steps = math.ceil(math.log(2.0 * b / a) / math.log(1.0 / SWEEP_SHRINK))
    rho_step = rho / steps
    beta_step = beta / steps

    # The sweep re-examines the same samples many times; the empirical
    # second moment is cached and only the clamp mask is rechecked, since
    # only the noise must be redrawn per attempt.
    norms = np.einsum("ij,ij->i", x, x)
    cov_full = (x.T @ x) / n
    cov_full = (cov_full + cov_full.T) / 2.0

    kappa = b
    while kappa > a / 2.0:
        b_sq = clamp_threshold_sq(kappa, d, n, beta_step)
        drop = norms > b_sq
        if drop.any():
            xd = x[drop]
            cov = cov_full - (xd.T @ xd) / n
            cov = (cov + cov.T) / 2.0
        else:
            cov = cov_full
        sigma = (2.0 * b_sq / n) / math.sqrt(2.0 * rho_step)
        z = cov + sample_gue(d, sigma, noise)
        v, a_mat = _split_from_noisy_cov(z, kappa, K=kappa / d ** 2)
        if v.shape[1] > 0:
            return v, a_mat
        kappa *= SWEEP_SHRINK
    return None


def ppc_range(x: np.ndarray, eps: float, delta: float, beta: float,
              noise: NoiseSource) -> Preconditioner:
    """Range-driven preconditioning without a condition-number bound.

    Each round votes on the trace of the current (transformed) samples,
    converts the vote into a spectral interval, and runs the sweeping
    one-step preconditioner; rounds stop when the interval floor falls
    below 40*d^3, certifying the spectrum under kappa* = 40*Xi*d^4 for the
    returned A = 2 * (product of round factors).
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or x.shape[0] == 0:
        raise EmptyInputError("need a non-empty 2-d sample array")
    d = x.shape[1]
    if not (0 < delta < 1):
        raise InvalidParameterError(f"delta must be in (0,1), got {delta}")
    eps_r = eps / math.sqrt(d * math.log(1.0 / delta))
    delta_r = delta / d
    rho_r = eps_r ** 2 / math.log(1.0 / delta)
    beta_r = beta / d

    a_total = np.eye(d)
    v_last = np.zeros((d, 0))
    log: list[RoundRecord] = []
    spent: list[tuple[float, float]] = []
    xt = x
    dims_seen = 0
    for _ in range(d):
        est = p_estimate_trace(xt, eps_r, delta_r, beta_r, noise)
        spent.append((eps_r, delta_r))
        if est is None:
            raise EstimationFailedError(
                "trace vote returned bottom mid-run; rerun or raise n")
        a_j = XI * est.T
        b_j = BIG_XI * d * est.T
        if a_j < FLOOR_COEFF * d ** 3:
            break
        out = weak_ppc_no_bound(xt, rho_r, beta_r, (a_j, b_j), noise)
        spent.append(zcdp_to_approx_dp(rho_r, delta_r))
        if out is None:
            raise EstimationFailedError(
                "no heavy subspace found in the certified interval")
        v, a_mat = out
        xt = xt @ a_mat.T
        a_total = a_mat @ a_total
        v_last = v
        dims_seen += v.shape[1]
        log.append(RoundRecord(kappa=b_j, threshold=a_j,
                               subspace_dim=int(v.shape[1]), rho=rho_r,
                               K=float("nan")))
        if dims_seen >= d:
            break
    a_total = 2.0 * a_total
    eps_spent, delta_spent = compose_approx_dp(spent, mode="basic")
    return Preconditioner(A=a_total, V=v_last, K=float("nan"), round_log=log,
                          budget_spent=PrivacyBudget.approx(eps_spent, delta_spent),
                          kappa_star=FLOOR_COEFF * BIG_XI * d ** 4)


def pgce_no_bound(x: np.ndarray, eps: float, delta: float, beta: float,
                  noise: NoiseSource) -> CovEstimate:
    """Full covariance estimation with no condition-number bound.

    Preconditions via ppc_range, then runs the bounded-condition estimator
    at its advertised kappa* with the zCDP share rho = eps^2/(8*ln(1/delta)),
    and conjugates the estimate back.
    """
    x = np.asarray(x, dtype=float)
    pre = ppc_range(x, eps, delta, beta, noise)
    y = x @ pre.A.T
    rho = eps ** 2 / (8.0 * math.log(1.0 / delta))
    inner = pgce(y, rho, beta, pre.kappa_star, noise)
    a_inv = np.linalg.inv(pre.A)
    sigma_hat = a_inv @ inner.sigma_hat @ a_inv.T
    sigma_hat = (sigma_hat + sigma_hat.T) / 2.0
    eps_spent, delta_spent = compose_approx_dp(
        [(pre.budget_spent.eps, pre.budget_spent.delta),
         zcdp_to_approx_dp(rho, delta)], mode="basic")
    diag = dict(inner.diagnostics)
    diag["preconditioner_rounds"] = pre.round_log
    diag["kappa_star"] = pre.kappa_star
    return CovEstimate(sigma_hat=sigma_hat,
                       budget_spent=PrivacyBudget.approx(eps_spent, delta_spent),
                       diagnostics=diag)
