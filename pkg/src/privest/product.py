"""Learning Boolean product distributions via truncated means and recursive
partitioning.

Coordinates are assumed biased toward 0 (per-coordinate mean <= 1/2); the
harness offers a bit-flip preprocessing for heavy coordinates.  Rows are
split into disjoint blocks, one per round, so the whole run is rho-zCDP with
no composition: each individual's row is read by exactly one round.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import EmptyInputError, InsufficientSamplesError, InvalidParameterError
from .noise import NoiseSource
from .privacy import PrivacyBudget

# Round-1 mean bound and freeze threshold; both halve each round, which
# keeps tau_r = (3/4) * u_{r+1} at every round.
U_1 = 0.5
TAU_1 = 3.0 / 16.0


@dataclass
class ProductModel:
    """Per-coordinate Bernoulli means in [0,1]^d."""

    p: np.ndarray

    def __post_init__(self):
        self.p = np.asarray(self.p, dtype=float).ravel()
        if np.any(self.p < 0) or np.any(self.p > 1):
            raise InvalidParameterError("coordinates must lie in [0,1]")

    @property
    def dim(self) -> int:
        return self.p.shape[0]


@dataclass
class RoundState:
    """Per-round partitioning record."""

    round: int
    block: int
    active: list
    frozen: list
    u: float
    tau: float
    B: float
    rows: tuple  # [start, stop) row range read this round


def trunc(x: np.ndarray, B: float) -> np.ndarray:
    """Project x onto the l2-ball of radius B (identity inside the ball)."""
    if B < 0:
        raise InvalidParameterError(f"B must be >= 0, got {B}")
    x = np.asarray(x, dtype=float)
    norm = float(np.linalg.norm(x))
    if norm <= B or norm == 0.0:
        return x.copy()
    return (B / norm) * x


def tmean(x: np.ndarray, B: float) -> np.ndarray:
    """Mean of row-wise truncations; changing one row moves it by <= 2B/m."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 2:
        raise InvalidParameterError(f"expected 2-d data, got shape {x.shape}")
    m = x.shape[0]
    if m == 0:
        raise EmptyInputError("tmean of zero rows")
    norms = np.linalg.norm(x, axis=1)
    scale = np.where(norms > B, np.divide(B, norms, out=np.ones_like(norms),
                                          where=norms > 0), 1.0)
    return (x * scale[:, None]).mean(axis=0)


def required_block_size(d: int, rho: float, alpha: float, beta: float,
                        rounds: int) -> int:
    """Worst-case per-block row count from the analysis constants.

    Far more conservative than what moderate dimensions need in practice;
    pass ``m`` to ppde explicitly for desk-scale runs.
    """
    c = 128.0 * math.log(d / (alpha * beta * math.sqrt(2.0 * rho))) ** 1.25
    c_prime = 128.0 * math.log(d * rounds / beta) ** 3
    return math.ceil(c_prime * d / alpha ** 2
                     + c * d / (alpha * math.sqrt(2.0 * rho)))


def num_rounds(d: int) -> int:
    """Partitioning rounds before the final sweep: ceil(log2(d/2)), >= 1."""
    return max(1, math.ceil(math.log2(d / 2.0)))


def ppde(x: np.ndarray, rho: float, alpha: float, beta: float,
         noise: NoiseSource, m: Optional[int] = None,
         diagnostics: Optional[dict] = None) -> ProductModel:
    """Private product-distribution estimation by recursive partitioning.

    Rows must be 0/1.  The data splits into R+1 disjoint blocks of m rows.
    Each partitioning round reads one block: it takes a truncated mean of
    the active coordinates (truncation radius B_r set by the current bias
    bound u_r), adds Gaussian noise of std B_r/(m*sqrt(2*rho)), freezes
    coordinates whose noisy mean clears tau_r, and halves u and tau for the
    rest.  The final round reads one more block for whatever remains.
    The output is clamped into [0,1]^d.
    """
    x = np.asarray(x)
    if x.ndim != 2:
        raise InvalidParameterError(f"expected 2-d data, got shape {x.shape}")
    if not np.isin(x, (0, 1)).all():
        raise InvalidParameterError("data must be 0/1 valued")
    if rho <= 0 or not (0 < alpha < 1) or not (0 < beta < 1):
        raise InvalidParameterError("bad (rho, alpha, beta)")
    x = x.astype(float)
    n, d = x.shape
    r_max = num_rounds(d)
    if m is None:
        m = required_block_size(d, rho, alpha, beta, r_max)
    if n < (r_max + 1) * m:
        raise InsufficientSamplesError((r_max + 1) * m, n,
                                       f"{r_max + 1} blocks of {m}")

    q = np.zeros(d)
    active = list(range(d))
    u, tau = U_1, TAU_1
    rounds: list[RoundState] = []
    r = 1
    while u * len(active) >= 1.0 and r <= r_max:
        block = x[(r - 1) * m: r * m]
        b_r = math.sqrt(6.0 * u * len(active) * math.log(m * r_max / beta))
        noisy = tmean(block[:, active], b_r) \
            + noise.gaussian(b_r / (m * math.sqrt(2.0 * rho)), size=len(active))
        frozen = [j for j, v in zip(active, noisy) if v >= tau]
        for j, v in zip(active, noisy):
            if v >= tau:
                q[j] = v
        rounds.append(RoundState(round=r, block=r - 1, active=list(active),
                                 frozen=frozen, u=u, tau=tau, B=b_r,
                                 rows=((r - 1) * m, r * m)))
        active = [j for j in active if j not in set(frozen)]
        u /= 2.0
        tau /= 2.0
        r += 1

    if active:
        block = x[(r - 1) * m: r * m]
        b_fin = math.sqrt(6.0 * math.log(m / beta))
        noisy = tmean(block[:, active], b_fin) \
            + noise.gaussian(b_fin / (m * math.sqrt(2.0 * rho)), size=len(active))
        for j, v in zip(active, noisy):
            q[j] = v
        rounds.append(RoundState(round=r, block=r - 1, active=list(active),
                                 frozen=list(active), u=u, tau=tau, B=b_fin,
                                 rows=((r - 1) * m, r * m)))

    if diagnostics is not None:
        diagnostics["rounds"] = rounds
        diagnostics["m"] = m
        diagnostics["budget_spent"] = PrivacyBudget.zcdp(rho)
    return ProductModel(p=np.clip(q, 0.0, 1.0))


def sample_product(model: ProductModel, n: int, noise: NoiseSource) -> np.ndarray:
    """n i.i.d. rows from the product of Ber(p_j)."""
    u = noise.uniform(size=(n, model.dim))
    return (u < model.p).astype(np.int8)
