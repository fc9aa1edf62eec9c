"""Private histograms over finite and countably infinite bucket universes.

Two mechanisms:

* ``stable_histogram_approx_dp`` — the stability-based (eps, delta)-DP
  histogram.  Only buckets that actually occur get Laplace noise, and a
  release threshold suppresses small noisy counts, so buckets with true
  count zero are never emitted even over an unbounded key universe.
* ``histogram_zcdp`` — Gaussian noise on the full count vector of a finite
  universe, rho-zCDP.

Bucket keys are signed integers; ``None`` is the out-of-universe sentinel
(a bucket like any other for counting purposes, ordered after all integer
keys for tie-breaking).
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Optional, Sequence

from .errors import InvalidInputError, InvalidParameterError
from .noise import NoiseSource

BucketKey = Optional[int]  # None is the bottom sentinel


@dataclass
class HistogramResult:
    """Noised bucket frequencies plus the l-infinity accuracy certificate.

    ``accuracy_bound`` is the guaranteed max error of any reported frequency
    at confidence 1 - beta, computed from the mechanism's own constants so
    callers can assert their preconditions at runtime.
    """

    entries: dict = field(default_factory=dict)
    n: int = 0
    accuracy_bound: float = 0.0


def _sort_key(k: BucketKey) -> tuple:
    # integers in natural order, the bottom sentinel after all of them
    return (1, 0) if k is None else (0, k)


def stable_histogram_approx_dp(data: Sequence[BucketKey], eps: float,
                               delta: float, beta: float,
                               noise: NoiseSource) -> HistogramResult:
    """Stability-based (eps, delta)-DP histogram over an unbounded universe.

    Per-nonempty-bucket Laplace noise with scale 2/(eps*n), release threshold
    2*ln(2n/(delta*beta))/(eps*n).  The reported frequencies are within
    accuracy_bound = 4*ln(2n/(delta*beta))/(eps*n) of the truth for every
    bucket simultaneously, with probability at least 1 - beta.
    """
    data = list(data)
    n = len(data)
    if n == 0:
        raise InvalidParameterError("empty data")
    if eps <= 0:
        raise InvalidParameterError(f"eps must be > 0, got {eps}")
    if not (0 < delta < 1.0 / n):
        raise InvalidParameterError(
            f"delta must be in (0, 1/n) = (0, {1.0 / n}), got {delta}")
    if not (0 < beta < 1):
        raise InvalidParameterError(f"beta must be in (0,1), got {beta}")

    scale = 2.0 / (eps * n)
    threshold = 2.0 * math.log(2.0 * n / (delta * beta)) / (eps * n)
    bound = 2.0 * threshold

    counts = Counter(data)
    entries = {}
    for key in sorted(counts, key=_sort_key):
        freq = counts[key] / n + float(noise.laplace(scale))
        if freq >= threshold:
            entries[key] = freq
    return HistogramResult(entries=entries, n=n, accuracy_bound=bound)


def histogram_zcdp(data: Sequence[BucketKey], universe: Sequence[BucketKey],
                   rho: float, beta: float,
                   noise: NoiseSource) -> HistogramResult:
    """rho-zCDP histogram over a finite universe via the Gaussian mechanism.

    Replacing one sample moves the count vector by at most 1 in two buckets,
    so the l2-sensitivity of the frequency vector is sqrt(2)/n exactly.
    """
    data = list(data)
    universe = list(universe)
    n = len(data)
    if n == 0:
        raise InvalidParameterError("empty data")
    if rho <= 0:
        raise InvalidParameterError(f"rho must be > 0, got {rho}")
    if not (0 < beta < 1):
        raise InvalidParameterError(f"beta must be in (0,1), got {beta}")
    uset = set(universe)
    if len(uset) != len(universe):
        raise InvalidInputError("universe contains duplicate keys")
    counts = Counter(data)
    bad = set(counts) - uset
    if bad:
        raise InvalidInputError(f"keys outside universe: {sorted(bad, key=_sort_key)[:5]}")

    sigma = (math.sqrt(2.0) / n) / math.sqrt(2.0 * rho)
    draws = noise.gaussian(sigma, size=len(universe))
    entries = {}
    for i, key in enumerate(sorted(universe, key=_sort_key)):
        entries[key] = counts.get(key, 0) / n + float(draws[i])
    bound = math.sqrt(2.0 * math.log(2.0 * len(universe) / beta) / rho) / n * math.sqrt(2.0)
    return HistogramResult(entries=entries, n=n, accuracy_bound=bound)


def argmax_bucket(h: HistogramResult, threshold: float) -> BucketKey:
    """Key of the most frequent bucket if its frequency clears the threshold.

    Returns None-as-absence via raising nothing: the return value is the key,
    or python None when no bucket qualifies.  Ties break toward the smaller
    index; the bottom sentinel sorts after every integer.
    """
    best_key = None
    best_val = None
    found = False
    for key in sorted(h.entries, key=_sort_key):
        v = h.entries[key]
        if v >= threshold and (not found or v > best_val):
            best_key, best_val, found = key, v, True
    return best_key if found else None
