"""Chance baselines for top-K retrieval.

Central question: if a system returned K of N items uniformly at random
(without replacement), what is the probability that at least m of a query's
R relevant items land in the list?  That survival probability of the
hypergeometric distribution is the random baseline that all bits-over-random
scores are measured against.

Probabilities here live very close to 0 (web-scale corpora) and very close
to 1 (saturated candidate lists), so every result carries both the value and
the natural log of its complement.  Tail products are accumulated with
``log1p`` term by term rather than as differences of large log-factorials,
which would cancel catastrophically at corpus scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "BaselineParams",
    "Probability",
    "log_choose",
    "p_rand_coverage",
    "p_rand_at_least_m",
    "p_rand_binomial",
    "p_rand_poisson",
    "lambda_rate",
    "mean_probability",
]

# Below this value of min(k, n - k), ln C(n, k) is summed term by term; the
# pure lgamma route loses relative accuracy when the result is tiny compared
# with lgamma(n), e.g. ln C(1e8, 1).
_DIRECT_CHOOSE_LIMIT = 4096


@dataclass(frozen=True, slots=True)
class BaselineParams:
    """Population size N, relevant count R, retrieval depth K, hit threshold m."""

    n: int
    r: int
    k: int
    m: int = 1

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError(f"population size must be >= 1, got {self.n}")
        if not 0 <= self.r <= self.n:
            raise ValueError(f"relevant count must be in [0, {self.n}], got {self.r}")
        if not 1 <= self.k <= self.n:
            raise ValueError(f"depth must be in [1, {self.n}], got {self.k}")
        if self.m < 1:
            raise ValueError(f"hit threshold must be >= 1, got {self.m}")


@dataclass(frozen=True, slots=True)
class Probability:
    """A probability stored as (value, ln(1 - value)).

    The pair keeps full relative precision at both ends of [0, 1]: ``value``
    is reliable near 0, ``log_complement`` near 1.  ``log_complement`` is
    -inf exactly when value == 1.
    """

    value: float
    log_complement: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.value <= 1.0:
            raise ValueError(f"probability value out of range: {self.value}")
        if self.log_complement > 0.0:
            raise ValueError(f"log complement must be <= 0, got {self.log_complement}")

    @classmethod
    def from_value(cls, value: float) -> "Probability":
        return cls(value, math.log1p(-value) if value < 1.0 else -math.inf)

    @classmethod
    def from_log_complement(cls, log_complement: float) -> "Probability":
        return cls(-math.expm1(log_complement), log_complement)

    @property
    def complement(self) -> float:
        return math.exp(self.log_complement)


def log_choose(n: int, k: int) -> float:
    """ln C(n, k).

    Relative error stays below 1e-10 for n up to 1e8: small min(k, n - k)
    is summed directly, everything else goes through lgamma.
    """
    if n < 0 or k < 0 or k > n:
        raise ValueError(f"require 0 <= k <= n, got n={n} k={k}")
    kk = min(k, n - k)
    if kk == 0:
        return 0.0
    if kk <= _DIRECT_CHOOSE_LIMIT:
        return math.fsum(math.log((n - i) / (i + 1.0)) for i in range(kk))
    return math.lgamma(n + 1.0) - math.lgamma(k + 1.0) - math.lgamma(n - k + 1.0)


def _log_zero_hit(n: int, r: int, k: int) -> float:
    """ln P(no relevant item in the sample) = ln [C(n-r, k) / C(n, k)].

    Evaluated as sum of log1p(-big/(n - i)) over the smaller of r, k terms,
    which keeps full relative precision even when the result is ~ -1e-4
    (web-scale corpora) where lgamma differences would cancel.
    """
    small, big = (r, k) if r <= k else (k, r)
    return math.fsum(math.log1p(-big / (n - i)) for i in range(small))


def p_rand_coverage(params: BaselineParams) -> Probability:
    """Chance that a uniform K-subset of N contains >= 1 of the R relevant items.

    Requires m == 1; use :func:`p_rand_at_least_m` for higher thresholds.
    Exactly 1 when K > N - R (the sample cannot avoid every relevant item).
    """
    if params.m != 1:
        raise ValueError("p_rand_coverage is the m=1 baseline; got m="
                         f"{params.m}")
    n, r, k = params.n, params.r, params.k
    if r == 0:
        return Probability(0.0, 0.0)
    if k > n - r:
        return Probability(1.0, -math.inf)
    return Probability.from_log_complement(_log_zero_hit(n, r, k))


def p_rand_at_least_m(params: BaselineParams) -> Probability:
    """Chance that a uniform K-subset of N contains >= m of the R relevant items.

    Hypergeometric survival function.  The m lowest PMF terms are built from
    the zero-hit term by exact ratio recurrence and combined in log space.
    """
    n, r, k, m = params.n, params.r, params.k, params.m
    if m > min(r, k):
        return Probability(0.0, 0.0)
    if k - (n - r) >= m:
        # Even the least lucky sample holds at least m relevant items.
        return Probability(1.0, -math.inf)
    if m == 1:
        return p_rand_coverage(BaselineParams(n, r, k))

    lo = max(0, k - (n - r))
    if lo == 0:
        log_term = _log_zero_hit(n, r, k)
    else:
        log_term = (
            log_choose(r, lo) + log_choose(n - r, k - lo) - log_choose(n, k)
        )
    log_terms = [log_term]
    for i in range(lo, m - 1):
        ratio = ((r - i) * (k - i)) / ((i + 1.0) * (n - r - k + i + 1.0))
        log_term += math.log(ratio)
        log_terms.append(log_term)

    # log of the CDF at m-1, i.e. ln(1 - P(X >= m))
    top = max(log_terms)
    log_cdf = top + math.log(math.fsum(math.exp(t - top) for t in log_terms))
    log_cdf = min(log_cdf, 0.0)
    return Probability.from_log_complement(log_cdf)


def p_rand_binomial(params: BaselineParams) -> Probability:
    """With-replacement approximation 1 - (1 - R/N)^K of the m=1 baseline."""
    if params.m != 1:
        raise ValueError("binomial approximation is defined for m=1")
    n, r, k = params.n, params.r, params.k
    if r == 0:
        return Probability(0.0, 0.0)
    return Probability.from_log_complement(k * math.log1p(-r / n))


def p_rand_poisson(lam: float, m: int = 1) -> Probability:
    """Poisson approximation P(X >= m) for hit rate lam = K * R / N.

    The desk-calculator form of the baseline: 1 - exp(-lam) for m = 1.
    """
    if lam < 0.0 or not math.isfinite(lam):
        raise ValueError(f"rate must be finite and >= 0, got {lam}")
    if m < 1:
        raise ValueError(f"hit threshold must be >= 1, got {m}")
    if lam == 0.0:
        return Probability(0.0, 0.0)
    if m == 1:
        return Probability.from_log_complement(-lam)
    log_lam = math.log(lam)
    log_terms = [-lam]
    for i in range(1, m):
        log_terms.append(-lam + i * log_lam - math.lgamma(i + 1.0))
    top = max(log_terms)
    log_cdf = top + math.log(math.fsum(math.exp(t - top) for t in log_terms))
    return Probability.from_log_complement(min(log_cdf, 0.0))


def lambda_rate(n: int, mean_relevant: float, k: int) -> float:
    """Expected random hits per query, K * mean_relevant / N."""
    if n < 1:
        raise ValueError(f"population size must be >= 1, got {n}")
    if mean_relevant <= 0.0:
        raise ValueError(f"mean relevant count must be > 0, got {mean_relevant}")
    if k < 1:
        raise ValueError(f"depth must be >= 1, got {k}")
    return k * mean_relevant / n


def mean_probability(probs: list[Probability]) -> Probability:
    """Arithmetic mean of probabilities, precise at both ends of [0, 1].

    Averages the complements when the mean is large so that a mean like
    1 - 1e-9 keeps the 1e-9 rather than rounding to 1.0.
    """
    if not probs:
        raise ValueError("cannot average an empty list of probabilities")
    n = len(probs)
    mean_value = math.fsum(p.value for p in probs) / n
    if mean_value <= 0.5:
        return Probability(mean_value, math.log1p(-mean_value))
    mean_comp = math.fsum(p.complement for p in probs) / n
    if mean_comp == 0.0:
        return Probability(1.0, -math.inf)
    return Probability(1.0 - mean_comp, math.log(mean_comp))
