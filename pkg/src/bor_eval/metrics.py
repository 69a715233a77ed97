"""Bits-over-random scores and their ceilings.

BoR = log2(p_obs / p_rand): how many bits of selectivity a system shows over
a uniform random sampler at the same depth.  Because p_obs <= 1, BoR is
capped by the ceiling -log2(p_rand); once the random baseline saturates
(p_rand -> 1) there are no bits left to earn at that depth, no matter how
good the system is.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .probability import Probability, mean_probability

__all__ = [
    "BorValue",
    "CeilingReport",
    "DepthDelta",
    "bor",
    "bor_recall",
    "bor_opt",
    "enrichment_factor",
    "ceilings",
    "depth_delta",
    "neg_log2",
]

_LN2 = math.log(2.0)


@dataclass(frozen=True, slots=True)
class BorValue:
    """A BoR score in bits.  ``defined`` is False when the ratio is degenerate:

    - observed success 0 (bits is the -inf sentinel), or
    - random baseline 0, i.e. no query had any relevant item (bits +inf).
    """

    bits: float
    defined: bool = True


@dataclass(frozen=True, slots=True)
class CeilingReport:
    """The two ceiling conventions plus the depth bound.

    ``bor_max_mean_of_logs`` averages per-query ceilings -log2(p_rand_q) and
    is the headline number; ``bor_max_log_of_mean`` is -log2(mean baseline)
    and is the bound the aggregate BoR can actually attain.  ``bor_opt`` =
    log2(N / K) is the ceiling of any single-relevant-item setup.
    """

    bor_max_log_of_mean: float
    bor_max_mean_of_logs: float
    bor_opt: float


@dataclass(frozen=True, slots=True)
class DepthDelta:
    """Exact decomposition of a BoR change between depths k1 < k2.

    total = gain_term - baseline_term, where gain_term = log2(p2 / p1) is
    what extra depth bought in observed success and baseline_term =
    log2(pbar2 / pbar1) is what it cost in chance saturation.  In the
    rare-hit regime the baseline term approaches m * log2(k2 / k1), giving
    the plateau prediction total ~= -m * log2(k2 / k1) when p has flattened.
    """

    k1: int
    k2: int
    gain_term: float
    baseline_term: float
    total: float
    predicted_plateau: float
    defined: bool = True


def _ln(p: Probability) -> float:
    # ln(value); routed through the complement when value is near 1 so that
    # ceilings of saturated baselines (value ~ 1 - 1e-12) stay meaningful.
    if p.value > 0.5:
        return math.log1p(-p.complement)
    if p.value == 0.0:
        return -math.inf
    return math.log(p.value)


def neg_log2(p: Probability) -> float:
    """-log2(p), the per-query ceiling of a baseline probability."""
    return -_ln(p) / _LN2


def bor(p_obs: float, p_rand: Probability) -> BorValue:
    """Bits over random: log2(p_obs / p_rand)."""
    if not 0.0 <= p_obs <= 1.0:
        raise ValueError(f"observed success rate out of range: {p_obs}")
    if p_obs == 0.0:
        return BorValue(-math.inf, defined=False)
    if p_rand.value == 0.0:
        # No query could have been answered by chance: R was 0 everywhere.
        return BorValue(math.inf, defined=False)
    return BorValue(math.log(p_obs) / _LN2 + neg_log2(p_rand))


def bor_recall(observed_recall: float, n: int, k: int) -> BorValue:
    """BoR under the recall rule, log2(recall / (K/N)).

    The uniform sampler's expected recall is exactly K/N, independent of how
    many relevant items a query has, so published aggregate recalls convert
    to bits directly.
    """
    if n < 1 or k < 1 or k > n:
        raise ValueError(f"require 1 <= k <= n, got n={n} k={k}")
    if not 0.0 <= observed_recall <= 1.0:
        raise ValueError(f"recall out of range: {observed_recall}")
    baseline = k / n
    if observed_recall == 0.0:
        return BorValue(-math.inf, defined=False)
    return BorValue(math.log(observed_recall / baseline) / _LN2)


def bor_opt(n: int, k: int) -> float:
    """log2(N / K): the ceiling when each query has a single relevant item."""
    if n < 1 or k < 1 or k > n:
        raise ValueError(f"require 1 <= k <= n, got n={n} k={k}")
    return math.log2(n / k)


def enrichment_factor(p_obs: float, p_rand: Probability) -> float:
    """Fold enrichment over chance, p_obs / p_rand.  BoR is its log2."""
    if not 0.0 <= p_obs <= 1.0:
        raise ValueError(f"observed success rate out of range: {p_obs}")
    if p_rand.value == 0.0:
        raise ValueError("baseline is 0; enrichment undefined")
    return p_obs / p_rand.value

def ceilings(per_query_baselines: list[Probability], n: int, k: int) -> CeilingReport:
    """Both ceiling conventions over a set of per-query baselines."""
    if not per_query_baselines:
        raise ValueError("no per-query baselines supplied")
    log_of_mean = neg_log2(mean_probability(per_query_baselines))
    mean_of_logs = math.fsum(neg_log2(p) for p in per_query_baselines) / len(
        per_query_baselines
    )
    return CeilingReport(log_of_mean, mean_of_logs, bor_opt(n, k))


def depth_delta(
    p1: float,
    p2: float,
    pbar1: Probability,
    pbar2: Probability,
    k1: int,
    k2: int,
    m: int = 1,
) -> DepthDelta:
    """Decompose the BoR change from depth k1 to depth k2 (k1 < k2)."""
    if k1 >= k2:
        raise ValueError(f"depths must increase, got k1={k1} k2={k2}")
    if m < 1:
        raise ValueError(f"hit threshold must be >= 1, got {m}")
    for name, p in (("p1", p1), ("p2", p2)):
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"{name} out of range: {p}")
    predicted = -m * math.log2(k2 / k1)
    if p1 == 0.0 or p2 == 0.0 or pbar1.value == 0.0 or pbar2.value == 0.0:
        return DepthDelta(k1, k2, math.nan, math.nan, math.nan, predicted, defined=False)
    gain = (math.log(p2) - math.log(p1)) / _LN2
    baseline = (_ln(pbar2) - _ln(pbar1)) / _LN2
    return DepthDelta(k1, k2, gain, baseline, gain - baseline, predicted)
