"""Candidate-list sizing diagnostics.

The hit rate lambda = K * mean_relevant / N summarizes how saturated a
random baseline is: once a random K-subset is likely to contain a relevant
item, showing more candidates stops being meaningful.  Zones:

    healthy    lambda < 1    meaningful selectivity available
    degraded   1 <= lambda < 3   ceiling shrinking fast
    collapse   lambda >= 3   baseline ~ 1, nothing left to measure

At lambda = 3 a random list already succeeds 95% of the time and the exact
ceiling is under a tenth of a bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .metrics import neg_log2
from .probability import BaselineParams, lambda_rate, p_rand_coverage, p_rand_poisson

__all__ = [
    "CollapseDiagnostic",
    "DepthRecommendation",
    "CatalogScenario",
    "ScenarioResult",
    "zone_for_lambda",
    "diagnose",
    "recommend_k",
    "catalog_report",
]

HEALTHY_BELOW = 1.0
COLLAPSE_AT = 3.0


@dataclass(frozen=True, slots=True)
class CollapseDiagnostic:
    n: int
    mean_relevant: float
    k: int
    lam: float
    exact_ceiling_bits: float
    poisson_ceiling_bits: float
    zone: str
    interpolated: bool = False  # mean_relevant was fractional; bits interpolated


@dataclass(frozen=True, slots=True)
class DepthRecommendation:
    k: int
    diagnostic: CollapseDiagnostic
    saturated: bool  # even K = 1 is below the bit threshold


@dataclass(frozen=True, slots=True)
class CatalogScenario:
    name: str
    n: int
    mean_relevant: float
    k: int


@dataclass(frozen=True, slots=True)
class ScenarioResult:
    name: str
    diagnostic: CollapseDiagnostic | None
    error: str | None = None


def zone_for_lambda(lam: float) -> str:
    if lam < HEALTHY_BELOW:
        return "healthy"
    if lam < COLLAPSE_AT:
        return "degraded"
    return "collapse"


def _exact_ceiling_bits(n: int, mean_relevant: float, k: int) -> tuple[float, bool]:
    """-log2 of the exact m=1 baseline at a possibly fractional relevant count.

    Fractional counts interpolate linearly in bits between floor and ceil.
    A floor of zero would be an impossible event (infinite bits), so that
    side clamps to one relevant document.
    """
    lo = math.floor(mean_relevant)
    hi = math.ceil(mean_relevant)
    if lo == hi:
        return neg_log2(p_rand_coverage(BaselineParams(n, lo, k))), False
    frac = mean_relevant - lo
    bits_lo = neg_log2(p_rand_coverage(BaselineParams(n, max(lo, 1), k)))
    bits_hi = neg_log2(p_rand_coverage(BaselineParams(n, hi, k)))
    return (1.0 - frac) * bits_lo + frac * bits_hi, True


def diagnose(n: int, mean_relevant: float, k: int) -> CollapseDiagnostic:
    """Collapse diagnostic for a corpus of n items with k shown per query."""
    if n < 1:
        raise ValueError(f"population size must be >= 1, got {n}")
    if not 0.0 < mean_relevant <= n:
        raise ValueError(f"mean relevant count must be in (0, {n}], got {mean_relevant}")
    if not 1 <= k <= n:
        raise ValueError(f"depth must be in [1, {n}], got {k}")
    lam = lambda_rate(n, mean_relevant, k)
    exact, interpolated = _exact_ceiling_bits(n, mean_relevant, k)
    poisson = neg_log2(p_rand_poisson(lam))
    return CollapseDiagnostic(n, mean_relevant, k, lam, exact, poisson,
                              zone_for_lambda(lam), interpolated)


def recommend_k(n: int, mean_relevant: float, min_bits: float = 0.1) -> DepthRecommendation:
    """Largest depth whose exact ceiling still offers at least ``min_bits``.

    The ceiling is non-increasing in depth, so the answer is found by
    bisection.  Returns k = 0 (flagged ``saturated``) when even a single
    candidate is below the threshold.
    """
    if min_bits <= 0.0:
        raise ValueError(f"bit threshold must be > 0, got {min_bits}")

    def bits_at(k: int) -> float:
        return _exact_ceiling_bits(n, mean_relevant, k)[0]

    probe = diagnose(n, mean_relevant, 1)  # validates n, mean_relevant
    if probe.exact_ceiling_bits < min_bits:
        return DepthRecommendation(0, probe, saturated=True)
    if bits_at(n) >= min_bits:
        return DepthRecommendation(n, diagnose(n, mean_relevant, n), saturated=False)
    lo, hi = 1, n  # bits_at(lo) >= min_bits > bits_at(hi)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if bits_at(mid) >= min_bits:
            lo = mid
        else:
            hi = mid
    return DepthRecommendation(lo, diagnose(n, mean_relevant, lo), saturated=False)


def catalog_report(scenarios: list[CatalogScenario]) -> list[ScenarioResult]:
    """Diagnose a list of named scenarios; one bad row does not spoil the rest."""
    results: list[ScenarioResult] = []
    for scenario in scenarios:
        try:
            diag = diagnose(scenario.n, scenario.mean_relevant, scenario.k)
            results.append(ScenarioResult(scenario.name, diag))
        except ValueError as exc:
            results.append(ScenarioResult(scenario.name, None, str(exc)))
    return results
