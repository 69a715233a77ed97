"""Scoring runs against judgments and turning success rates into bits.

A query is evaluated on its top-K ranking under one of two rules:

- coverage(m): success 1.0 if at least m relevant documents appear in the
  top K, else 0.0 (the default, m = 1, is "did anything relevant show up").
- recall: fraction of the query's relevant documents that appear in the
  top K.  Its random baseline is exactly K/N for every query.

Judged queries missing from a run count as failures; queries with no
relevant documents at all are excluded from the aggregate and reported.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import rng
from .ingest import Judgments, Run
from .metrics import BorValue, CeilingReport, bor, ceilings, depth_delta, DepthDelta
from .probability import BaselineParams, Probability, mean_probability, p_rand_at_least_m

__all__ = [
    "SuccessRule",
    "BorReport",
    "BootstrapCI",
    "NoEvaluableQueriesError",
    "query_success",
    "evaluate",
    "depth_sweep",
    "bootstrap_ci",
]

# Resampling work is processed this many index cells at a time; the streams
# are per-replicate, so the setting cannot change any result.
_BOOTSTRAP_CHUNK_CELLS = 2_000_000


class NoEvaluableQueriesError(ValueError):
    """Every judged query had zero relevant documents."""


@dataclass(frozen=True, slots=True)
class SuccessRule:
    kind: str = "coverage"
    m: int = 1

    def __post_init__(self) -> None:
        if self.kind not in ("coverage", "recall"):
            raise ValueError(f"unknown success rule: {self.kind!r}")
        if self.m < 1:
            raise ValueError(f"hit threshold must be >= 1, got {self.m}")
        if self.kind == "recall" and self.m != 1:
            raise ValueError("the recall rule does not take a hit threshold")


@dataclass(frozen=True, slots=True)
class BootstrapCI:
    low: float
    high: float
    replicates: int
    level: float
    undefined_replicates: int = 0


@dataclass(frozen=True)
class BorReport:
    """Aggregate evaluation at a single depth."""

    k: int
    rule: SuccessRule
    query_count: int
    excluded_zero_r: int
    p_obs: float
    mean_baseline: Probability
    bor: BorValue
    ceilings: CeilingReport
    ci: BootstrapCI | None = None
    smoothing_applied: bool = False
    system_tag: str = ""


def query_success(ranked_ids, relevant, k: int, rule: SuccessRule) -> float:
    """Per-query success of a ranking truncated to depth k."""
    if k < 1:
        raise ValueError(f"depth must be >= 1, got {k}")
    if not relevant:
        raise ValueError("query has no relevant documents; exclude it upstream")
    hits = sum(1 for doc_id in ranked_ids[:k] if doc_id in relevant)
    if rule.kind == "coverage":
        return 1.0 if hits >= rule.m else 0.0
    return hits / len(relevant)


def _per_query(run: Run, judgments: Judgments, n: int, k: int, rule: SuccessRule):
    qids = judgments.query_ids()
    evaluable: list[str] = []
    excluded = 0
    for qid in qids:
        if judgments.r_count(qid) >= 1:
            evaluable.append(qid)
        else:
            excluded += 1
    if not evaluable:
        raise NoEvaluableQueriesError("no judged query has a relevant document")

    successes: list[float] = []
    baselines: list[Probability] = []
    recall_baseline = Probability(k / n, math.log1p(-k / n)) if k < n else Probability(1.0, -math.inf)
    for qid in evaluable:
        relevant = judgments.relevant(qid)
        successes.append(query_success(run.ranked_ids(qid), relevant, k, rule))
        if rule.kind == "recall":
            baselines.append(recall_baseline)
        else:
            baselines.append(p_rand_at_least_m(BaselineParams(n, len(relevant), k, rule.m)))
    return successes, baselines, excluded


def evaluate(
    run: Run,
    judgments: Judgments,
    n: int,
    k: int,
    rule: SuccessRule = SuccessRule(),
    *,
    bootstrap_replicates: int | None = None,
    seed: int = 7,
    level: float = 0.95,
    smooth: bool = False,
) -> BorReport:
    """Aggregate BoR of a run at depth k over a corpus of n documents.

    ``smooth`` substitutes p_obs <- 1 / (2 * query_count) when every query
    failed, so a finite (pessimistic) BoR can still be reported; the
    substitution is flagged on the report.
    """
    if not 1 <= k <= n:
        raise ValueError(f"depth must be in [1, {n}], got {k}")
    successes, baselines, excluded = _per_query(run, judgments, n, k, rule)
    count = len(successes)
    p_obs = math.fsum(successes) / count
    mean_baseline = mean_probability(baselines)
    ceiling_report = ceilings(baselines, n, k)

    p_used = p_obs
    smoothed = False
    if p_obs == 0.0 and smooth:
        p_used = 1.0 / (2.0 * count)
        smoothed = True
    bor_value = bor(p_used, mean_baseline)

    ci = None
    if bootstrap_replicates:
        ci = bootstrap_ci(
            successes,
            [b.value for b in baselines],
            replicates=bootstrap_replicates,
            seed=seed,
            level=level,
        )
    return BorReport(
        k=k,
        rule=rule,
        query_count=count,
        excluded_zero_r=excluded,
        p_obs=p_obs,
        mean_baseline=mean_baseline,
        bor=bor_value,
        ceilings=ceiling_report,
        ci=ci,
        smoothing_applied=smoothed,
        system_tag=run.system_tag,
    )


def depth_sweep(
    run: Run,
    judgments: Judgments,
    n: int,
    k_list: list[int],
    rule: SuccessRule = SuccessRule(),
    **eval_kwargs,
) -> list[tuple[BorReport, DepthDelta | None]]:
    """Evaluate at increasing depths and decompose each consecutive change.

    The decomposition is checked against the reports it came from: total
    must equal the difference of the two BoR values to well under 1e-9 bits.
    """
    if sorted(k_list) != list(k_list) or len(set(k_list)) != len(k_list):
        raise ValueError("depths must be strictly increasing")
    m = rule.m if rule.kind == "coverage" else 1
    out: list[tuple[BorReport, DepthDelta | None]] = []
    prev: BorReport | None = None
    for k in k_list:
        report = evaluate(run, judgments, n, k, rule, **eval_kwargs)
        delta = None
        if prev is not None:
            delta = depth_delta(
                prev.p_obs, report.p_obs, prev.mean_baseline, report.mean_baseline,
                prev.k, report.k, m,
            )
            if delta.defined and report.bor.defined and prev.bor.defined:
                closure = abs(delta.total - (report.bor.bits - prev.bor.bits))
                if not closure < 1e-9:
                    raise RuntimeError(f"depth identity violated by {closure} bits")
        out.append((report, delta))
        prev = report
    return out


def bootstrap_ci(
    successes,
    baseline_values,
    *,
    replicates: int = 5000,
    seed: int = 7,
    level: float = 0.95,
) -> BootstrapCI:
    """Percentile bootstrap interval for the aggregate BoR.

    Queries are resampled with replacement; replicate r draws its indices
    from the counter stream (seed, r), so the interval is identical under
    any execution order, chunking, or thread count.  Replicates in which
    every resampled query failed have no finite BoR; they are excluded from
    the percentile and counted in ``undefined_replicates``.
    """
    s = np.asarray(successes, dtype=np.float64)
    b = np.asarray(baseline_values, dtype=np.float64)
    n = s.size
    if n == 0:
        raise ValueError("no per-query data to resample")
    if s.shape != b.shape:
        raise ValueError("successes and baselines differ in length")
    if replicates < 1:
        raise ValueError(f"need at least 1 replicate, got {replicates}")
    if not 0.0 < level < 1.0:
        raise ValueError(f"level must be in (0, 1), got {level}")

    stats = np.empty(replicates, dtype=np.float64)
    chunk = max(1, _BOOTSTRAP_CHUNK_CELLS // n)
    for start in range(0, replicates, chunk):
        stop = min(start + chunk, replicates)
        streams = np.arange(start, stop, dtype=np.int64)
        idx = rng.grid_uints_below(seed, streams, n, n)
        p = s[idx].mean(axis=1)
        pb = b[idx].mean(axis=1)
        with np.errstate(divide="ignore"):
            stats[start:stop] = np.log2(p) - np.log2(pb)

    defined = stats[np.isfinite(stats)]
    undefined = replicates - defined.size
    if defined.size == 0:
        return BootstrapCI(math.nan, math.nan, replicates, level, undefined)
    alpha = (1.0 - level) / 2.0
    low, high = np.quantile(defined, [alpha, 1.0 - alpha])
    return BootstrapCI(float(low), float(high), replicates, level, undefined)
