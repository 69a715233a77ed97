"""Synthetic-data laboratory: Monte Carlo baselines and model retrievers.

The Monte Carlo sampler is an independent check on the closed-form
baselines: each trial draws K distinct indices uniformly from [0, N) and
counts how many land among the first R, which are designated relevant.
Trials use rejection sampling (scan the trial's stream for the first K
distinct values).  The overlap of a uniform K-subset with a fixed R-item
set keeps its law when the two set sizes swap or either set is replaced by
its complement, so each trial actually samples only min(K, R, N-K, N-R)
items and corrects the count.  Every draw comes from the counter stream
(seed, trial), so results are bit-identical under any chunking or parallel
schedule.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import rng
from .advisor import CollapseDiagnostic, diagnose
from .evaluator import BorReport, SuccessRule, evaluate
from .ingest import Document, Judgments, LabeledCorpus, Run
from .probability import BaselineParams

__all__ = [
    "TrialConfig",
    "SyntheticSpec",
    "monte_carlo_p",
    "simulate_sweep",
    "boundary_map",
    "sample_prefix",
    "generate_class_corpus",
    "NEWSGROUPS_TRAIN_CLASS_SIZES",
]

# Class sizes of the standard 20 Newsgroups bydate training split
# (11314 documents across 20 groups); used to generate shaped corpora.
NEWSGROUPS_TRAIN_CLASS_SIZES: dict[str, int] = {
    "alt.atheism": 480,
    "comp.graphics": 584,
    "comp.os.ms-windows.misc": 591,
    "comp.sys.ibm.pc.hardware": 590,
    "comp.sys.mac.hardware": 578,
    "comp.windows.x": 593,
    "misc.forsale": 585,
    "rec.autos": 594,
    "rec.motorcycles": 598,
    "rec.sport.baseball": 597,
    "rec.sport.hockey": 600,
    "sci.crypt": 595,
    "sci.electronics": 591,
    "sci.med": 594,
    "sci.space": 593,
    "soc.religion.christian": 599,
    "talk.politics.guns": 546,
    "talk.politics.mideast": 564,
    "talk.politics.misc": 465,
    "talk.religion.misc": 377,
}

_CHUNK_CELLS = 4_000_000


def _rejection_width(n: int, k: int) -> int:
    """Stream prefix length that usually contains k distinct values of [0, n)."""
    if k <= 0.1 * n:
        return k + max(16, k // 3)
    expected = -n * math.log1p(-k / n)  # mean draws until k distinct (coupon bound)
    return int(expected + 4.0 * math.sqrt(expected) + 16)


@dataclass(frozen=True, slots=True)
class TrialConfig:
    params: BaselineParams
    trials: int
    seed: int = 7

    def __post_init__(self) -> None:
        if self.trials < 1:
            raise ValueError(f"need at least 1 trial, got {self.trials}")


@dataclass(frozen=True, slots=True)
class SyntheticSpec:
    """A synthetic judged dataset plus a model retriever.

    Exactly one of ``constant_r`` (every query has r relevant documents) or
    ``class_sizes`` (documents partitioned into classes; every document
    queries for its classmates) must be given.  Retrievers: "random" ranks
    uniformly sampled documents, "oracle" ranks all relevant documents
    first, "noisy" fills each slot with a relevant document independently
    with probability ``hit_prob``.
    """

    n: int
    query_count: int
    seed: int = 7
    constant_r: int | None = None
    class_sizes: tuple[int, ...] | None = None
    retriever: str = "random"
    hit_prob: float = 0.0

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError(f"population size must be >= 1, got {self.n}")
        if self.query_count < 1:
            raise ValueError(f"need at least 1 query, got {self.query_count}")
        if (self.constant_r is None) == (self.class_sizes is None):
            raise ValueError("give exactly one of constant_r or class_sizes")
        if self.constant_r is not None and not 0 <= self.constant_r <= self.n:
            raise ValueError(f"constant_r must be in [0, {self.n}]")
        if self.class_sizes is not None and sum(self.class_sizes) != self.n:
            raise ValueError("class sizes must sum to n")
        if self.retriever not in ("random", "oracle", "noisy"):
            raise ValueError(f"unknown retriever model: {self.retriever!r}")
        if self.retriever == "noisy" and not 0.0 < self.hit_prob <= 1.0:
            raise ValueError("noisy retriever needs hit_prob in (0, 1]")


def _hits_rejection(seed: int, streams: np.ndarray, n: int, r: int, k: int) -> np.ndarray:
    """Relevant-hit count of each trial's first k distinct draws."""
    hits = np.full(streams.size, -1, dtype=np.int64)
    todo = np.arange(streams.size)
    width = _rejection_width(n, k)
    while todo.size:
        draws = rng.grid_uints_below(seed, streams[todo], n, width)
        order = np.argsort(draws, axis=1, kind="stable")
        svals = np.take_along_axis(draws, order, axis=1)
        first = np.ones(svals.shape, dtype=bool)
        first[:, 1:] = svals[:, 1:] != svals[:, :-1]
        # Draw position of each first occurrence; duplicates get a sentinel.
        pos = np.where(first, order, width)
        # Position of the k-th distinct value; rows where it is the sentinel
        # did not see k distinct values within this width.
        kth_pos = np.partition(pos, k - 1, axis=1)[:, k - 1 : k]
        done = kth_pos[:, 0] < width
        if done.any():
            chosen = first[done] & (pos[done] <= kth_pos[done])
            hits[todo[done]] = ((svals[done] < r) & chosen).sum(axis=1)
        todo = todo[~done]
        width *= 2  # rare: trial needed a longer stream prefix to see k distinct
    return hits


def _hits_keyrank(seed: int, streams: np.ndarray, n: int, r: int, k: int) -> np.ndarray:
    """Relevant-hit count via uniform keys: the k smallest keys mark the sample.

    Used when no equivalent sample is much smaller than n/2; costs n draws
    per trial but only a partition, never a sort.
    """
    keys = rng.grid_doubles(seed, streams, n)
    kth = np.partition(keys, k - 1, axis=1)[:, k - 1 : k]
    short = k - (keys < kth).sum(axis=1)  # boundary slots left after strict-< picks
    left = keys[:, :r]
    below_r = (left < kth).sum(axis=1)
    ties_r = (left == kth).sum(axis=1)
    # Key ties at the boundary (vanishingly rare) break by ascending index,
    # and the relevant items are exactly the lowest r indices.
    return below_r + np.minimum(short, ties_r)


def monte_carlo_p(config: TrialConfig) -> tuple[float, float]:
    """Empirical P(at least m relevant in the sample) and its standard error."""
    p = config.params
    n, r, k, m = p.n, p.r, p.k, p.m
    if r == 0 or m > min(r, k):
        return 0.0, 0.0
    if k == n or r == n:
        # Overlap is deterministic: min(r, k) >= m already holds here.
        return 1.0, 0.0

    # The overlap law H(n, k, r) is symmetric in (k, r), and replacing either
    # set by its complement shifts the count by a constant.  Sample the
    # smallest of the four equivalent sets and undo the transformations.
    sample_size = min(k, r, n - k, n - r)
    if sample_size > n // 4:
        # Dense regime: no equivalent set is small, so rank n keys instead.
        sampler, cells = _hits_keyrank, n
        prefix, draw, scale, shift = r, k, 1, 0
    else:
        sampler, cells = _hits_rejection, _rejection_width(n, sample_size)
        draw = sample_size
        if sample_size == k:
            prefix, scale, shift = r, 1, 0      # hits = |S_k  ^ [0,r)|
        elif sample_size == r:
            prefix, scale, shift = k, 1, 0      # hits = |S_r  ^ [0,k)|
        elif sample_size == n - k:
            prefix, scale, shift = r, -1, r     # hits = r - |S_{n-k} ^ [0,r)|
        else:
            prefix, scale, shift = k, -1, k     # hits = k - |S_{n-r} ^ [0,k)|

    successes = 0
    chunk = max(1, _CHUNK_CELLS // cells)
    for start in range(0, config.trials, chunk):
        streams = np.arange(start, min(start + chunk, config.trials), dtype=np.int64)
        overlap = sampler(config.seed, streams, n, prefix, draw)
        successes += int((shift + scale * overlap >= m).sum())
    p_hat = successes / config.trials
    se = math.sqrt(p_hat * (1.0 - p_hat) / config.trials)
    return p_hat, se


def sample_prefix(seed: int, stream: int, n: int, k: int) -> list[int]:
    """First k distinct values of the stream's uniform draws on [0, n), in draw order."""
    if not 0 <= k <= n:
        raise ValueError(f"need 0 <= k <= n, got k={k} n={n}")
    if k == 0:
        return []
    if k / n > 0.5:
        arr = np.arange(n, dtype=np.int64)
        u = rng.stream_doubles(seed, stream, k)
        for j in range(k):
            swap = j + min(int(u[j] * (n - j)), n - j - 1)
            arr[j], arr[swap] = arr[swap], arr[j]
        return [int(v) for v in arr[:k]]
    out: list[int] = []
    seen: set[int] = set()
    start = 0
    batch = max(32, 2 * k)
    while len(out) < k:
        for v in rng.stream_uints_below(seed, stream, n, batch, start):
            vi = int(v)
            if vi not in seen:
                seen.add(vi)
                out.append(vi)
                if len(out) == k:
                    break
        start += batch
    return out


def _doc_id(i: int) -> str:
    return f"d{i:07d}"


def _synthetic_judgments(spec: SyntheticSpec) -> tuple[Judgments, list[str], list[frozenset[str]]]:
    """Queries with their relevant sets.  Returns (judgments, qids, relevant sets)."""
    if spec.class_sizes is not None:
        labels: list[str] = []
        for c, size in enumerate(spec.class_sizes):
            labels.extend([f"group{c:02d}"] * size)
        members: dict[str, list[str]] = {}
        for i, label in enumerate(labels):
            members.setdefault(label, []).append(_doc_id(i))
        frozen = {label: tuple(ids) for label, ids in members.items()}
        count = min(spec.query_count, spec.n)
        # Spread query documents evenly across the corpus (and so across classes).
        qids = [_doc_id(j * spec.n // count) for j in range(count)]
        query_docs = {q: (q, labels[int(q[1:])]) for q in qids}
        judgments = Judgments.from_class_labels(frozen, query_docs)
        relevant = [judgments.relevant(q) for q in qids]
        return judgments, qids, relevant

    entries: dict[str, dict[str, int]] = {}
    qids = [f"q{i:05d}" for i in range(spec.query_count)]
    relevant_sets: list[frozenset[str]] = []
    for qi, qid in enumerate(qids):
        picks = sample_prefix(spec.seed, 2 * spec.query_count + qi, spec.n, spec.constant_r)
        rel = frozenset(_doc_id(i) for i in picks)
        entries[qid] = {d: 1 for d in rel}
        relevant_sets.append(rel)
    return Judgments.from_grades(entries), qids, relevant_sets


def _model_ranking(
    spec: SyntheticSpec, qi: int, qid: str, relevant: frozenset[str], depth: int
) -> list[str]:
    self_doc = qid if spec.class_sizes is not None else None
    if spec.retriever == "random":
        picks = sample_prefix(spec.seed, qi, spec.n, min(spec.n, depth + 1))
        ids = [_doc_id(i) for i in picks if _doc_id(i) != self_doc]
        return ids[:depth]
    if spec.retriever == "oracle":
        ranked = sorted(relevant)[:depth]
    else:  # noisy
        flips = rng.stream_doubles(spec.seed, qi, depth)
        rel_pool = sorted(relevant)
        ranked = []
        taken = 0
        for j in range(depth):
            if flips[j] < spec.hit_prob and taken < len(rel_pool):
                ranked.append(rel_pool[taken])
                taken += 1
            else:
                ranked.append(None)  # placeholder for an irrelevant doc
    # Fill remaining slots with documents that are neither relevant nor self.
    filler = (d for i in range(spec.n)
              if (d := _doc_id(i)) not in relevant and d != self_doc)
    out: list[str] = []
    for slot in ranked:
        if slot is not None:
            out.append(slot)
        else:
            fill = next(filler, None)
            if fill is not None:
                out.append(fill)
    while len(out) < depth:
        fill = next(filler, None)
        if fill is None:
            break
        out.append(fill)
    return out[:depth]


def simulate_sweep(
    spec: SyntheticSpec, k_list: list[int], rule: SuccessRule = SuccessRule()
) -> list[BorReport]:
    """Evaluate a model retriever on a synthetic judged dataset at each depth."""
    judgments, qids, relevant_sets = _synthetic_judgments(spec)
    depth = max(k_list)
    rankings: dict[str, list[tuple[str, float]]] = {}
    for qi, (qid, relevant) in enumerate(zip(qids, relevant_sets)):
        ranked = _model_ranking(spec, qi, qid, relevant, depth)
        rankings[qid] = [(doc, float(depth - pos)) for pos, doc in enumerate(ranked)]
    run = Run(rankings, system_tag=f"synthetic-{spec.retriever}")
    return [evaluate(run, judgments, spec.n, k, rule) for k in k_list]


def boundary_map(n: int, mean_relevant: float, k_grid: list[int]) -> list[CollapseDiagnostic]:
    """Collapse diagnostics across a depth grid, ready for CSV or plotting."""
    return [diagnose(n, mean_relevant, k) for k in k_grid]


def generate_class_corpus(
    class_sizes: dict[str, int],
    seed: int = 7,
    *,
    topic_vocab: int = 120,
    shared_vocab: int = 400,
    topic_mix: float = 0.65,
    body_tokens: tuple[int, int] = (40, 110),
    subject_tokens: tuple[int, int] = (4, 8),
) -> LabeledCorpus:
    """A deterministic labeled corpus with class-specific vocabulary.

    Each class draws from its own topic vocabulary (with a shared background
    vocabulary mixed in), so lexical retrieval can find classmates.  The
    first line of each document acts as its subject line.
    """
    if not class_sizes:
        raise ValueError("need at least one class")
    docs: list[Document] = []
    i = 0
    for c, (label, size) in enumerate(class_sizes.items()):
        if size < 1:
            raise ValueError(f"class {label!r} has size {size}")
        for _ in range(size):
            u = rng.stream_doubles(seed, i, 2)
            n_body = body_tokens[0] + int(u[0] * (body_tokens[1] - body_tokens[0] + 1))
            n_subj = subject_tokens[0] + int(u[1] * (subject_tokens[1] - subject_tokens[0] + 1))
            draws = rng.stream_doubles(seed, i, n_subj + 2 * n_body, start=2)
            subject = [f"t{c:02d}w{int(draws[j] * topic_vocab):03d}" for j in range(n_subj)]
            body: list[str] = []
            for j in range(n_body):
                pick, which = draws[n_subj + 2 * j], draws[n_subj + 2 * j + 1]
                if which < topic_mix:
                    body.append(f"t{c:02d}w{int(pick * topic_vocab):03d}")
                else:
                    body.append(f"common{int(pick * shared_vocab):03d}")
            text = " ".join(subject) + "\n" + " ".join(body)
            docs.append(Document(_doc_id(i), text, label))
            i += 1
    return LabeledCorpus(docs)
