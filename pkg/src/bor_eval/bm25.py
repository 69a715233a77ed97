"""A small, deterministic BM25 retriever.

Exists so the evaluator can be driven end to end on labeled corpora without
external search infrastructure.  Scoring uses the standard formulation

    idf(t) = ln(1 + (N - df + 0.5) / (df + 0.5))
    score(q, d) = sum_t idf(t) * tf * (k1 + 1) / (tf + k1 * (1 - b + b * len_d / avg_len))

with k1 = 1.2, b = 0.75 by default.  No stemming; ties break by doc id.
"""

from __future__ import annotations

import heapq
import math
import pickle
import re
from collections.abc import Iterable, Mapping
from dataclasses import dataclass

from .ingest import LabeledCorpus, Run

__all__ = ["Bm25Params", "InvertedIndex", "tokenize", "build_index", "search", "make_run",
           "save_index", "load_index"]

_TOKEN = re.compile(r"[a-z0-9]+")


@dataclass(frozen=True, slots=True)
class Bm25Params:
    k1: float = 1.2
    b: float = 0.75

    def __post_init__(self) -> None:
        if self.k1 < 0 or not 0.0 <= self.b <= 1.0:
            raise ValueError(f"bad BM25 parameters: k1={self.k1} b={self.b}")


@dataclass(frozen=True)
class InvertedIndex:
    doc_ids: tuple[str, ...]
    doc_lengths: tuple[int, ...]
    avg_doc_length: float
    postings: dict[str, list[tuple[int, int]]]  # term -> [(doc ref, tf)], refs ascending

    @property
    def doc_count(self) -> int:
        return len(self.doc_ids)

    def ref_of(self, doc_id: str) -> int:
        cache = self.__dict__.get("_ref_cache")
        if cache is None:
            cache = {d: i for i, d in enumerate(self.doc_ids)}
            object.__setattr__(self, "_ref_cache", cache)
        try:
            return cache[doc_id]
        except KeyError:
            raise KeyError(f"document not in index: {doc_id}") from None


def tokenize(text: str, stopwords: frozenset[str] | None = None) -> list[str]:
    """Lowercase, split on non-alphanumeric runs, drop tokens shorter than 2."""
    tokens = [t for t in _TOKEN.findall(text.lower()) if len(t) >= 2]
    if stopwords:
        tokens = [t for t in tokens if t not in stopwords]
    return tokens


def build_index(corpus: LabeledCorpus, stopwords: frozenset[str] | None = None) -> InvertedIndex:
    if len(corpus) == 0:
        raise ValueError("cannot index an empty corpus")
    postings: dict[str, list[tuple[int, int]]] = {}
    lengths: list[int] = []
    for ref, doc in enumerate(corpus):
        tokens = tokenize(doc.text, stopwords)
        lengths.append(len(tokens))
        counts: dict[str, int] = {}
        for tok in tokens:
            counts[tok] = counts.get(tok, 0) + 1
        for tok in sorted(counts):
            postings.setdefault(tok, []).append((ref, counts[tok]))
    total = sum(lengths)
    if total == 0:
        raise ValueError("corpus has no indexable tokens")
    return InvertedIndex(
        doc_ids=tuple(corpus.doc_ids()),
        doc_lengths=tuple(lengths),
        avg_doc_length=total / len(lengths),
        postings=postings,
    )


def search(
    index: InvertedIndex,
    query_terms: list[str],
    k: int,
    params: Bm25Params = Bm25Params(),
    exclude: str | None = None,
) -> list[tuple[str, float]]:
    """Top-k documents for the query terms, highest score first.

    Only documents matching at least one term are returned, so fewer than k
    results is possible.  Repeated query terms contribute once per repeat.
    ``exclude`` drops one document (by id) before selection, which is how a
    document queries a corpus it belongs to.
    """
    if k < 1:
        raise ValueError(f"depth must be >= 1, got {k}")
    n = index.doc_count
    k1, b = params.k1, params.b
    scores: dict[int, float] = {}
    for term in query_terms:
        plist = index.postings.get(term)
        if plist is None:
            continue
        df = len(plist)
        idf = math.log(1.0 + (n - df + 0.5) / (df + 0.5))
        for ref, tf in plist:
            norm = tf + k1 * (1.0 - b + b * index.doc_lengths[ref] / index.avg_doc_length)
            scores[ref] = scores.get(ref, 0.0) + idf * tf * (k1 + 1.0) / norm
    if exclude is not None:
        scores.pop(index.ref_of(exclude), None)
    top = heapq.nsmallest(k, scores.items(), key=lambda item: (-item[1], index.doc_ids[item[0]]))
    return [(index.doc_ids[ref], score) for ref, score in top]


def make_run(
    index: InvertedIndex,
    queries: Mapping[str, str] | Iterable[tuple[str, str]],
    k: int,
    params: Bm25Params = Bm25Params(),
    *,
    exclude_self: bool = False,
    stopwords: frozenset[str] | None = None,
    tag: str = "bm25",
) -> Run:
    """Search every (query id, query text) pair and collect a Run.

    With ``exclude_self``, each query id is treated as a document id and that
    document is removed from its own candidate list.
    """
    pairs = queries.items() if isinstance(queries, Mapping) else queries
    rankings: dict[str, list[tuple[str, float]]] = {}
    for qid, text in pairs:
        exclude = qid if exclude_self else None
        rankings[qid] = search(index, tokenize(text, stopwords), k, params, exclude)
    return Run(rankings, system_tag=tag)


def save_index(index: InvertedIndex, path) -> None:
    with open(path, "wb") as fh:
        pickle.dump(
            {"format": 1, "doc_ids": index.doc_ids, "doc_lengths": index.doc_lengths,
             "avg_doc_length": index.avg_doc_length, "postings": index.postings},
            fh, protocol=pickle.HIGHEST_PROTOCOL,
        )


def load_index(path) -> InvertedIndex:
    with open(path, "rb") as fh:
        blob = pickle.load(fh)
    if not isinstance(blob, dict) or blob.get("format") != 1:
        raise ValueError(f"not a recognized index snapshot: {path}")
    return InvertedIndex(blob["doc_ids"], blob["doc_lengths"], blob["avg_doc_length"],
                         blob["postings"])
