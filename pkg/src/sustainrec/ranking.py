"""Scored recommendation lists shared by every recommender."""

from __future__ import annotations

import heapq
from typing import Iterable, Mapping

import numpy as np

#: ordered ``(resource_id, score)`` pairs, best first
ScoredList = list[tuple[str, float]]


def _order(item):
    rid, score = item
    return (-score, rid)


def top_n(scores: Mapping[str, float] | Iterable[tuple[str, float]], n: int | None = None) -> ScoredList:
    """Rank by descending score, breaking ties by ascending resource id."""
    items = scores.items() if isinstance(scores, Mapping) else scores
    items = [(rid, float(s)) for rid, s in items]
    if n is None or n >= len(items):
        return sorted(items, key=_order)
    return heapq.nsmallest(n, items, key=_order)


def top_n_array(ids, scores, n: int | None = None, mask=None) -> ScoredList:
    """:func:`top_n` over parallel arrays, skipping entries where ``mask`` is false."""
    scores = np.asarray(scores, dtype=np.float64)
    idx = np.arange(len(scores)) if mask is None else np.flatnonzero(mask)
    if n is not None and n < len(idx):
        sub = scores[idx]
        threshold = np.partition(sub, len(sub) - n)[len(sub) - n]
        idx = idx[sub >= threshold]
    return top_n([(ids[i], scores[i]) for i in idx], n)


def exclude(scored: ScoredList, owned) -> ScoredList:
    return [(rid, s) for rid, s in scored if rid not in owned]


def write_scored_list(scored: ScoredList, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for rank, (rid, score) in enumerate(scored, start=1):
            f.write(f"{rank}\t{rid}\t{score:.6f}\n")


def read_scored_list(path) -> ScoredList:
    out = []
    with open(path, encoding="utf-8") as f:
        for line in f:
            if line.strip():
                _, rid, score = line.rstrip("\n").split("\t")
                out.append((rid, float(score)))
    return out


def write_recommendations(recs: Mapping[str, ScoredList], path) -> None:
    """Dump ``user_id \\t rank \\t resource_id \\t score`` rows for many users."""
    with open(path, "w", encoding="utf-8") as f:
        for user in sorted(recs):
            for rank, (rid, score) in enumerate(recs[user], start=1):
                f.write(f"{user}\t{rank}\t{rid}\t{score:.6f}\n")


def read_recommendations(path) -> dict[str, ScoredList]:
    recs: dict[str, list[tuple[int, str, float]]] = {}
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            if not line.strip():
                continue
            cols = line.rstrip("\n").split("\t")
            if len(cols) != 4:
                raise ValueError(f"{path}: line {lineno}: expected 4 columns")
            user, rank, rid, score = cols
            recs.setdefault(user, []).append((int(rank), rid, float(score)))
    return {u: [(rid, s) for _, rid, s in sorted(rows)] for u, rows in recs.items()}
