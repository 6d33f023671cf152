"""Top-k ranking metrics with binary relevance, averaged over users."""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .corpus import SplitDataset
from .ranking import ScoredList

_log = logging.getLogger(__name__)

METRICS = ("ndcg", "map", "recall", "precision")
CURVE_MAX = 20


def _ids(recommended):
    return [r[0] if isinstance(r, tuple) else r for r in recommended]


def precision_recall_at_k(recommended, relevant, k: int) -> tuple[float, float]:
    if k < 1:
        raise ValueError("k must be >= 1")
    if not relevant:
        raise ValueError("relevant set is empty")
    hits = len(set(_ids(recommended)[:k]) & set(relevant))
    return hits / k, hits / len(relevant)


def average_precision_at_k(recommended, relevant, k: int) -> float:
    if k < 1:
        raise ValueError("k must be >= 1")
    if not relevant:
        raise ValueError("relevant set is empty")
    relevant = set(relevant)
    hits = 0
    total = 0.0
    for i, rid in enumerate(_ids(recommended)[:k], start=1):
        if rid in relevant:
            hits += 1
            total += hits / i
    return total / min(len(relevant), k)


def ndcg_at_k(recommended, relevant, k: int) -> float:
    if k < 1:
        raise ValueError("k must be >= 1")
    if not relevant:
        raise ValueError("relevant set is empty")
    relevant = set(relevant)
    dcg = sum(1.0 / math.log2(i + 1)
              for i, rid in enumerate(_ids(recommended)[:k], start=1) if rid in relevant)
    idcg = sum(1.0 / math.log2(i + 1) for i in range(1, min(len(relevant), k) + 1))
    return dcg / idcg


@dataclass
class MetricsReport:
    algorithm: str
    k: int
    user_count: int
    ndcg: float
    map: float
    recall: float
    precision: float
    # (k, mean precision, mean recall) for k = 1..CURVE_MAX
    pr_curve: list[tuple[int, float, float]] = field(default_factory=list)

    def value(self, metric: str) -> float:
        return getattr(self, metric)


def user_metrics(recommended, relevant, k: int, curve_max: int = CURVE_MAX) -> dict:
    p, r = precision_recall_at_k(recommended, relevant, k)
    curve = [precision_recall_at_k(recommended, relevant, kk) for kk in range(1, curve_max + 1)]
    return {
        "ndcg": ndcg_at_k(recommended, relevant, k),
        "map": average_precision_at_k(recommended, relevant, k),
        "recall": r,
        "precision": p,
        "curve": curve,
    }


def evaluate(algorithm: str, recommender: Callable[[str], ScoredList] | dict,
             split: SplitDataset, k: int = 20, curve_max: int = CURVE_MAX) -> MetricsReport:
    """Mean metrics over every user with a non-empty test set.

    ``recommender`` is either a callable ``user -> ScoredList`` or a mapping
    of precomputed lists. Resources the user owns in training are dropped
    before cutting at ``max(k, curve_max)``; users without recommendations
    count as zeros.
    """
    users = split.evaluable_users()
    if not users:
        raise ValueError("no evaluable users")
    depth = max(k, curve_max)
    rows = []
    for user in users:
        if callable(recommender):
            recs = recommender(user)
        else:
            recs = recommender.get(user, [])
        owned = {p.resource_id for p in split.train.users.get(user, ())}
        recs = [rid for rid in _ids(recs) if rid not in owned][:depth]
        relevant = {p.resource_id for p in split.test.users[user]}
        rows.append(user_metrics(recs, relevant, k, curve_max))

    def mean(vals):
        return math.fsum(vals) / len(vals)

    curve = np.array([row["curve"] for row in rows])
    pr_curve = [(kk + 1, mean(curve[:, kk, 0]), mean(curve[:, kk, 1])) for kk in range(curve_max)]
    return MetricsReport(
        algorithm, k, len(rows),
        **{m: mean([row[m] for row in rows]) for m in METRICS},
        pr_curve=pr_curve,
    )


def write_metrics_csv(reports, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["algorithm", "metric", "k", "value"])
        for rep in reports:
            for metric in METRICS:
                w.writerow([rep.algorithm, metric, rep.k, repr(rep.value(metric))])
            w.writerow([rep.algorithm, "users", rep.k, rep.user_count])


def write_pr_curve_csv(reports, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["algorithm", "k", "precision", "recall"])
        for rep in reports:
            for kk, p, r in rep.pr_curve:
                w.writerow([rep.algorithm, kk, repr(p), repr(r)])


def read_metrics_csv(path) -> dict[str, dict[str, float]]:
    out: dict[str, dict[str, float]] = {}
    with open(path, newline="", encoding="utf-8") as f:
        for row in csv.DictReader(f):
            out.setdefault(row["algorithm"], {})[row["metric"]] = float(row["value"])
    return out


def format_table(reports) -> str:
    """Metrics as rows, algorithms as columns."""
    names = [rep.algorithm for rep in reports]
    width = max([9] + [len(n) for n in names])
    k = reports[0].k if reports else 20
    labels = {"ndcg": f"nDCG@{k}", "map": f"MAP@{k}", "recall": f"R@{k}", "precision": f"P@{k}"}
    lines = ["Metric    " + "".join(n.rjust(width + 2) for n in names)]
    for metric in METRICS:
        vals = "".join(f"{rep.value(metric):.4f}".rjust(width + 2) for rep in reports)
        lines.append(labels[metric].ljust(10) + vals)
    return "\n".join(lines)
