"""SUSTAIN+CF_U: re-rank user-based CF candidates with the user's SUSTAIN network."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .neighbors import InteractionMatrix, cf_user_scores, DEFAULT_NEIGHBORS
from .ranking import ScoredList, top_n
from .sustain import SustainParams, UserNetwork, activate
from .topics import TopicTable


@dataclass(frozen=True)
class HybridConfig:
    alpha: float = 0.5
    candidate_count: int = 100
    k: int = 20
    neighbors: int = DEFAULT_NEIGHBORS
    normalize: bool = True

    def __post_init__(self):
        if not 0 <= self.alpha <= 1:
            raise ValueError("alpha must be in [0, 1]")
        if not self.candidate_count >= self.k >= 1:
            raise ValueError("need candidate_count >= k >= 1")


def normalize_scores(scored: ScoredList) -> ScoredList:
    """Min-max scale scores onto [0, 1]; a constant list maps to all ones."""
    if not scored:
        return []
    vals = np.array([s for _, s in scored], dtype=np.float64)
    lo, hi = vals.min(), vals.max()
    if hi == lo:
        return [(rid, 1.0) for rid, _ in scored]
    scaled = (vals - lo) / (hi - lo)
    return [(rid, float(v)) for (rid, _), v in zip(scored, scaled)]


def blend(sustain: ScoredList, cf: ScoredList, alpha: float, k: int | None,
          normalize: bool = True) -> ScoredList:
    """``alpha * sustain + (1 - alpha) * cf`` over the shared candidates, top k."""
    if normalize:
        sustain, cf = normalize_scores(sustain), normalize_scores(cf)
    s = dict(sustain)
    return top_n({rid: alpha * s[rid] + (1.0 - alpha) * c for rid, c in cf}, k)


def sustain_scores(net: UserNetwork, candidates, topics: TopicTable,
                   params: SustainParams = SustainParams()) -> ScoredList:
    """SUSTAIN output for each candidate, in candidate order."""
    vecs = topics.vectors(list(candidates))
    return [(rid, activate(net, v, params).h_out) for rid, v in zip(candidates, vecs)]


def recommend(user, net: UserNetwork, m: InteractionMatrix, topics: TopicTable,
              cfg: HybridConfig = HybridConfig(),
              params: SustainParams = SustainParams()) -> ScoredList:
    """Top ``cfg.k`` resources for ``user`` by the blended score."""
    if net is None or not net.clusters:
        raise ValueError(f"user {user!r} has no trained network")
    cf = cf_user_scores(m, user, cfg.neighbors, cfg.candidate_count)
    if not cf:
        return []
    sus = sustain_scores(net, [rid for rid, _ in cf], topics, params)
    return blend(sus, cf, cfg.alpha, cfg.k, cfg.normalize)
