"""Most Popular and topic-based content filtering."""

from __future__ import annotations

from collections import Counter

import numpy as np

from .corpus import Dataset
from .ranking import ScoredList, top_n, top_n_array
from .topics import TopicTable


def most_popular(train: Dataset, n: int | None = None) -> ScoredList:
    """Resources ranked by their number of training posts."""
    counts = Counter(p.resource_id for p in train.posts)
    return top_n({r: float(c) for r, c in counts.items()}, n)


def user_topic_profile(train: Dataset, user, topics: TopicTable) -> np.ndarray:
    """Mean filtered topic vector over the user's training resources."""
    posts = train.users.get(user, ())
    if not posts:
        raise ValueError(f"user {user!r} has no training posts")
    return topics.vectors([p.resource_id for p in posts]).mean(axis=0)


def cb_topic_scores(profile, topics: TopicTable, n: int | None = None, owned=()) -> ScoredList:
    """Cosine between the profile and every resource's topic vector, owned resources excluded."""
    profile = np.asarray(profile, dtype=np.float64)
    pnorm = np.linalg.norm(profile)
    if pnorm == 0:
        return []
    mat = topics.matrix
    dots = mat @ profile
    norms = np.sqrt(np.asarray(mat.multiply(mat).sum(axis=1)).ravel())
    scores = np.zeros(len(dots))
    nz = norms > 0
    scores[nz] = dots[nz] / (norms[nz] * pnorm)
    owned = set(owned)
    mask = np.array([rid not in owned for rid in topics.resource_ids], dtype=bool)
    return top_n_array(topics.resource_ids, scores, n, mask)
