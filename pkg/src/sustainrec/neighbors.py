"""User- and resource-based nearest-neighbor CF on binary bookmark data.

Similarities are cosines between binary vectors, computed as
``overlap / sqrt(|a| * |b|)`` from integer overlap counts. Candidate scores
sum neighbor similarities with :func:`math.fsum`, so they do not depend on
accumulation order.
"""

from __future__ import annotations

import math
from collections import defaultdict

import numpy as np
from scipy import sparse

from .corpus import Dataset
from .ranking import ScoredList, top_n

DEFAULT_NEIGHBORS = 20
DEFAULT_CANDIDATES = 100


class InteractionMatrix:
    """Binary user x resource matrix with ids in ascending order.

    Built from training posts only.
    """

    def __init__(self, user_ids, resource_ids, matrix):
        self.user_ids: tuple[str, ...] = tuple(user_ids)
        self.resource_ids: tuple[str, ...] = tuple(resource_ids)
        m = sparse.csr_matrix(matrix, dtype=np.float64)
        m.data[:] = 1.0
        m.eliminate_zeros()
        self.matrix = m
        self.user_index = {u: i for i, u in enumerate(self.user_ids)}
        self.resource_index = {r: i for i, r in enumerate(self.resource_ids)}
        self._cols = None
        self._user_counts = np.asarray(m.sum(axis=1)).ravel()
        self._res_counts = np.asarray(m.sum(axis=0)).ravel()

    @classmethod
    def from_dataset(cls, ds: Dataset) -> InteractionMatrix:
        users = list(ds.users)
        resources = list(ds.resources)
        uidx = {u: i for i, u in enumerate(users)}
        ridx = {r: i for i, r in enumerate(resources)}
        pairs = {(uidx[p.user_id], ridx[p.resource_id]) for p in ds.posts}
        rows = [u for u, _ in pairs]
        cols = [r for _, r in pairs]
        mat = sparse.csr_matrix((np.ones(len(pairs)), (rows, cols)), shape=(len(users), len(resources)))
        return cls(users, resources, mat)

    @property
    def shape(self):
        return self.matrix.shape

    @property
    def columns(self) -> sparse.csr_matrix:
        """Resource x user view, built on first use."""
        if self._cols is None:
            self._cols = self.matrix.T.tocsr()
        return self._cols

    def owned(self, user) -> set[str]:
        i = self.user_index.get(user)
        if i is None:
            return set()
        row = self.matrix[i]
        return {self.resource_ids[j] for j in row.indices}

    def owned_indices(self, user) -> np.ndarray:
        i = self.user_index[user]
        return np.sort(self.matrix.indices[self.matrix.indptr[i]:self.matrix.indptr[i + 1]])

    def user_similarities(self, user) -> np.ndarray:
        """Cosine between ``user`` and every user (itself included)."""
        i = self.user_index[user]
        overlap = (self.matrix @ self.matrix[i].T).toarray().ravel()
        return _cosines(overlap, self._user_counts, self._user_counts[i])

    def resource_similarities(self, ridx) -> np.ndarray:
        """Cosine between resource column ``ridx`` and every resource column."""
        cols = self.columns
        overlap = (cols @ cols[ridx].T).toarray().ravel()
        return _cosines(overlap, self._res_counts, self._res_counts[ridx])


def _cosines(overlap, sizes, own_size):
    denom = np.sqrt(sizes * own_size)
    out = np.zeros_like(overlap, dtype=np.float64)
    nz = denom > 0
    out[nz] = overlap[nz] / denom[nz]
    return out


def cosine(u, v) -> float:
    """Cosine similarity of two binary vectors given as collections of their nonzero keys."""
    u, v = set(u), set(v)
    if not u or not v:
        return 0.0
    return len(u & v) / math.sqrt(len(u) * len(v))


def _top_k_indices(sims, k, skip):
    # ascending index doubles as ascending id, so a stable sort on -sim breaks ties by id
    n = len(sims)
    kk = min(k + 1, n)
    threshold = np.partition(sims, n - kk)[n - kk]
    cand = np.flatnonzero(sims >= threshold)
    order = cand[np.argsort(-sims[cand], kind="stable")]
    return [int(j) for j in order if j != skip][:k]


def _accumulate(contrib) -> dict[str, float]:
    return {rid: math.fsum(vals) for rid, vals in contrib.items()}


def cf_user_scores(m: InteractionMatrix, user, k: int = DEFAULT_NEIGHBORS,
                   n_candidates: int | None = DEFAULT_CANDIDATES) -> ScoredList:
    """Score unowned resources by the summed similarity of the k nearest users holding them."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if user not in m.user_index:
        return []
    i = m.user_index[user]
    if m._user_counts[i] == 0:
        return []
    sims = m.user_similarities(user)
    owned = set(m.owned_indices(user).tolist())
    contrib = defaultdict(list)
    mat = m.matrix
    for j in _top_k_indices(sims, k, i):
        for r in mat.indices[mat.indptr[j]:mat.indptr[j + 1]]:
            if r not in owned:
                contrib[m.resource_ids[r]].append(sims[j])
    return top_n(_accumulate(contrib), n_candidates)


def cf_resource_scores(m: InteractionMatrix, user, k: int = DEFAULT_NEIGHBORS,
                       n_candidates: int | None = DEFAULT_CANDIDATES) -> ScoredList:
    """Score unowned resources by their similarity to the user's resources.

    Each owned resource contributes to its own k nearest resources only.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if user not in m.user_index:
        return []
    owned_idx = m.owned_indices(user)
    if owned_idx.size == 0:
        return []
    owned = set(owned_idx.tolist())
    contrib = defaultdict(list)
    for r in owned_idx:
        sims = m.resource_similarities(r)
        for c in _top_k_indices(sims, k, r):
            if c not in owned:
                contrib[m.resource_ids[c]].append(sims[c])
    return top_n(_accumulate(contrib), n_candidates)
