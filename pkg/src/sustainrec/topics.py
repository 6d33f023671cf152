"""LDA topic vectors for resources, inferred from their tag assignments.

Each resource is a document whose words are all tags any user attached to
it. Topics come from a collapsed Gibbs sampler; the final sweep's counts give
the point estimates that downstream recommenders consume.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from numba import njit
from scipy import sparse

from .corpus import Dataset

_log = logging.getLogger(__name__)

DEFAULT_TOPICS = 500
DEFAULT_ITERATIONS = 2000
DEFAULT_CUTOFF = 0.01
DEFAULT_BETA = 0.01


@njit(cache=True)
def _gibbs_sweep(docs, words, z, ndk, nkw, nk, alpha, beta, vbeta, uniforms):
    n_topics = nk.shape[0]
    p = np.empty(n_topics)
    for i in range(docs.shape[0]):
        d = docs[i]
        w = words[i]
        k = z[i]
        ndk[d, k] -= 1
        nkw[k, w] -= 1
        nk[k] -= 1
        total = 0.0
        for t in range(n_topics):
            total += (ndk[d, t] + alpha[t]) * (nkw[t, w] + beta) / (nk[t] + vbeta)
            p[t] = total
        target = uniforms[i] * total
        k = 0
        while k < n_topics - 1 and p[k] <= target:
            k += 1
        z[i] = k
        ndk[d, k] += 1
        nkw[k, w] += 1
        nk[k] += 1


class GibbsSampler:
    """Collapsed Gibbs sampler state over a tokenized corpus.

    Parameters
    ----------
    docs, words : array of int
        Document and vocabulary index of every token.
    n_docs, n_words, n_topics : int
        Corpus dimensions.
    alpha : float or array of shape (n_topics,)
        Document-topic smoothing; a scalar is broadcast to every topic.
    beta : float
        Topic-word smoothing.
    seed : int
        Seeds both the initial assignment and every sweep's draws.
    """

    def __init__(self, docs, words, n_docs, n_words, n_topics, alpha, beta, seed):
        self.docs = np.ascontiguousarray(docs, dtype=np.int64)
        self.words = np.ascontiguousarray(words, dtype=np.int64)
        self.n_topics = n_topics
        self.alpha = np.broadcast_to(np.asarray(alpha, dtype=np.float64), (n_topics,)).copy()
        self.beta = float(beta)
        self.vbeta = n_words * self.beta
        self.rng = np.random.default_rng(seed)

        self.z = self.rng.integers(n_topics, size=len(self.docs)).astype(np.int64)
        self.ndk = np.zeros((n_docs, n_topics), dtype=np.int64)
        self.nkw = np.zeros((n_topics, n_words), dtype=np.int64)
        np.add.at(self.ndk, (self.docs, self.z), 1)
        np.add.at(self.nkw, (self.z, self.words), 1)
        self.nk = self.nkw.sum(axis=1)
        self.sweeps = 0

    @property
    def n_tokens(self) -> int:
        return len(self.docs)

    def sweep(self):
        uniforms = self.rng.random(self.n_tokens)
        _gibbs_sweep(self.docs, self.words, self.z, self.ndk, self.nkw, self.nk,
                     self.alpha, self.beta, self.vbeta, uniforms)
        self.sweeps += 1

    def doc_topic(self) -> np.ndarray:
        num = self.ndk + self.alpha
        return num / num.sum(axis=1, keepdims=True)

    def topic_word(self) -> np.ndarray:
        num = self.nkw + self.beta
        return num / num.sum(axis=1, keepdims=True)


@dataclass(frozen=True)
class TopicModel:
    n_topics: int
    topic_word: np.ndarray
    doc_topic: np.ndarray
    alpha: np.ndarray
    beta: float
    vocabulary: tuple[str, ...]
    resource_ids: tuple[str, ...]
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_index", {r: i for i, r in enumerate(self.resource_ids)})

    def row(self, resource_id) -> np.ndarray:
        try:
            return self.doc_topic[self._index[resource_id]]
        except KeyError:
            raise KeyError(f"resource {resource_id!r} not in topic model") from None


def tokenize(ds: Dataset):
    """Turn each resource's pooled tags into token arrays.

    Returns ``(resource_ids, vocabulary, docs, words)`` with tokens ordered by
    resource, then post, then tag.
    """
    resource_ids = tuple(ds.resources)
    vocabulary = tuple(sorted({t for p in ds.posts for t in p.tags}))
    vindex = {t: i for i, t in enumerate(vocabulary)}
    docs, words = [], []
    for d, rid in enumerate(resource_ids):
        for post in ds.resources[rid]:
            for tag in sorted(post.tags):
                docs.append(d)
                words.append(vindex[tag])
    return resource_ids, vocabulary, np.array(docs, dtype=np.int64), np.array(words, dtype=np.int64)


def fit_lda(ds: Dataset, n_topics: int = DEFAULT_TOPICS, iterations: int = DEFAULT_ITERATIONS,
            seed: int = 0, alpha: float | None = None, beta: float = DEFAULT_BETA,
            average_sweeps: int = 0, callback=None) -> TopicModel:
    """Fit LDA to the resources of ``ds`` by collapsed Gibbs sampling.

    ``alpha`` defaults to ``50 / n_topics``. With ``average_sweeps > 0`` the
    estimates are averaged over that many trailing sweeps instead of taken
    from the last one. ``callback(sampler)`` runs after every sweep.
    """
    if n_topics < 1:
        raise ValueError("n_topics must be >= 1")
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    resource_ids, vocabulary, docs, words = tokenize(ds)
    if len(docs) == 0:
        raise ValueError("empty corpus")
    if n_topics > len(docs):
        raise ValueError(
            f"more topics than evidence: {n_topics} topics for {len(docs)} tag assignments")
    if alpha is None:
        alpha = 50.0 / n_topics

    sampler = GibbsSampler(docs, words, len(resource_ids), len(vocabulary), n_topics,
                           alpha, beta, seed)
    _log.info("LDA: %d docs, %d words, %d tokens, K=%d", len(resource_ids), len(vocabulary),
              sampler.n_tokens, n_topics)
    avg_from = iterations - min(average_sweeps, iterations)
    doc_acc = topic_acc = None
    for it in range(iterations):
        sampler.sweep()
        if callback is not None:
            callback(sampler)
        if average_sweeps and it >= avg_from:
            dt, tw = sampler.doc_topic(), sampler.topic_word()
            doc_acc = dt if doc_acc is None else doc_acc + dt
            topic_acc = tw if topic_acc is None else topic_acc + tw
        if (it + 1) % 100 == 0:
            _log.debug("LDA sweep %d/%d", it + 1, iterations)

    if doc_acc is not None:
        n_avg = iterations - avg_from
        doc_topic, topic_word = doc_acc / n_avg, topic_acc / n_avg
    else:
        doc_topic, topic_word = sampler.doc_topic(), sampler.topic_word()
    return TopicModel(n_topics, topic_word, doc_topic, sampler.alpha, float(beta),
                      vocabulary, resource_ids)


def apply_cutoff(row, cutoff: float) -> np.ndarray:
    """Zero entries below ``cutoff`` without renormalizing.

    The largest entry always survives so that no vector ends up all zero.
    """
    row = np.asarray(row, dtype=np.float64)
    out = np.where(row >= cutoff, row, 0.0)
    if len(out) and not out.any():
        m = int(np.argmax(row))
        out[m] = row[m]
    return out


def resource_topics(model: TopicModel, resource_id, cutoff: float = DEFAULT_CUTOFF) -> np.ndarray:
    return apply_cutoff(model.row(resource_id), cutoff)


class TopicTable:
    """Filtered topic vectors for a set of resources, stored sparse."""

    def __init__(self, resource_ids, matrix):
        self.resource_ids: tuple[str, ...] = tuple(resource_ids)
        self.matrix = sparse.csr_matrix(matrix, dtype=np.float64)
        if self.matrix.shape[0] != len(self.resource_ids):
            raise ValueError("one matrix row per resource required")
        self.index = {r: i for i, r in enumerate(self.resource_ids)}

    @property
    def n_topics(self) -> int:
        return self.matrix.shape[1]

    def __contains__(self, resource_id):
        return resource_id in self.index

    def __len__(self):
        return len(self.resource_ids)

    def vector(self, resource_id) -> np.ndarray:
        """Dense topic vector; resources without topics map to zeros."""
        i = self.index.get(resource_id)
        if i is None:
            return np.zeros(self.n_topics)
        return self.matrix[i].toarray().ravel()

    def vectors(self, resource_ids) -> np.ndarray:
        out = np.zeros((len(resource_ids), self.n_topics))
        for j, rid in enumerate(resource_ids):
            i = self.index.get(rid)
            if i is not None:
                row = self.matrix[i]
                out[j, row.indices] = row.data
        return out

    @classmethod
    def from_model(cls, model: TopicModel, cutoff: float = DEFAULT_CUTOFF) -> TopicTable:
        rows = np.vstack([apply_cutoff(r, cutoff) for r in model.doc_topic])
        return cls(model.resource_ids, rows)


def write_topics(table: TopicTable, path) -> None:
    """Write ``resource_id \\t k:p k:p ...`` lines with 6-decimal probabilities."""
    with open(path, "w", encoding="utf-8") as f:
        for i, rid in enumerate(table.resource_ids):
            row = table.matrix[i]
            order = np.argsort(row.indices)
            pairs = " ".join(f"{row.indices[j]}:{row.data[j]:.6f}" for j in order)
            f.write(f"{rid}\t{pairs}\n")


def read_topics(path, n_topics: int | None = None) -> TopicTable:
    """Read a topic file, e.g. one produced by an external tool.

    ``n_topics`` defaults to one past the largest topic index seen.
    """
    ids, rows, cols, vals = [], [], [], []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            rid, _, pairs = line.partition("\t")
            if not rid:
                raise ValueError(f"{path}: line {lineno}: missing resource id")
            r = len(ids)
            ids.append(rid)
            for pair in pairs.split():
                try:
                    k, p = pair.split(":")
                    cols.append(int(k))
                    vals.append(float(p))
                except ValueError:
                    raise ValueError(f"{path}: line {lineno}: bad pair {pair!r}") from None
                rows.append(r)
    if n_topics is None:
        n_topics = max(cols) + 1 if cols else 1
    mat = sparse.csr_matrix((vals, (rows, cols)), shape=(len(ids), n_topics))
    return TopicTable(ids, mat)
