"""Textbook ranking metrics computed from an explicit 0/1 gain vector."""

import math


def gains(ranking, relevant, k):
    g = [1 if r in relevant else 0 for r in ranking[:k]]
    return g + [0] * (k - len(g))


def precision(ranking, relevant, k):
    return sum(gains(ranking, relevant, k)) / k


def recall(ranking, relevant, k):
    return sum(gains(ranking, relevant, k)) / len(relevant)


def average_precision(ranking, relevant, k):
    g = gains(ranking, relevant, k)
    precs = [sum(g[:i]) / i for i in range(1, k + 1) if g[i - 1]]
    return sum(precs) / min(len(relevant), k)


def ndcg(ranking, relevant, k):
    g = gains(ranking, relevant, k)
    dcg = sum(x / math.log2(i + 2) for i, x in enumerate(g))
    ideal = sorted([1] * len(relevant) + [0] * k, reverse=True)[:k]
    return dcg / sum(x / math.log2(i + 2) for i, x in enumerate(ideal))
