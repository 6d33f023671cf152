"""Set-based brute-force CF scoring, independent of the sparse implementation."""

import math


def cos(a, b):
    if not a or not b:
        return 0.0
    return len(a & b) / math.sqrt(len(a) * len(b))


def rank(scores, n=None):
    out = sorted(scores.items(), key=lambda kv: (-kv[1], kv[0]))
    return out if n is None else out[:n]


def user_based(rows, user, k, n=None):
    """``rows`` maps user -> set of resources."""
    mine = rows[user]
    if not mine:
        return []
    sims = [(cos(mine, items), v) for v, items in rows.items() if v != user]
    sims.sort(key=lambda sv: (-sv[0], sv[1]))
    contrib = {}
    for s, v in sims[:k]:
        for r in rows[v] - mine:
            contrib.setdefault(r, []).append(s)
    return rank({r: math.fsum(vals) for r, vals in contrib.items()}, n)


def resource_based(rows, user, k, n=None, resources=()):
    """``resources`` adds columns nobody bookmarked (zero vectors)."""
    cols = {r: set() for r in resources}
    for v, items in rows.items():
        for r in items:
            cols.setdefault(r, set()).add(v)
    mine = rows[user]
    if not mine:
        return []
    contrib = {}
    for r in sorted(mine):
        sims = [(cos(cols[r], cols[c]), c) for c in cols if c != r]
        sims.sort(key=lambda sc: (-sc[0], sc[1]))
        for s, c in sims[:k]:
            if c not in mine:
                contrib.setdefault(c, []).append(s)
    return rank({r: math.fsum(vals) for r, vals in contrib.items()}, n)
