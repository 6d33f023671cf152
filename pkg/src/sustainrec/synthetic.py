"""Synthetic bookmarking logs with topic-clustered user histories."""

from __future__ import annotations

import numpy as np

from .corpus import Dataset, Post


def generate_posts(n_users: int = 60, n_groups: int = 6, resources_per_group: int = 30,
                   tags_per_group: int = 10, posts_per_user: tuple[int, int] = (8, 25),
                   interests: int = 2, focus: float = 0.85, seed: int = 0) -> Dataset:
    """Generate a dataset where each user bookmarks mostly within a few topic groups.

    Every group owns a block of resources and a private tag vocabulary.
    Users draw ``interests`` favourite groups and pick from them with
    probability ``focus``, otherwise from any group; resources within a group
    follow a Zipf-like popularity.
    """
    rng = np.random.default_rng(seed)
    pop = 1.0 / np.arange(1, resources_per_group + 1)
    pop /= pop.sum()
    shared_tags = [f"misc{i}" for i in range(3)]

    posts = []
    for u in range(n_users):
        fav = rng.choice(n_groups, size=min(interests, n_groups), replace=False)
        n_posts = int(rng.integers(posts_per_user[0], posts_per_user[1] + 1))
        seen = set()
        t = int(rng.integers(1_000_000, 2_000_000))
        tries = 0
        while len(seen) < n_posts and tries < 20 * n_posts:
            tries += 1
            g = int(rng.choice(fav)) if rng.random() < focus else int(rng.integers(n_groups))
            r = int(rng.choice(resources_per_group, p=pop))
            rid = f"r{g:02d}_{r:03d}"
            if rid in seen:
                continue
            seen.add(rid)
            n_tags = int(rng.integers(2, 5))
            tags = {f"g{g}t{int(x)}" for x in rng.choice(tags_per_group, size=n_tags, replace=False)}
            if rng.random() < 0.2:
                tags.add(shared_tags[int(rng.integers(len(shared_tags)))])
            t += int(rng.integers(60, 86_400))
            posts.append(Post(f"u{u:03d}", rid, frozenset(tags), t, len(posts)))
    return Dataset(posts)
