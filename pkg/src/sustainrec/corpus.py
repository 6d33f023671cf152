"""Social-tagging post logs: parsing, filtering, sampling and chronological splits.

A post is one user bookmarking one resource with a set of tags at a point in
time. Raw dumps store one tag assignment per line; lines that share
``(user, resource, timestamp)`` are merged into a single post, and repeated
``(user, resource)`` pairs are collapsed onto the earliest one.
"""

from __future__ import annotations

import logging
import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable

import numpy as np

_log = logging.getLogger(__name__)

#: one tag per line: ``user \t resource \t timestamp \t tag``
FORMAT_TAS = "tas"
#: one post per line, tags comma-separated in the fourth column
FORMAT_POSTS = "posts"
FORMATS = (FORMAT_TAS, FORMAT_POSTS)

# guards ceil() against float products like 0.2 * 15 = 3.0000000000000004
_CEIL_EPS = 1e-9


def _ceil(x: float) -> int:
    return math.ceil(x - _CEIL_EPS)


@dataclass(frozen=True)
class Post:
    user_id: str
    resource_id: str
    tags: frozenset[str]
    timestamp: int
    post_id: int

    def __post_init__(self):
        if not self.tags:
            raise ValueError(f"post {self.post_id} has no tags")


def _chrono_key(post: Post):
    return (post.timestamp, post.post_id)


class Dataset:
    """An immutable collection of posts with user and resource indices.

    ``users`` and ``resources`` map ids to the tuple of their posts in
    chronological order (timestamp, then post id).
    """

    def __init__(self, posts: Iterable[Post]):
        self.posts: tuple[Post, ...] = tuple(sorted(posts, key=lambda p: p.post_id))
        ids = [p.post_id for p in self.posts]
        if len(set(ids)) != len(ids):
            raise ValueError("post ids must be unique")
        users = defaultdict(list)
        resources = defaultdict(list)
        for p in self.posts:
            users[p.user_id].append(p)
            resources[p.resource_id].append(p)
        self.users: dict[str, tuple[Post, ...]] = {
            u: tuple(sorted(ps, key=_chrono_key)) for u, ps in sorted(users.items())
        }
        self.resources: dict[str, tuple[Post, ...]] = {
            r: tuple(sorted(ps, key=_chrono_key)) for r, ps in sorted(resources.items())
        }

    def __len__(self):
        return len(self.posts)

    def __eq__(self, other):
        return isinstance(other, Dataset) and self.posts == other.posts

    def __repr__(self):
        return (
            f"<Dataset |P|={self.n_posts} |U|={self.n_users} "
            f"|R|={self.n_resources} |T|={self.n_tags} |TAS|={self.n_tas}>"
        )

    @property
    def n_posts(self) -> int:
        return len(self.posts)

    @property
    def n_users(self) -> int:
        return len(self.users)

    @property
    def n_resources(self) -> int:
        return len(self.resources)

    @property
    def n_tags(self) -> int:
        return len({t for p in self.posts for t in p.tags})

    @property
    def n_tas(self) -> int:
        return sum(len(p.tags) for p in self.posts)

    def stats(self) -> dict[str, int]:
        return {
            "posts": self.n_posts,
            "users": self.n_users,
            "resources": self.n_resources,
            "tags": self.n_tags,
            "tas": self.n_tas,
        }

    def subset(self, keep) -> Dataset:
        """Dataset of the posts for which ``keep(post)`` is true."""
        return Dataset(p for p in self.posts if keep(p))


@dataclass(frozen=True)
class SplitDataset:
    train: Dataset
    test: Dataset

    def evaluable_users(self) -> list[str]:
        """Users with at least one test post, in ascending id order."""
        return list(self.test.users)


def _parse_lines(lines, fmt):
    # (user, resource, timestamp) -> [first line index, tags]
    merged: dict[tuple[str, str, int], list] = {}
    for lineno, raw in enumerate(lines, start=1):
        line = raw.rstrip("\r\n")
        if not line.strip():
            continue
        cols = line.split("\t")
        if len(cols) != 4:
            raise ValueError(f"line {lineno}: expected 4 tab-separated columns, got {len(cols)}")
        user, resource, ts, tagcol = (c.strip() for c in cols)
        if not user or not resource:
            raise ValueError(f"line {lineno}: empty user or resource id")
        try:
            ts = int(ts)
        except ValueError:
            raise ValueError(f"line {lineno}: timestamp {ts!r} is not an integer") from None
        if fmt == FORMAT_TAS:
            tags = [tagcol]
        else:
            tags = [t.strip() for t in tagcol.split(",")]
        tags = [t for t in tags if t]
        if not tags:
            raise ValueError(f"line {lineno}: no tags")
        key = (user, resource, ts)
        if key not in merged:
            merged[key] = [len(merged), set()]
        merged[key][1].update(tags)
    return merged


def parse_posts(path, format: str = FORMAT_TAS) -> Dataset:
    """Read a tab-separated post log.

    Parameters
    ----------
    path : str or Path
        UTF-8 file with lines ``user \\t resource \\t timestamp \\t tags``.
    format : {"tas", "posts"}
        ``"tas"`` holds one tag per line; ``"posts"`` packs the tags of a
        post comma-separated into the last column.

    Returns
    -------
    Dataset
        One post per ``(user, resource)`` pair, keeping the earliest
        timestamp. Post ids follow first appearance in the file.
    """
    if format not in FORMATS:
        raise ValueError(f"unknown format {format!r}, expected one of {FORMATS}")
    with open(path, encoding="utf-8") as f:
        merged = _parse_lines(f, format)
    if not merged:
        raise ValueError("empty dataset")

    earliest: dict[tuple[str, str], tuple] = {}
    for (user, resource, ts), (order, tags) in merged.items():
        key = (user, resource)
        cand = (ts, order, tags)
        if key not in earliest or cand[:2] < earliest[key][:2]:
            earliest[key] = cand
    ordered = sorted(earliest.items(), key=lambda kv: kv[1][1])
    posts = [
        Post(user, resource, frozenset(tags), ts, pid)
        for pid, ((user, resource), (ts, _, tags)) in enumerate(ordered)
    ]
    ds = Dataset(posts)
    _log.info("parsed %s: %r", path, ds)
    return ds


def write_posts(ds: Dataset, path) -> None:
    """Write the canonical one-tag-per-line TSV, sorted by (user, timestamp, resource)."""
    posts = sorted(ds.posts, key=lambda p: (p.user_id, p.timestamp, p.resource_id))
    with open(path, "w", encoding="utf-8") as f:
        for p in posts:
            for tag in sorted(p.tags):
                f.write(f"{p.user_id}\t{p.resource_id}\t{p.timestamp}\t{tag}\n")


def filter_unique_resources(ds: Dataset) -> Dataset:
    """Drop resources bookmarked by fewer than two distinct users.

    Users left without posts disappear with them, since the indices are
    rebuilt from the surviving posts.
    """
    keep = {r for r, ps in ds.resources.items() if len({p.user_id for p in ps}) >= 2}
    return ds.subset(lambda p: p.resource_id in keep)


def sample_users(ds: Dataset, fraction: float, seed: int) -> Dataset:
    """Keep ``ceil(fraction * |U|)`` users drawn uniformly without replacement."""
    if not 0 < fraction <= 1:
        raise ValueError(f"fraction must be in (0, 1], got {fraction}")
    users = list(ds.users)
    n_keep = _ceil(fraction * len(users))
    if n_keep >= len(users):
        return ds
    rng = np.random.default_rng(seed)
    picked = rng.choice(len(users), size=n_keep, replace=False)
    keep = {users[i] for i in picked}
    return ds.subset(lambda p: p.user_id in keep)


def chronological_split(ds: Dataset, test_fraction: float = 0.2) -> SplitDataset:
    """Hold out each user's most recent posts.

    A user with ``n >= 2`` posts contributes ``ceil(test_fraction * n)`` of
    them to the test set; single-post users stay entirely in training.
    """
    if not 0 < test_fraction < 1:
        raise ValueError(f"test_fraction must be in (0, 1), got {test_fraction}")
    test_ids = set()
    for posts in ds.users.values():
        n = len(posts)
        if n < 2:
            continue
        n_test = min(max(1, _ceil(test_fraction * n)), n - 1)
        test_ids.update(p.post_id for p in posts[n - n_test:])
    train = ds.subset(lambda p: p.post_id not in test_ids)
    test = ds.subset(lambda p: p.post_id in test_ids)
    return SplitDataset(train, test)

