import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sustainrec.baselines import cb_topic_scores, most_popular, user_topic_profile
from sustainrec.topics import TopicTable

from conftest import make_posts


def test_mp_frequencies():
    ds = make_posts([("a", "x", 1), ("b", "x", 2), ("c", "x", 3), ("a", "y", 4)])
    assert most_popular(ds) == [("x", 3.0), ("y", 1.0)]


def test_mp_ties_by_id():
    ds = make_posts([("a", "z", 1), ("a", "x", 2), ("a", "y", 3)])
    assert [r for r, _ in most_popular(ds)] == ["x", "y", "z"]


def test_mp_matches_count():
    rng = np.random.default_rng(0)
    rows = [(f"u{rng.integers(20)}", f"r{rng.integers(30)}", i) for i in range(300)]
    ds = make_posts(rows)
    counts = Counter(p.resource_id for p in ds.posts)
    expected = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))[:10]
    assert most_popular(ds, 10) == [(r, float(c)) for r, c in expected]


def table(rows):
    ids = sorted(rows)
    return TopicTable(ids, np.array([rows[r] for r in ids], dtype=float))


def test_cb_equal_and_disjoint():
    t = table({"a": [0.5, 0.5, 0], "b": [0, 0, 1.0], "c": [0.9, 0.1, 0]})
    got = cb_topic_scores([0.5, 0.5, 0], t)
    assert got[0] == ("a", pytest.approx(1.0))
    assert dict(got)["b"] == 0.0


def test_cb_zero_profile():
    t = table({"a": [1.0, 0.0]})
    assert cb_topic_scores([0.0, 0.0], t) == []


def test_cb_excludes_owned():
    t = table({"a": [1.0, 0.0], "b": [0.0, 1.0]})
    assert [r for r, _ in cb_topic_scores([1, 0], t, owned={"a"})] == ["b"]


def test_cb_matches_brute_force():
    rng = np.random.default_rng(1)
    rows = {f"r{i:02d}": rng.dirichlet(np.full(6, 0.3)) * (rng.random(6) > 0.3) for i in range(20)}
    t = table(rows)
    profile = rng.dirichlet(np.ones(6))

    def cos(a, b):
        na, nb = math.sqrt(sum(x * x for x in a)), math.sqrt(sum(x * x for x in b))
        return 0.0 if na == 0 or nb == 0 else sum(x * y for x, y in zip(a, b)) / (na * nb)

    expected = sorted(((r, cos(profile.tolist(), v.tolist())) for r, v in rows.items()),
                      key=lambda kv: (-kv[1], kv[0]))[:10]
    got = cb_topic_scores(profile, t, 10)
    assert [r for r, _ in got] == [r for r, _ in expected]
    np.testing.assert_allclose([s for _, s in got], [s for _, s in expected], atol=1e-12)


def test_profile_is_mean():
    t = table({"x": [1.0, 0.0], "y": [0.0, 1.0]})
    ds = make_posts([("a", "x", 1), ("a", "y", 2)])
    assert user_topic_profile(ds, "a", t).tolist() == [0.5, 0.5]
    with pytest.raises(ValueError):
        user_topic_profile(ds, "nobody", t)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000), st.floats(0.01, 100))
def test_cb_scale_invariant_and_bounded(seed, scale):
    rng = np.random.default_rng(seed)
    rows = {f"r{i:02d}": rng.random(5) * (rng.random(5) > 0.4) for i in range(15)}
    t = table(rows)
    profile = rng.random(5) + 0.01
    a = cb_topic_scores(profile, t)
    b = cb_topic_scores(profile * scale, t)
    assert all(0.0 <= s <= 1.0 + 1e-12 for _, s in a)
    np.testing.assert_allclose([s for _, s in a], [s for _, s in b], atol=1e-12)
    # orders agree up to floating ties
    sa, sb = dict(a), dict(b)
    for (r1, _), (r2, _) in zip(a, b):
        assert r1 == r2 or abs(sa[r1] - sb[r2]) < 1e-12
