import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sustainrec.corpus import (
    FORMAT_POSTS,
    chronological_split,
    filter_unique_resources,
    parse_posts,
    sample_users,
    write_posts,
)
from sustainrec.synthetic import generate_posts

from conftest import make_posts


def test_parse_counts(write_tsv):
    path = write_tsv(["a\tx\t1\tfoo", "a\ty\t2\tbar", "b\tx\t3\tfoo"])
    ds = parse_posts(path)
    assert (ds.n_posts, ds.n_users, ds.n_resources) == (3, 2, 2)
    assert ds.n_tags == 2
    assert ds.n_tas == 3


def test_parse_merges_tag_lines(write_tsv):
    path = write_tsv(["a\tx\t1\tfoo", "a\tx\t1\tbar", "a\tx\t1\tfoo"])
    ds = parse_posts(path)
    assert ds.n_posts == 1
    assert ds.posts[0].tags == {"foo", "bar"}
    assert ds.n_tas == 2


def test_parse_dedup_keeps_earliest(write_tsv):
    path = write_tsv(["a\tx\t9\tlate", "a\tx\t5\tearly"])
    ds = parse_posts(path)
    assert ds.n_posts == 1
    assert ds.posts[0].timestamp == 5
    assert ds.posts[0].tags == {"early"}


def test_parse_comma_layout(write_tsv):
    path = write_tsv(["a\tx\t1\tfoo,bar", "b\tx\t2\tbaz"])
    ds = parse_posts(path, FORMAT_POSTS)
    assert ds.n_tas == 3
    assert ds.users["a"][0].tags == {"foo", "bar"}


@pytest.mark.parametrize("bad, lineno", [
    (["a\tx\t1\tfoo", "a\tx\tfoo"], 2),
    (["a\tx\tnoon\tfoo"], 1),
    (["a\tx\t1\tfoo", "", "a\tx\t1\t"], 3),
])
def test_parse_malformed_names_line(write_tsv, bad, lineno):
    with pytest.raises(ValueError, match=f"line {lineno}"):
        parse_posts(write_tsv(bad))


def test_parse_empty(write_tsv):
    with pytest.raises(ValueError, match="empty dataset"):
        parse_posts(write_tsv([]))


def test_parse_unknown_format(write_tsv):
    with pytest.raises(ValueError):
        parse_posts(write_tsv(["a\tx\t1\tfoo"]), "xml")


def test_roundtrip_counts(tmp_path):
    ds = generate_posts(n_users=20, seed=3)
    path = tmp_path / "canon.tsv"
    write_posts(ds, path)
    again = parse_posts(path)
    assert again.stats() == ds.stats()
    path2 = tmp_path / "canon2.tsv"
    write_posts(again, path2)
    assert path.read_text() == path2.read_text()


def test_tas_identity():
    ds = generate_posts(n_users=15, seed=1)
    assert ds.n_tas == sum(len(p.tags) for p in ds.posts)


def test_filter_unique_small():
    ds = make_posts([("a", "x", 1), ("b", "x", 2), ("a", "y", 3)])
    out = filter_unique_resources(ds)
    assert set(out.resources) == {"x"}
    assert out.n_posts == 2


def test_filter_unique_all_singletons():
    ds = make_posts([("a", "x", 1), ("b", "y", 2)])
    out = filter_unique_resources(ds)
    assert out.n_posts == 0
    assert out.n_users == 0


def test_filter_unique_drops_emptied_users():
    ds = make_posts([("a", "x", 1), ("b", "x", 2), ("c", "y", 3)])
    assert set(filter_unique_resources(ds).users) == {"a", "b"}


def _brute_filter(posts):
    owners = {}
    for p in posts:
        owners.setdefault(p.resource_id, set()).add(p.user_id)
    return sorted(p.post_id for p in posts if len(owners[p.resource_id]) >= 2)


def test_filter_unique_matches_brute_force():
    rng = np.random.default_rng(7)
    rows = [(f"u{rng.integers(25)}", f"r{rng.integers(60)}", int(rng.integers(1000))) for _ in range(200)]
    # keep (user, resource) unique as the parser would
    seen, uniq = set(), []
    for r in rows:
        if r[:2] not in seen:
            seen.add(r[:2])
            uniq.append(r)
    ds = make_posts(uniq)
    out = filter_unique_resources(ds)
    assert [p.post_id for p in out.posts] == _brute_filter(ds.posts)


def test_filter_unique_idempotent():
    ds = generate_posts(n_users=30, seed=5)
    once = filter_unique_resources(ds)
    assert filter_unique_resources(once) == once


def test_sample_full_fraction():
    ds = generate_posts(n_users=10, seed=0)
    assert sample_users(ds, 1.0, seed=1) == ds


def test_sample_count_and_determinism():
    ds = make_posts([(f"u{i}", "x", i) for i in range(10)])
    a = sample_users(ds, 0.2, seed=42)
    b = sample_users(ds, 0.2, seed=42)
    assert a.n_users == 2
    assert set(a.users) == set(b.users)


def test_sample_ceil_rounding():
    ds = make_posts([(f"u{i}", "x", i) for i in range(15)])
    # 0.2 * 15 is 3.0000000000000004 in floating point
    assert sample_users(ds, 0.2, seed=0).n_users == 3
    assert sample_users(ds, 0.1, seed=0).n_users == 2


def test_sample_keeps_all_posts_of_chosen_users():
    ds = generate_posts(n_users=20, seed=2)
    out = sample_users(ds, 0.5, seed=3)
    for u in out.users:
        assert out.users[u] == ds.users[u]


def test_sample_rejects_bad_fraction():
    ds = make_posts([("a", "x", 1)])
    with pytest.raises(ValueError):
        sample_users(ds, 0.0, seed=0)


def test_split_five_posts():
    ds = make_posts([("a", f"r{i}", 10 * i) for i in range(5)])
    sp = chronological_split(ds, 0.2)
    assert [p.resource_id for p in sp.test.posts] == ["r4"]
    assert sp.train.n_posts == 4


def test_split_single_post_user():
    ds = make_posts([("a", "x", 1), ("b", "x", 2), ("b", "y", 3)])
    sp = chronological_split(ds, 0.2)
    assert [p.resource_id for p in sp.train.users["a"]] == ["x"]
    assert "a" not in sp.test.users
    assert sp.evaluable_users() == ["b"]


def test_split_ties_broken_by_post_id():
    ds = make_posts([("a", "x", 5), ("a", "y", 5), ("a", "z", 1)])
    sp = chronological_split(ds, 0.2)
    assert [p.resource_id for p in sp.test.posts] == ["y"]


def test_split_temporal_order_independent_scan():
    ds = generate_posts(n_users=50, seed=11)
    sp = chronological_split(ds, 0.2)
    for user, test_posts in sp.test.users.items():
        train_posts = sp.train.users[user]
        assert min((p.timestamp, p.post_id) for p in test_posts) > max(
            (p.timestamp, p.post_id) for p in train_posts)
        n = len(train_posts) + len(test_posts)
        assert len(test_posts) == max(1, -(-n // 5))


def test_split_partition():
    ds = generate_posts(n_users=40, seed=4)
    sp = chronological_split(ds, 0.2)
    train_ids = {p.post_id for p in sp.train.posts}
    test_ids = {p.post_id for p in sp.test.posts}
    assert not train_ids & test_ids
    assert train_ids | test_ids == {p.post_id for p in ds.posts}


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 6), st.integers(0, 12), st.integers(0, 50)), min_size=1, max_size=60),
       st.floats(0.05, 0.95))
def test_split_properties(rows, fraction):
    seen, uniq = set(), []
    for u, r, t in rows:
        if (u, r) not in seen:
            seen.add((u, r))
            uniq.append((f"u{u}", f"r{r}", t))
    ds = make_posts(uniq)
    sp = chronological_split(ds, fraction)
    assert sp.train.n_posts + sp.test.n_posts == ds.n_posts
    for user, posts in ds.users.items():
        test = sp.test.users.get(user, ())
        if len(posts) == 1:
            assert not test
        else:
            assert 1 <= len(test) < len(posts)
