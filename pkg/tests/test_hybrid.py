import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import sparse

from sustainrec.hybrid import HybridConfig, blend, normalize_scores, recommend, sustain_scores
from sustainrec.neighbors import InteractionMatrix, cf_user_scores
from sustainrec.ranking import top_n
from sustainrec.sustain import UserNetwork, train_user
from sustainrec.topics import TopicTable


def order(scored):
    return [r for r, _ in scored]


def test_normalize_examples():
    assert normalize_scores([("a", 2.0), ("b", 4.0), ("c", 6.0)]) == [("a", 0.0), ("b", 0.5), ("c", 1.0)]
    assert normalize_scores([("a", 3.0), ("b", 3.0)]) == [("a", 1.0), ("b", 1.0)]
    assert normalize_scores([]) == []


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-1e3, 1e3), min_size=1, max_size=30, unique=True))
def test_normalize_preserves_order(vals):
    scored = top_n({f"r{i:02d}": v for i, v in enumerate(vals)})
    out = normalize_scores(scored)
    assert order(out) == order(scored)
    assert all(0.0 <= s <= 1.0 for _, s in out)
    assert [s for _, s in out] == sorted((s for _, s in out), reverse=True)


def test_two_candidate_tie():
    got = blend([("b", 1.0), ("a", 0.0)], [("a", 1.0), ("b", 0.0)], 0.5, 2)
    assert got == [("a", 0.5), ("b", 0.5)]


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000), st.floats(0, 1))
def test_blend_linearity(seed, alpha):
    rng = np.random.default_rng(seed)
    ids = [f"r{i:02d}" for i in range(15)]
    sus = list(zip(ids, rng.random(15)))
    cf = top_n(dict(zip(ids, rng.random(15) * 5)))
    got = dict(blend(sus, cf, alpha, None))
    a, b = dict(normalize_scores(sus)), dict(normalize_scores(cf))
    lo_a, hi_a = min(s for _, s in sus), max(s for _, s in sus)
    for rid in ids:
        assert a[rid] == pytest.approx((dict(sus)[rid] - lo_a) / (hi_a - lo_a), abs=1e-12)
        assert got[rid] == pytest.approx(alpha * a[rid] + (1 - alpha) * b[rid], abs=1e-12)


def test_unnormalized_blend_uses_raw_scores():
    got = blend([("a", 0.9), ("b", 0.1)], [("a", 1.0), ("b", 3.0)], 0.5, None, normalize=False)
    assert got == [("b", pytest.approx(1.55)), ("a", pytest.approx(0.95))]


def test_config_validated():
    with pytest.raises(ValueError):
        HybridConfig(alpha=1.5)
    with pytest.raises(ValueError):
        HybridConfig(candidate_count=10, k=20)


def random_world(seed, n_users=25, n_res=60, n_topics=8):
    rng = np.random.default_rng(seed)
    dense = (rng.random((n_users, n_res)) < 0.15).astype(float)
    users = [f"u{i:02d}" for i in range(n_users)]
    res = [f"r{j:02d}" for j in range(n_res)]
    m = InteractionMatrix(users, res, sparse.csr_matrix(dense))
    topics = TopicTable(res, rng.dirichlet(np.full(n_topics, 0.3), size=n_res))
    return m, topics


def network_for(m, topics, user):
    owned = sorted(m.owned(user))
    return train_user(topics.vectors(owned)) if owned else None


def test_output_is_subset_of_candidates():
    m, topics = random_world(0)
    cfg = HybridConfig(k=5, candidate_count=12)
    for user in m.user_ids:
        net = network_for(m, topics, user)
        if net is None:
            continue
        cands = cf_user_scores(m, user, cfg.neighbors, cfg.candidate_count)
        got = recommend(user, net, m, topics, cfg)
        assert set(order(got)) <= set(order(cands))
        assert len(got) == min(cfg.k, len(cands))
        assert recommend(user, net, m, topics, cfg) == got


def test_alpha_extremes_reduce_to_components():
    m, topics = random_world(1)
    for user in m.user_ids:
        net = network_for(m, topics, user)
        if net is None:
            continue
        cands = cf_user_scores(m, user, 20, 100)
        sus = sustain_scores(net, order(cands), topics)
        cf_only = recommend(user, net, m, topics, HybridConfig(alpha=0.0, k=20))
        sus_only = recommend(user, net, m, topics, HybridConfig(alpha=1.0, k=20))
        assert order(cf_only) == order(top_n(normalize_scores(cands), 20))
        assert order(sus_only) == order(top_n(sus, 20))


def test_untrained_network_rejected():
    m, topics = random_world(2)
    with pytest.raises(ValueError):
        recommend("u00", UserNetwork(np.ones(topics.n_topics)), m, topics)


def test_no_candidates_gives_empty():
    m = InteractionMatrix(["u", "v"], ["a"], sparse.csr_matrix([[1.0], [1.0]]))
    topics = TopicTable(["a"], np.array([[1.0, 0.0]]))
    net = train_user([[1.0, 0.0]])
    assert recommend("u", net, m, topics) == []
