from __future__ import annotations

import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

import oracles
from greenconstraints.model import AVOID_NODE, Constraint
from greenconstraints.ranker import RankerConfig, max_em, rank


def C(service, target, em, mu=1.0):
    return Constraint(AVOID_NODE, service, "f", target, em=em, mu=mu)


def weights(ranked):
    return {c.identity: c.weight for c in ranked}


def test_examples():
    out = rank([C("a", "x", 1000.0), C("b", "y", 500.0)])
    assert [c.weight for c in out] == [1.0, 0.5]
    # below F: 50/1000 * 0.75 = 0.0375 < 0.1, dropped
    assert len(rank([C("a", "x", 1000.0), C("b", "y", 50.0)])) == 1
    # below F but kept: 80/100 * 0.75
    out = rank([C("a", "x", 100.0), C("b", "y", 80.0)])
    assert out[1].weight == pytest.approx(0.6)
    # memory scales the weight
    out = rank([C("a", "x", 1000.0), C("b", "y", 1000.0, mu=0.8)])
    assert [c.weight for c in out] == [1.0, 0.8]
    assert rank([]) == []
    with pytest.raises(ValueError):
        max_em([])


def test_ties_broken_by_identity():
    out = rank([C("b", "x", 10.0), C("a", "y", 10.0), C("a", "x", 10.0)], RankerConfig(min_impact=0))
    assert [(c.service, c.target) for c in out] == [("a", "x"), ("a", "y"), ("b", "x")]


def test_all_zero_impacts_drop_everything():
    assert rank([C("a", "x", 0.0)]) == []


def test_config_validation():
    for kw in ({"min_impact": -1}, {"lambda_low": 0}, {"lambda_low": 1.5}, {"drop_weight": 1.0}):
        with pytest.raises(ValueError):
            RankerConfig(**kw)


ems = st.floats(min_value=0, max_value=1e7)
mus = st.floats(min_value=0.4, max_value=1.0)


@st.composite
def constraint_sets(draw):
    n = draw(st.integers(1, 30))
    return [C(f"s{i % 5}", f"n{i}", draw(ems), draw(mus)) for i in range(n)]


@given(constraint_sets())
def test_matches_oracle(cs):
    got = weights(rank(cs))
    want = oracles.ranked_weights([(c.identity, c.em, c.mu) for c in cs])
    assert got.keys() == want.keys()
    for k in got:
        assert got[k] == pytest.approx(want[k], rel=1e-9)
    out = rank(cs)
    assert all(0.1 <= c.weight <= 1.0 for c in out)
    assert [c.weight for c in out] == sorted((c.weight for c in out), reverse=True)


@given(constraint_sets(), st.sampled_from([0.25, 0.5, 2.0, 8.0]))
def test_order_is_scale_invariant(cs, c):
    cfg = RankerConfig(min_impact=100.0)
    scaled = [C(x.service, x.target, x.em * c, x.mu) for x in cs]
    a = rank(cs, cfg)
    b = rank(scaled, RankerConfig(min_impact=100.0 * c))
    assert [x.identity for x in a] == [x.identity for x in b]
    assert [x.weight for x in a] == pytest.approx([x.weight for x in b], rel=1e-12)


@given(st.floats(min_value=100, max_value=5000), st.floats(min_value=1, max_value=700),
       st.floats(min_value=1, max_value=700), st.floats(min_value=1, max_value=700))
def test_same_service_weight_ratio_is_ci_ratio(energy, ci1, ci2, ci_top):
    # with both impacts above F the attenuation never applies
    assume(energy * min(ci1, ci2) >= 100)
    cs = [C("a", "n1", energy * ci1), C("a", "n2", energy * ci2), C("z", "top", 5000 * 700.0)]
    w = weights(rank(cs, RankerConfig(drop_weight=0.0)))
    w1, w2 = w[(AVOID_NODE, "a", "f", "n1")], w[(AVOID_NODE, "a", "f", "n2")]
    assert w1 / w2 == pytest.approx(ci1 / ci2, rel=1e-9)
