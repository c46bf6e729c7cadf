from __future__ import annotations

import math
from datetime import timedelta, timezone

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import T0
from greenconstraints import kb as kbase
from greenconstraints.estimation import CarbonProfile, CarbonSource, EnergyProfile
from greenconstraints.kb import ConstraintRecord, KnowledgeBase, KnowledgeBaseError, Stats
from greenconstraints.model import AFFINITY, AVOID_NODE, Constraint

T1 = T0 + timedelta(hours=1)


def C(target, em=100.0, kind=AVOID_NODE):
    return Constraint(kind, "svc", "f", target, em=em)


def test_merge_inserts_then_weights_by_count():
    kb = kbase.merge_observations(KnowledgeBase(), {("s", "f"): EnergyProfile(200, 100, 300, 3)}, {}, {}, T0)
    assert kb.sk[("s", "f")] == Stats(300, 100, 200, 3, T0)
    kb = kbase.merge_observations(kb, {("s", "f"): EnergyProfile(400, 400, 400, 1)}, {}, {}, T1)
    s = kb.sk[("s", "f")]
    assert (s.max, s.min, s.avg, s.count, s.t) == (400, 100, 250, 4, T1)


def test_merge_identical_is_idempotent_on_extremes_and_avg():
    p = {("s", "f"): EnergyProfile(1981.6, 1900.3, 2050.1, 24)}
    kb = kbase.merge_observations(KnowledgeBase(), p, {}, {}, T0)
    again = kbase.merge_observations(kb, p, {}, {}, T1)
    a, b = kb.sk[("s", "f")], again.sk[("s", "f")]
    assert (a.max, a.min, a.avg) == (b.max, b.min, b.avg)


def test_merge_links_and_nodes():
    cp = CarbonProfile(335, 300, 370, timedelta(hours=24), CarbonSource.MEASURED, 24)
    kb = kbase.merge_observations(KnowledgeBase(), {}, {("a", "f", "b"): EnergyProfile(2, 1, 3, 2)}, {"italy": cp}, T0)
    assert kb.ik[("a", "f", "b")].avg == 2
    assert kb.nk["italy"] == Stats(370, 300, 335, 24, T0)


def test_upsert_decay_reset_and_drop():
    kb = kbase.upsert_constraints(KnowledgeBase(), [C("a"), C("b")], T0)
    assert kb.iteration == 1 and {r.mu for r in kb.ck.values()} == {1.0}
    kb = kbase.upsert_constraints(kb, [C("a", em=150.0)], T1)
    assert kb.ck[(AVOID_NODE, "svc", "f", "a")] == ConstraintRecord(150.0, 1.0, T1)
    assert kb.ck[(AVOID_NODE, "svc", "f", "b")].mu == 0.8
    kb = kbase.upsert_constraints(kb, [C("b")], T1)
    assert kb.ck[(AVOID_NODE, "svc", "f", "b")].mu == 1.0
    for i in range(4):
        kb = kbase.upsert_constraints(kb, [], T1)
        assert (AVOID_NODE, "svc", "f", "b") in kb.ck, f"dropped too early after {i + 1} misses"
    kb = kbase.upsert_constraints(kb, [], T1)
    assert 0.8 ** 5 < 0.4
    assert (AVOID_NODE, "svc", "f", "b") not in kb.ck
    assert kb.iteration == 8


def test_valid_constraints_boundary():
    kb = KnowledgeBase(ck={
        (AVOID_NODE, "s", "f", "n"): ConstraintRecord(10.0, 0.41, T0),
        (AFFINITY, "s", "f", "z"): ConstraintRecord(5.0, 0.39, T0),
    })
    out = kbase.valid_constraints(kb, 0.4)
    assert [(c.target, c.mu, c.em) for c in out] == [("n", 0.41, 10.0)]
    assert kbase.valid_constraints(KnowledgeBase()) == []


def test_load_missing_dir_is_empty(tmp_path):
    kb = kbase.load(tmp_path / "nowhere")
    assert kb == KnowledgeBase() and kb.iteration == 0


def test_corrupt_file_is_named(tmp_path):
    kbase.persist(kbase.upsert_constraints(KnowledgeBase(), [C("a")], T0), tmp_path)
    (tmp_path / "ck.json").write_text("{not json")
    with pytest.raises(KnowledgeBaseError, match="ck.json"):
        kbase.load(tmp_path)
    (tmp_path / "ck.json").write_text('[{"kind": "avoidNode"}]')
    with pytest.raises(KnowledgeBaseError, match="ck.json"):
        kbase.load(tmp_path)
    (tmp_path / "ck.json").write_text("[]")
    (tmp_path / "meta.json").write_text('{"format": "other/9"}')
    with pytest.raises(KnowledgeBaseError, match="meta.json"):
        kbase.load(tmp_path)


def test_persist_overwrites_and_reset(tmp_path):
    kb1 = kbase.upsert_constraints(KnowledgeBase(), [C("a")], T0)
    kb2 = kbase.upsert_constraints(kb1, [C("b")], T1)
    kbase.persist(kb1, tmp_path)
    kbase.persist(kb2, tmp_path)
    assert kbase.load(tmp_path) == kb2
    assert not list(tmp_path.glob("*.tmp"))
    kbase.reset(tmp_path)
    assert kbase.load(tmp_path) == KnowledgeBase()


# -- properties -------------------------------------------------------------------

ident = st.text("abcxyz_-", min_size=1, max_size=6)
num = st.floats(min_value=0, max_value=1e9, allow_nan=False)
times = st.datetimes(timezones=st.just(timezone.utc))


@st.composite
def stats(draw):
    a, b, c = sorted(draw(st.tuples(num, num, num)))
    return Stats(c, a, b, draw(st.integers(1, 10_000)), draw(times))


@st.composite
def knowledge_bases(draw):
    return KnowledgeBase(
        sk=draw(st.dictionaries(st.tuples(ident, ident), stats(), max_size=4)),
        ik=draw(st.dictionaries(st.tuples(ident, ident, ident), stats(), max_size=4)),
        nk=draw(st.dictionaries(ident, stats(), max_size=4)),
        ck=draw(st.dictionaries(
            st.tuples(st.sampled_from([AVOID_NODE, AFFINITY]), ident, ident, ident),
            st.builds(ConstraintRecord, num, st.floats(min_value=0.4, max_value=1.0), times),
            max_size=6,
        )),
        iteration=draw(st.integers(0, 10_000)),
        config=draw(st.dictionaries(ident, num, max_size=3)),
    )


@given(knowledge_bases())
def test_persistence_round_trip(tmp_path_factory, kb):
    d = tmp_path_factory.mktemp("kb")
    kbase.persist(kb, d)
    assert kbase.load(d) == kb


@st.composite
def profile(draw):
    a, b, c = sorted(draw(st.tuples(num, num, num)))
    return EnergyProfile(b, a, c, draw(st.integers(1, 100)))


@given(st.lists(profile(), min_size=1, max_size=8))
def test_extremes_are_monotone(profiles):
    kb = KnowledgeBase()
    prev = None
    for i, p in enumerate(profiles):
        kb = kbase.merge_observations(kb, {("s", "f"): p}, {}, {}, T0 + timedelta(hours=i))
        s = kb.sk[("s", "f")]
        assert s.min <= s.avg <= s.max
        if prev is not None:
            assert s.max >= prev.max and s.min <= prev.min and s.t >= prev.t
        prev = s
    assert prev.count == sum(p.count for p in profiles)
    exact = math.fsum(p.avg * p.count for p in profiles) / prev.count
    assert prev.avg == pytest.approx(exact, rel=1e-9, abs=1e-9)


@given(st.lists(st.sets(st.sampled_from("abcdef")), min_size=1, max_size=12),
       st.floats(min_value=0.5, max_value=0.95))
def test_mu_decays_and_resets(rounds, delta):
    kb = KnowledgeBase()
    for i, fresh in enumerate(rounds):
        before = dict(kb.ck)
        kb = kbase.upsert_constraints(kb, [C(t) for t in fresh], T0 + timedelta(hours=i), delta, 0.4)
        for key, rec in kb.ck.items():
            assert rec.mu >= 0.4
            if key[3] in fresh:
                assert rec.mu == 1.0
            else:
                assert rec.mu == delta * before[key].mu
                assert rec.mu < before[key].mu
        assert kb.iteration == i + 1
