from __future__ import annotations

import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from conftest import make_app, make_infra
from greenconstraints.engine import (
    Candidate,
    ConstraintKind,
    GeneratorConfig,
    NoCandidatesError,
    affinity_impact,
    avoid_node_impact,
    compute_threshold,
    evaluate_candidates,
    generate,
    get_kind,
    placement_compatible,
    register_kind,
    registered_kinds,
    select,
    unregister_kind,
)
from greenconstraints.model import AFFINITY, AVOID_NODE, CommunicationLink, Flavour, Node, Placement, Service


def test_threshold_on_one_to_ten():
    values = [float(v) for v in range(1, 11)]
    assert compute_threshold(values, 0.8) == 8.0
    cands = [Candidate(AVOID_NODE, f"s{int(v)}", "f", "n", v) for v in values]
    tau, chosen = select(cands, 0.8)
    assert tau == 8.0
    assert [c.impact for c in chosen] == [9.0, 10.0]


def test_threshold_with_ties_and_singletons():
    assert compute_threshold([5.0, 5.0, 5.0, 5.0], 0.8) == 5.0
    assert compute_threshold([7.0], 0.5) == 7.0
    with pytest.raises(NoCandidatesError):
        compute_threshold([], 0.8)


def test_generator_config_validation():
    for bad in (0.0, 1.0, -0.1, 1.5):
        with pytest.raises(ValueError):
            GeneratorConfig(bad)


def test_placement_rule():
    pub = Service("s", (), placement=Placement.PUBLIC)
    priv = Service("p", (), placement=Placement.PRIVATE)
    pub_node = Node("a", {"subnet": "Public"})
    priv_node = Node("b", {"subnet": "Private"})
    assert placement_compatible(pub, pub_node) and placement_compatible(pub, priv_node)
    assert placement_compatible(priv, priv_node) and not placement_compatible(priv, pub_node)


def test_impacts():
    assert avoid_node_impact(Flavour("f", energy=100.0), Node("n", carbon=335.0)) == 33500.0
    assert avoid_node_impact(Flavour("f"), Node("n", carbon=1.0)) is None
    infra = make_infra({"a": 100.0, "b": 300.0})
    assert affinity_impact(CommunicationLink("x", "f", "y", energy=2.0), infra) == 400.0
    assert affinity_impact(CommunicationLink("x", "f", "y"), infra) is None


def test_private_services_only_evaluated_on_private_nodes():
    app = make_app({"db": {"f": 10.0}, "web": {"f": 10.0}}, private={"db"})
    infra = make_infra({"cloud": 100.0, "edge": 50.0}, private={"edge"})
    pairs = {(c.service, c.target) for c in evaluate_candidates(app, infra)}
    assert pairs == {("db", "edge"), ("web", "cloud"), ("web", "edge")}


def test_affinity_candidates_dedupe_and_skip_unprofiled():
    app = make_app({"a": {"f": 1.0}, "b": {"f": 1.0}},
                   links=[("a", "f", "b", 5.0), ("a", "f", "b", 5.0), ("b", "f", "a", None)])
    infra = make_infra({"n": 10.0})
    aff = [c for c in evaluate_candidates(app, infra) if c.kind == AFFINITY]
    assert [(c.service, c.target, c.impact) for c in aff] == [("a", "b", 50.0)]


def test_generate_sorted_and_error_on_empty():
    app = make_app({"a": {"x": 10.0, "y": 1.0}, "b": {"x": 20.0}})
    infra = make_infra({"n1": 100.0, "n2": 10.0, "n3": 300.0})
    out = generate(app, infra, GeneratorConfig(0.5))
    assert out == sorted(out, key=lambda c: c.identity)
    assert all(c.mu == 1.0 and c.weight is None for c in out)
    with pytest.raises(NoCandidatesError):
        generate(make_app({"a": {"x": None}}), infra)


def test_custom_kind_joins_the_pool():
    def evaluate(app, infra, kernels):
        return [Candidate("migrate", "a", "x", "n1", 1e9)]

    register_kind(ConstraintKind("migrate", evaluate, lambda c: "test", None, "Migrate"))
    try:
        assert get_kind("migrate").label == "Migrate"
        out = generate(make_app({"a": {"x": 1.0}}), make_infra({"n1": 1.0, "n2": 2.0}), GeneratorConfig(0.5))
        assert ("migrate", "a", "x", "n1") in {c.identity for c in out}
        with pytest.raises(ValueError):
            register_kind(ConstraintKind("migrate", evaluate, lambda c: "", None, "Dup"))
    finally:
        unregister_kind("migrate")
    assert [k.name for k in registered_kinds()] == [AVOID_NODE, AFFINITY]


@st.composite
def small_instance(draw):
    ns = draw(st.integers(1, 6))
    nn = draw(st.integers(1, 5))
    energy = st.floats(min_value=0.1, max_value=3000)
    services = {
        f"s{i}": {f"f{j}": draw(energy) for j in range(draw(st.integers(1, 3)))} for i in range(ns)
    }
    links = []
    if ns > 1:
        for _ in range(draw(st.integers(0, 4))):
            a, b = draw(st.sampled_from([(x, y) for x in range(ns) for y in range(ns) if x != y]))
            links.append((f"s{a}", "f0", f"s{b}", draw(st.floats(min_value=0.01, max_value=500))))
    cis = {f"n{j}": draw(st.floats(min_value=1, max_value=700)) for j in range(nn)}
    return make_app(services, links), make_infra(cis)


@given(small_instance(), st.floats(min_value=0.05, max_value=0.95))
def test_generate_matches_sort_and_cut(instance, alpha):
    app, infra = instance
    cands = evaluate_candidates(app, infra)
    out = generate(app, infra, GeneratorConfig(alpha))
    assert len(out) == oracles.sort_and_cut([c.impact for c in cands], alpha)


@given(small_instance(), st.floats(min_value=0.05, max_value=0.95), st.randoms(use_true_random=False))
def test_generate_ignores_declaration_order(instance, alpha, rnd):
    app, infra = instance
    shuffled_nodes = list(infra.nodes)
    rnd.shuffle(shuffled_nodes)
    shuffled_services = list(app.services)
    rnd.shuffle(shuffled_services)
    a = generate(app, infra, GeneratorConfig(alpha))
    b = generate(
        type(app)(app.name, tuple(shuffled_services), app.links),
        type(infra)(tuple(shuffled_nodes)),
        GeneratorConfig(alpha),
    )
    assert a == b
