"""Cost functions, candidate selection and plan construction."""

from __future__ import annotations

import math
from pathlib import Path

import pytest
from hypothesis import HealthCheck, given, settings

from dlquery.errors import UnsupportedConstruct
from dlquery.planner import (
    ZERO,
    CostPair,
    build_join_graph,
    candidate_templates,
    dynamic_cost,
    next_template,
    replay,
    sampled_cost,
    static_cost,
    static_plan,
)
from dlquery.query import IDENTITY, Query, bind, connected_components, is_simple, parse_query
from dlquery.reasoner import Reasoner
from dlquery.stats import Clusters, StatsStore, build_stats, clusters_from_stats, read_snapshot
from dlquery.syntax import CVar, IVar, variables
from strategies import ontologies, queries

DATA = Path(__file__).resolve().parent.parent / "data"
PROPS = settings(max_examples=80, deadline=None, suppress_health_check=list(HealthCheck))
x, y = IVar("x"), IVar("y")


def one(text: str):
    (at,) = parse_query(text)
    return at


def snapshot(lines: list[str], n_individuals: int | None = None) -> StatsStore:
    head = ["param\tC_L\t1", "param\tC_E\t100", "param\tP_IS\t0.5"]
    if n_individuals is not None:
        head.append(f"n_individuals\t{n_individuals}")
    return read_snapshot("\n".join(head + lines) + "\n")


def table_stats() -> StatsStore:
    return read_snapshot((DATA / "table1.stats").read_text(encoding="utf-8"))


def example1_stats() -> StatsStore:
    return read_snapshot((DATA / "example1.stats").read_text(encoding="utf-8"))


def omega(var, values):
    return [bind(IDENTITY, {var: v}) for v in values]


# -- cost pairs -------------------------------------------------------------------


def test_cost_pair_arithmetic():
    c = CostPair(3, 1) + CostPair(2, 0.5)
    assert (c.ec, c.rs, c.total) == (5, 1.5, 6.5)
    assert c.scaled(2) == CostPair(10, 3)
    assert CostPair(4, 2).divided(2) == CostPair(2, 1)
    assert CostPair(4, 2).divided(0) == ZERO


@pytest.mark.parametrize("ec, rs", [(-1, 0), (0, math.inf), (math.nan, 1)])
def test_cost_pair_rejects_bad_components(ec, rs):
    with pytest.raises(ValueError):
        CostPair(ec, rs)


# -- join graph --------------------------------------------------------------------


def test_shared_variable_is_an_edge_label():
    g = build_join_graph(parse_query("ClassAssertion(A ?x) RoleAssertion(r ?x ?y)"))
    assert list(g.edge_labels.values()) == [frozenset({x})]


def test_unshared_templates_have_no_edges():
    assert not build_join_graph(parse_query("ClassAssertion(A ?x) ClassAssertion(B ?y)")).edges


# -- static costs ------------------------------------------------------------------


def test_unbound_role_atom():
    pairs = [f"role_known\tr\tk{i}\tl{i}" for i in range(200)] + [f"role_possible\tr\tp{i}\tq{i}" for i in range(200)]
    s = snapshot(pairs)
    assert static_cost(one("RoleAssertion(r ?x ?y)"), set(), s) == CostPair(200 * 1 + 200 * 100, 200 + 0.5 * 200)


def test_bound_concept_atom_is_normalized_by_individuals():
    lines = [f"concept_known\tC\tk{i}" for i in range(200)] + [f"concept_possible\tC\tp{i}" for i in range(350)]
    s = snapshot(lines, n_individuals=10_000)
    cost = static_cost(one("ClassAssertion(C ?x)"), {x}, s)
    assert cost.ec == pytest.approx((200 * 1 + 350 * 100) / 10_000)
    assert cost.rs == pytest.approx((200 + 350 * 0.5) / 10_000)


def test_empty_statistics_cost_nothing():
    s = snapshot(["concept\tA", "individual\ta"])
    assert static_cost(one("ClassAssertion(A ?x)"), set(), s) == ZERO


def test_ground_known_atom_uses_depth():
    s = snapshot(["sub\tB\tC", "concept_known\tB\ta", "depth\tC\t2", "depth\tB\t1"])
    assert static_cost(one("ClassAssertion(C a)"), set(), s) == CostPair(2 * 1, 1)


def test_ground_possible_and_non_instances():
    s = snapshot(["concept_possible\tC\ta", "individual\tb"])
    assert static_cost(one("ClassAssertion(C a)"), set(), s) == CostPair(100, 0.5)
    assert static_cost(one("ClassAssertion(C b)"), set(), s) == CostPair(1, 0)


def test_successor_form_uses_per_individual_sets():
    s = snapshot(["role_known\tr\ta\tb", "role_known\tr\ta\tc", "role_possible\tr\ta\td"])
    assert static_cost(one("RoleAssertion(r a ?y)"), set(), s) == CostPair(2 + 100, 2 + 0.5)


def test_inverse_role_is_unsupported():
    s = example1_stats()
    with pytest.raises(UnsupportedConstruct):
        static_cost(one("RoleAssertion(inv(r) ?x ?y)"), set(), s)


def test_fallback_for_complex_template():
    s = snapshot(["concept\tA", "concept\tB", "role\tr", "individual\ta"])
    at = one("SubClassOf(A some(r ?c))")
    assert static_cost(at, set(), s) == CostPair(2 * 100, 2)
    assert static_cost(at, {CVar("c")}, s) == CostPair(100, 1)


# -- dynamic and sampled costs --------------------------------------------------------


def test_dynamic_cost_of_the_worked_example():
    lines = [f"concept_known\tD\tk{i}" for i in range(50)]
    lines += [f"concept_possible\tD\tp{i}" for i in range(50)]
    lines += [f"individual\tn{i}" for i in range(150)]
    s = snapshot(lines)
    values = [f"k{i}" for i in range(50)] + [f"n{i}" for i in range(150)] + [f"p{i}" for i in range(50)]
    cost = dynamic_cost(one("ClassAssertion(D ?y)"), omega(y, values), s)
    assert cost == CostPair(50 * 1 + 150 * 1 + 50 * 100, 50 + 0 + 50 * 0.5)


def test_dynamic_cost_on_identity_is_static_cost():
    s = table_stats()
    at = one("RoleAssertion(r ?x ?y)")
    assert dynamic_cost(at, [IDENTITY], s) == static_cost(at, set(), s)


def test_dynamic_cost_of_no_solutions_is_zero():
    assert dynamic_cost(one("ClassAssertion(C ?x)"), [], example1_stats()) == ZERO


def test_sampled_cost_uses_one_representative_per_cluster():
    s = snapshot(["concept_possible\tC\ta", "concept_possible\tC\tb", "concept_possible\tC\tc", "concept_known\tC\td"])
    clusters = clusters_from_stats(s)
    at = one("ClassAssertion(C ?x)")
    assert clusters.cluster_id("cc", "a") == clusters.cluster_id("cc", "c")
    expected = static_cost(one("ClassAssertion(C a)"), set(), s).scaled(3)
    assert sampled_cost(at, omega(x, "abc"), s, clusters) == expected


def test_singleton_clusters_match_dynamic_cost():
    s = snapshot(["concept_possible\tC\ta", "concept_known\tC\tb", "individual\tc"])
    inds = tuple(frozenset({a}) for a in s.individuals)
    clusters = Clusters(inds, inds, inds, ())
    at = one("ClassAssertion(C ?x)")
    assert sampled_cost(at, omega(x, "abc"), s, clusters) == dynamic_cost(at, omega(x, "abc"), s)


def test_two_clusters_weighted_by_size():
    s = snapshot(["concept_possible\tC\ta", "concept_possible\tC\tb", "concept_known\tC\tc"])
    clusters = clusters_from_stats(s)
    at = one("ClassAssertion(C ?x)")
    expected = static_cost(one("ClassAssertion(C a)"), set(), s).scaled(2) + static_cost(
        one("ClassAssertion(C c)"), set(), s
    )
    assert sampled_cost(at, omega(x, "abc"), s, clusters) == expected


# -- candidates and selection ---------------------------------------------------------


def test_empty_plan_candidates_are_the_query():
    q = parse_query("ClassAssertion(A ?x) RoleAssertion(r ?x ?y) ClassAssertion(B ?z)")
    g = build_join_graph(q)
    assert candidate_templates((), g) == tuple(q)


def test_candidates_are_connected_successors():
    q = parse_query("ClassAssertion(A ?x) RoleAssertion(r ?x ?y) ClassAssertion(B ?z)")
    g = build_join_graph(q)
    assert candidate_templates((one("ClassAssertion(A ?x)"),), g) == (one("RoleAssertion(r ?x ?y)"),)


def test_complex_successors_widen_the_candidates():
    q = parse_query("SubClassOf(?x A) SubRoleOf(?y r) SubClassOf(B some(?y ?x))")
    g = build_join_graph(q)
    cands = candidate_templates((one("SubRoleOf(?y r)"),), g)
    assert set(cands) == {one("SubClassOf(B some(?y ?x))"), one("SubClassOf(?x A)")}


def test_ties_go_to_the_smaller_text():
    a, b = one("ClassAssertion(B ?x)"), one("ClassAssertion(A ?x)")
    chosen, _, _ = next_template([a, b], lambda at: CostPair(1, 1))
    assert chosen == b


def test_worked_example_choices():
    s = table_stats()
    q = parse_query((DATA / "table1.query").read_text(encoding="utf-8"))
    r, c, d = one("RoleAssertion(r ?x ?y)"), one("ClassAssertion(C ?x)"), one("ClassAssertion(D ?y)")
    static = replay(q, s, "static")
    dynamic = replay(q, s, "dynamic")
    assert static.plan.templates == (r, c, d)
    assert dynamic.plan.templates == (r, d, c)
    assert static.predicted_checks == (200, 150, 40)
    assert dynamic.predicted_checks == (200, 50, 35)


def test_example1_static_plan():
    q = parse_query((DATA / "example1.query").read_text(encoding="utf-8"))
    plan = static_plan(q, example1_stats())
    assert [str(at) for at in plan.templates] == ["RoleAssertion(r ?x ?y)", "ClassAssertion(C ?x)", "ClassAssertion(D ?y)"]


def test_single_template_plan():
    at = one("ClassAssertion(C ?x)")
    assert static_plan(Query((at,)), example1_stats()).templates == (at,)


# -- properties ------------------------------------------------------------------------


def _stats_for(onto) -> StatsStore | None:
    r = Reasoner(onto)
    if not r.is_consistent():
        return None
    concepts, roles = r.classify()
    return build_stats(r, concepts, roles)


@PROPS
@given(ontologies(n_concepts=4, n_individuals=4), queries())
def test_costs_are_finite_and_totally_ordered(onto, templates):
    s = _stats_for(onto)
    if s is None:
        return
    for at in templates:
        for bound in (set(), variables(at)):
            c = static_cost(at, bound, s)
            assert math.isfinite(c.total) and c.total >= 0
        assert dynamic_cost(at, [IDENTITY], s) == static_cost(at, set(), s)
    # The selection key (combined cost, text) separates any two distinct templates.
    keys = {(static_cost(at, set(), s).total, str(at)) for at in templates}
    assert len(keys) == len(set(templates))


@PROPS
@given(ontologies(n_concepts=4, n_individuals=4), queries(max_templates=4))
def test_plans_are_complete_and_connected(onto, templates):
    s = _stats_for(onto)
    if s is None:
        return
    for comp in connected_components(templates):
        plan = static_plan(comp, s).templates
        assert sorted(map(str, plan)) == sorted(map(str, comp))
        assert len(set(plan)) == len(plan)
        if all(is_simple(at) for at in comp):
            for i in range(1, len(plan)):
                seen = frozenset().union(*(variables(at) for at in plan[:i]))
                assert variables(plan[i]) & seen or not variables(plan[i])
