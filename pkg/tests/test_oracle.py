"""The naive reference evaluators."""

from __future__ import annotations

from pathlib import Path

import pytest

from dlquery.errors import InconsistentOntology, ResourceLimit
from dlquery.oracle import naive_evaluate, naive_ordered_evaluate
from dlquery.parsing import parse_ontology
from dlquery.query import IDENTITY, parse_query
from dlquery.reasoner import Reasoner

DATA = Path(__file__).resolve().parent.parent / "data"


def hundred_individuals() -> str:
    lines = [f"ClassAssertion(Top i{k})" for k in range(100)]
    return "\n".join(lines + ["ClassAssertion(A i0)", "RoleAssertion(r i0 i1)"])


def test_every_pair_of_individuals_is_tested():
    onto = parse_ontology(hundred_individuals())
    res = naive_evaluate(onto, parse_query("ClassAssertion(A ?x) RoleAssertion(r ?x ?y)"))
    assert res.mappings_tested == 100 * 100
    assert {str(sorted(map(str, dict(mu).values()))) for mu in res.solutions} == {"['i0', 'i1']"}


def test_entailed_ground_query():
    res = naive_evaluate(parse_ontology("SubClassOf(A B) ClassAssertion(A a)"), parse_query("ClassAssertion(B a)"))
    assert res.solutions == {IDENTITY}
    assert res.mappings_tested == 1


def test_example1():
    onto = parse_ontology((DATA / "example1.ofn").read_text(encoding="utf-8"))
    res = naive_evaluate(onto, parse_query((DATA / "example1.query").read_text(encoding="utf-8")))
    assert {"\t".join(f"{v}={x}" for v, x in sorted(mu, key=lambda p: str(p[0]))) for mu in res.solutions} == {
        "?x=e\t?y=f"
    }


def test_mapping_budget():
    onto = parse_ontology(hundred_individuals())
    with pytest.raises(ResourceLimit):
        naive_evaluate(onto, parse_query("RoleAssertion(r ?x ?y)"), mapping_budget=9_999)


def test_invalid_instantiations_are_not_tested():
    onto = parse_ontology("Trans(t) RoleAssertion(r a b) RoleAssertion(t a b)")
    res = naive_evaluate(onto, parse_query("SubClassOf(Top atMost(5 ?p Top))"))
    # Two role names, and the transitive one cannot appear in a number restriction.
    assert res.mappings_tested == 1


def test_include_bottom_widens_the_domain():
    onto = parse_ontology("SubClassOf(A B) ClassAssertion(A a)")
    plain = naive_evaluate(onto, parse_query("SubClassOf(?x B)"))
    wide = naive_evaluate(onto, parse_query("SubClassOf(?x B)"), include_bottom=True)
    assert plain.mappings_tested == 2 and wide.mappings_tested == 4
    assert len(wide.solutions) == len(plain.solutions) + 1


def test_inconsistent_ontology_is_refused():
    with pytest.raises(InconsistentOntology):
        naive_evaluate(parse_ontology("ClassAssertion(Bottom a)"), parse_query("ClassAssertion(A ?x)"))


def test_order_changes_only_the_work():
    r = Reasoner(parse_ontology(hundred_individuals()))
    a, rr = parse_query("ClassAssertion(A ?x) RoleAssertion(r ?x ?y)").templates
    forward = naive_ordered_evaluate(r, [a, rr])
    backward = naive_ordered_evaluate(r, [rr, a])
    assert forward.solutions == backward.solutions
    assert forward.tests_per_step == (100, 100)
    assert backward.tests_per_step == (10_000, 1)
