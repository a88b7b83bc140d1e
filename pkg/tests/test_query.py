"""Query model: parsing, rewriting, components, polarity, classification and validity."""

from __future__ import annotations

import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from dlquery.errors import SignatureError, UnsupportedConstruct
from dlquery.parsing import parse_ontology
from dlquery.query import (
    IDENTITY,
    Polarity,
    Query,
    Validity,
    bind,
    check_supported,
    connected_components,
    format_solution,
    instantiate,
    is_simple,
    occurrence_signs,
    parse_query,
    pol_c,
    pol_r,
    rewrite,
    rewrite_template,
)
from dlquery.syntax import (
    ClassAssertion,
    CVar,
    Exists,
    IVar,
    Name,
    Role,
    RoleAssertion,
    RVar,
    SameAs,
    SubClassOf,
    variables,
)
from strategies import CVARS, RVARS, concept_templates

x, y = CVar("x"), CVar("y")
q_role = RVar("y")
GALEN_Q5 = """
SubClassOf(?x NonNormalCondition)
SubRoleOf(?z ModifierAttribute)
SubClassOf(Bacterium some(?z ?w))
SubRoleOf(?y StatusAttribute)
SubClassOf(?w AbstractStatus)
SubClassOf(?x some(?y Status))
"""


def q(text: str) -> Query:
    return parse_query(text)


def one(text: str):
    (at,) = q(text)
    return at


# -- parsing -------------------------------------------------------------------


def test_conjunctive_instance_query():
    query = q("ClassAssertion(A ?x) RoleAssertion(r ?x ?y)")
    assert len(query) == 2
    assert query.variables == {IVar("x"), IVar("y")}


def test_existential_with_concept_variable():
    at = one("SubClassOf(Infection some(hasCausalLinkTo ?x))")
    assert at == SubClassOf(Name("Infection"), Exists(Role("hasCausalLinkTo"), x))


def test_mixed_sort_variable_is_rejected():
    with pytest.raises(SignatureError):
        q("SubClassOf(?x some(?y ?z)) ClassAssertion(A ?z)")


def test_nominal_in_query_is_rejected():
    with pytest.raises(UnsupportedConstruct):
        q("SubClassOf(?x oneOf(a))")


def test_inverse_roles_are_rejected_for_evaluation():
    with pytest.raises(UnsupportedConstruct):
        check_supported(q("SubClassOf(?x some(inv(r) A))"))


# -- rewriting -------------------------------------------------------------------


def test_right_conjunction_split():
    assert set(rewrite(q("SubClassOf(?x and(some(r ?y) A))"))) == {
        one("SubClassOf(?x A)"),
        one("SubClassOf(?x some(r ?y))"),
    }


def test_conjunctive_assertion_split():
    assert rewrite_template(one("ClassAssertion(and(C1 C2) ?t)")) == (
        one("ClassAssertion(C1 ?t)"),
        one("ClassAssertion(C2 ?t)"),
    )


def test_left_disjunction_split():
    assert set(rewrite(q("SubClassOf(or(A ?x) B)"))) == {one("SubClassOf(A B)"), one("SubClassOf(?x B)")}


def test_equality_chain():
    assert rewrite_template(SameAs(("a", IVar("u"), "c"))) == (SameAs(("a", IVar("u"))), SameAs((IVar("u"), "c")))


def test_atomic_template_is_unchanged():
    at = one("ClassAssertion(A ?t)")
    assert rewrite_template(at) == (at,)


def test_rewriting_reaches_a_fixpoint():
    out = rewrite(q("SubClassOf(or(A B) and(C and(D ?x)))"))
    assert len(out) == 6
    assert all(rewrite_template(at) == (at,) for at in out)


# -- connected components ------------------------------------------------------------


def test_components_split_on_shared_variables():
    comps = connected_components(q("ClassAssertion(A ?x) RoleAssertion(r ?x ?y) ClassAssertion(B ?z)"))
    assert [len(c) for c in comps] == [2, 1]


def test_galen_query_five_has_two_components():
    comps = connected_components(q(GALEN_Q5))
    assert len(comps) == 2
    vars_of = [frozenset(v.name for at in c for v in variables(at)) for c in comps]
    assert set(vars_of) == {frozenset({"x", "y"}), frozenset({"z", "w"})}


def test_ground_query_has_one_component_per_template():
    assert len(connected_components(q("ClassAssertion(A a) ClassAssertion(B b)"))) == 2


# -- polarity ------------------------------------------------------------------------


def test_existential_filler_is_positive():
    assert pol_c(x, one("SubClassOf(Infection some(hasCausalLinkTo ?x))")) is Polarity.POS


def test_both_sides_is_undefined():
    assert pol_c(x, one("SubClassOf(?x some(r ?x))")) is Polarity.UNDEFINED


def test_at_most_flips():
    assert pol_c(x, one("SubClassOf(A atMost(2 r ?x))")) is Polarity.NEG


def test_left_hand_side_is_negative():
    assert pol_c(x, one("SubClassOf(?x A)")) is Polarity.NEG


def test_role_variable_polarities():
    assert pol_r(q_role, one("SubClassOf(B some(?y A))")) is Polarity.POS
    assert pol_r(q_role, one("SubClassOf(B all(?y A))")) is Polarity.NEG
    assert pol_r(q_role, one("SubClassOf(B exactly(2 ?y A))")) is Polarity.UNDEFINED


def test_absent_variable_is_an_error():
    with pytest.raises(ValueError):
        pol_c(y, one("SubClassOf(?x A)"))


@settings(max_examples=200, deadline=None, suppress_health_check=list(HealthCheck))
@given(concept_templates(("A", "B"), ("r",)), st.sampled_from(CVARS + RVARS))
def test_polarity_is_total_and_undefined_exactly_for_mixed_signs(c, v):
    at = ClassAssertion(c, "a")
    if v not in variables(at):
        return
    pol = pol_c(v, at) if isinstance(v, CVar) else pol_r(v, at)
    signs = occurrence_signs(v, at)
    assert signs
    assert (pol is Polarity.UNDEFINED) == (signs == {True, False})


# -- simple templates -------------------------------------------------------------


@pytest.mark.parametrize(
    "text",
    [
        "SubClassOf(?x A)",
        "SubClassOf(some(?r Top) ?c)",
        "SubClassOf(Top all(?r ?c))",
        "SubRoleOf(?r s)",
        "ClassAssertion(?c a)",
        "ClassAssertion(some(r A) ?u)",
        "RoleAssertion(?r ?u ?v)",
        "SameAs(?u ?v)",
        "DifferentFrom(?u b)",
    ],
)
def test_simple_forms(text):
    assert is_simple(one(text))


@pytest.mark.parametrize(
    "text",
    ["SubClassOf(Infection some(r ?x))", "SubClassOf(?x and(A some(r ?y)))", "ClassAssertion(some(r ?x) a)"],
)
def test_complex_forms(text):
    assert not is_simple(one(text))


# -- mappings -----------------------------------------------------------------------


def test_identity_mapping_formats_empty():
    assert format_solution(IDENTITY) == ""


def test_solution_format_sorts_variables():
    mu = bind(IDENTITY, {IVar("y"): "f", IVar("x"): "e"})
    assert format_solution(mu) == "?x=e\t?y=f"


def test_instantiation_replaces_every_sort():
    at = one("SubClassOf(?c some(?r ?d))")
    mu = bind(IDENTITY, {CVar("c"): Name("A"), RVar("r"): Role("s"), CVar("d"): Name("B")})
    assert instantiate(at, mu) == SubClassOf(Name("A"), Exists(Role("s"), Name("B")))


# -- validity ------------------------------------------------------------------------


def test_number_restriction_over_non_simple_role_is_invalid():
    onto = parse_ontology("Trans(t) ClassAssertion(A a)")
    v = Validity(onto)
    assert not v.valid([one("SubClassOf(A atMost(1 t Top))")])
    assert v.valid([one("SubClassOf(A atMost(1 s Top))")])


def test_role_inclusion_that_breaks_simplicity_is_invalid():
    onto = parse_ontology("Trans(t) SubClassOf(A atLeast(2 s B))")
    v = Validity(onto)
    assert not v.valid([one("SubRoleOf(t s)")])
    assert v.valid([one("SubRoleOf(s t)")])


def test_role_assertion_instance_is_always_valid():
    v = Validity(parse_ontology("Trans(t) RoleAssertion(t a b)"))
    assert v.valid([RoleAssertion(Role("t"), "a", "b")])
