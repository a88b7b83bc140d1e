"""Parsing, serialization, role closure, simplicity and NNF."""

from __future__ import annotations

import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dlquery.errors import ParseError, SignatureError, SimplicityError, UnsupportedConstruct
from dlquery.parsing import parse_axioms, parse_concept, parse_ontology, serialize_ontology
from dlquery.roles import check_simplicity, role_hierarchy_closure
from dlquery.syntax import (
    TOP,
    And,
    AtLeast,
    AtMost,
    ClassAssertion,
    DifferentFrom,
    Exists,
    Forall,
    Inverse,
    Name,
    Not,
    Ontology,
    Or,
    Role,
    SubClassOf,
    SubRoleOf,
    Trans,
    nnf,
)
from strategies import concepts, ontologies

A, B = Name("A"), Name("B")
r, s = Role("r"), Role("s")


# -- parse_ontology -------------------------------------------------------------


def test_minimal_ontology_has_one_gci_and_one_assertion():
    onto = parse_ontology("SubClassOf(A B)  ClassAssertion(A a)")
    assert onto.tbox == (SubClassOf(A, B),)
    assert onto.abox == (ClassAssertion(A, "a"),)
    assert onto.signature.individual_names == {"a"}


def test_existential_over_top():
    onto = parse_ontology("SubClassOf(Infection some(hasCausalLinkTo Top))")
    assert onto.tbox == (SubClassOf(Name("Infection"), Exists(Role("hasCausalLinkTo"), TOP)),)


def test_simplicity_violation_names_the_role():
    with pytest.raises(SimplicityError) as exc:
        parse_ontology("Trans(r) SubRoleOf(r s) SubClassOf(A atMost(1 s Top))")
    assert "s" in str(exc.value)
    assert [v.role for v in exc.value.violations] == [s]


def test_exactly_is_desugared():
    c = parse_concept("exactly(2 r A)")
    assert c == And((AtLeast(2, r, A), AtMost(2, r, A)))


def test_equivalent_classes_is_two_inclusions():
    onto = parse_ontology("EquivalentClasses(A B)")
    assert set(onto.tbox) == {SubClassOf(A, B), SubClassOf(B, A)}


def test_nary_different_from_expands_pairwise():
    axioms = parse_axioms("DifferentFrom(a b c)")
    assert set(axioms) == {DifferentFrom("a", "b"), DifferentFrom("a", "c"), DifferentFrom("b", "c")}


def test_comments_and_blank_lines_are_ignored():
    onto = parse_ontology("# header\n\nSubClassOf(A B) # trailing\n")
    assert onto.tbox == (SubClassOf(A, B),)


@pytest.mark.parametrize(
    "text, construct",
    [
        ("SubClassOf(A oneOf(a))", "nominal"),
        ("SubClassOf(A hasSelf(r))", "Self restriction"),
        ("SubPropertyChainOf(chain(r s) t)", "role chain"),
        ("SubClassOf(A DataSomeValuesFrom(p B))", "data property"),
    ],
)
def test_out_of_fragment_constructs_are_named(text, construct):
    with pytest.raises(UnsupportedConstruct) as exc:
        parse_ontology(text)
    assert exc.value.construct == construct


def test_syntax_error_reports_position():
    with pytest.raises(ParseError) as exc:
        parse_ontology("SubClassOf(A B)\nSubClassOf(A")
    assert exc.value.line == 2


def test_name_used_in_two_sorts_is_rejected():
    with pytest.raises(SignatureError):
        parse_ontology("ClassAssertion(A r) RoleAssertion(r a b)")


# -- serialization ----------------------------------------------------------


@pytest.mark.parametrize(
    "text",
    [
        "SubClassOf(A B)  ClassAssertion(A a)",
        "SubClassOf(Infection some(hasCausalLinkTo Top))",
        "SubClassOf(A atLeast(2 r C))",
        "Trans(r) SubRoleOf(r s) NegRoleAssertion(s a b) SameAs(a b) DifferentFrom(a c)",
    ],
)
def test_round_trip_of_examples(text):
    onto = parse_ontology(text)
    assert parse_ontology(serialize_ontology(onto)) == onto


def test_number_restriction_serializes_in_surface_syntax():
    onto = parse_ontology("SubClassOf(A atLeast(2 r C))")
    assert "atLeast(2 r C)" in serialize_ontology(onto)


def test_empty_abox_has_no_assertion_lines():
    text = serialize_ontology(parse_ontology("SubClassOf(A B)"))
    assert "Assertion" not in text


@settings(max_examples=150, deadline=None)
@given(ontologies(n_concepts=4, n_individuals=4, equality=True, counting=True))
def test_round_trip_is_identity(onto):
    try:
        text = serialize_ontology(onto)
    except SimplicityError:
        return
    assert parse_ontology(text, check_simple=False) == onto


# -- role hierarchy closure ---------------------------------------------------


def test_closure_is_reflexive_transitive_and_inverse_closed():
    c = role_hierarchy_closure(Ontology(rbox=(SubRoleOf(r, s),)))
    assert c.subsumes(r, r) and c.subsumes(s, s) and c.subsumes(r, s)
    assert c.subsumes(Inverse(r), Inverse(s))
    assert not c.subsumes(s, r)


def test_mutual_inclusion_is_equivalence():
    c = role_hierarchy_closure(Ontology(rbox=(SubRoleOf(r, s), SubRoleOf(s, r))))
    assert c.equivalent(r, s)


def test_transitive_subrole_makes_super_non_simple():
    c = role_hierarchy_closure(Ontology(rbox=(Trans(r), SubRoleOf(r, s))))
    assert not c.is_simple(s) and not c.is_simple(r)


def _brute_force_closure(inclusions, names):
    rel = {(x, x) for x in names} | set(inclusions)
    while True:
        extra = {(a, d) for (a, b) in rel for (c, d) in rel if b == c} - rel
        if not extra:
            return rel
        rel |= extra


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(st.sampled_from("pqrstu"), st.sampled_from("pqrstu")), max_size=8))
def test_closure_matches_brute_force_fixpoint(pairs):
    names = [Role(x) for x in "pqrstu"]
    axioms = tuple(SubRoleOf(Role(a), Role(b)) for a, b in pairs)
    c = role_hierarchy_closure(Ontology(rbox=axioms))
    expected = _brute_force_closure({(Role(a), Role(b)) for a, b in pairs}, names)
    for x, y in itertools.product(names, repeat=2):
        assert c.subsumes(x, y) == ((x, y) in expected)
        assert c.subsumes(Inverse(x), Inverse(y)) == ((x, y) in expected)


# -- simplicity report ----------------------------------------------------------


def test_no_transitivity_means_empty_report():
    assert check_simplicity(parse_ontology("SubClassOf(A atMost(1 r Top))")) == []


def test_number_restriction_on_transitive_role_is_reported():
    onto = parse_ontology("Trans(r) SubClassOf(A atMost(1 r Top))", check_simple=False)
    assert len(check_simplicity(onto)) == 1


def test_number_restriction_on_super_of_transitive_is_reported():
    onto = parse_ontology("Trans(r) SubRoleOf(r s) SubClassOf(A atLeast(2 s A))", check_simple=False)
    (violation,) = check_simplicity(onto)
    assert violation.role == s


# -- negation normal form -------------------------------------------------------


def test_de_morgan():
    assert nnf(Not(And((A, B)))) == Or((Not(A), Not(B)))


def test_negated_existential():
    assert nnf(Not(Exists(r, A))) == Forall(r, Not(A))


def test_negated_at_most():
    assert nnf(Not(AtMost(2, r, A))) == AtLeast(3, r, A)


def _only_atomic_negation(c) -> bool:
    match c:
        case Not(arg):
            return isinstance(arg, Name)
        case And(args) | Or(args):
            return all(_only_atomic_negation(a) for a in args)
        case Exists(_, f) | Forall(_, f) | AtLeast(_, _, f) | AtMost(_, _, f):
            return _only_atomic_negation(f)
    return True


def _extension(c, dom, ext, rel):
    match c:
        case Name(n):
            return ext[n]
        case Not(arg):
            return dom - _extension(arg, dom, ext, rel)
        case And(args):
            return frozenset.intersection(*(_extension(a, dom, ext, rel) for a in args))
        case Or(args):
            return frozenset.union(*(_extension(a, dom, ext, rel) for a in args))
        case Exists(_, f):
            fe = _extension(f, dom, ext, rel)
            return frozenset(x for x in dom if any((x, y) in rel for y in fe))
        case Forall(_, f):
            fe = _extension(f, dom, ext, rel)
            return frozenset(x for x in dom if all(y in fe for y in dom if (x, y) in rel))
        case AtLeast(n, _, f):
            fe = _extension(f, dom, ext, rel)
            return frozenset(x for x in dom if sum((x, y) in rel for y in fe) >= n)
        case AtMost(n, _, f):
            fe = _extension(f, dom, ext, rel)
            return frozenset(x for x in dom if sum((x, y) in rel for y in fe) <= n)
    return dom if c == TOP else frozenset()


def _interpretations(size):
    dom = frozenset(range(size))
    subsets = [frozenset(x for x in dom if m >> x & 1) for m in range(2**size)]
    pairs = list(itertools.product(dom, repeat=2))
    for ea, eb in itertools.product(subsets, repeat=2):
        for mask in range(2 ** len(pairs)):
            yield dom, {"A": ea, "B": eb}, frozenset(p for i, p in enumerate(pairs) if mask >> i & 1)


@settings(max_examples=60, deadline=None)
@given(concepts(names=("A", "B"), roles=("r",), counting=True))
def test_nnf_preserves_extensions_on_all_small_interpretations(c):
    n = nnf(c)
    assert _only_atomic_negation(n)
    for size in (1, 2):
        for dom, ext, rel in _interpretations(size):
            assert _extension(c, dom, ext, rel) == _extension(n, dom, ext, rel)
