"""Hypothesis strategies for small ontologies, concepts and queries."""

from __future__ import annotations

from hypothesis import strategies as st

from dlquery.syntax import (
    BOTTOM,
    TOP,
    And,
    AtLeast,
    AtMost,
    ClassAssertion,
    CVar,
    DifferentFrom,
    Exists,
    Forall,
    IVar,
    Name,
    Not,
    Ontology,
    Or,
    Role,
    RoleAssertion,
    RVar,
    SameAs,
    SubClassOf,
    SubRoleOf,
    Trans,
)

CONCEPTS = ("A", "B", "C", "D")
ROLES = ("r", "s")
INDIVIDUALS = ("a", "b", "c", "d")


def concepts(names=CONCEPTS[:3], roles=ROLES, depth: int = 2, counting: bool = False):
    leaf = st.sampled_from([Name(n) for n in names] + [TOP, BOTTOM])
    role = st.sampled_from([Role(r) for r in roles])

    def extend(inner):
        options = [
            st.builds(Not, inner),
            st.builds(lambda a, b: And((a, b)), inner, inner),
            st.builds(lambda a, b: Or((a, b)), inner, inner),
            st.builds(Exists, role, inner),
            st.builds(Forall, role, inner),
        ]
        if counting:
            n = st.integers(min_value=0, max_value=2)
            options += [st.builds(AtLeast, n, role, inner), st.builds(AtMost, n, role, inner)]
        return st.one_of(*options)

    return st.recursive(leaf, extend, max_leaves=2**depth)


@st.composite
def ontologies(
    draw,
    n_concepts: int = 3,
    n_roles: int = 2,
    n_individuals: int = 3,
    max_gcis: int = 3,
    role_axioms: bool = True,
    equality: bool = False,
    counting: bool = False,
    transitivity: bool = False,
):
    names = CONCEPTS[:n_concepts]
    roles = ROLES[:n_roles]
    inds = INDIVIDUALS[:n_individuals]
    cs = concepts(names, roles, depth=2, counting=counting)
    tbox = draw(st.lists(st.builds(SubClassOf, cs, cs), max_size=max_gcis))
    rbox = []
    if role_axioms and len(roles) > 1 and draw(st.booleans()):
        r, s = draw(st.permutations(roles))[:2]
        rbox.append(SubRoleOf(Role(r), Role(s)))
    if transitivity and draw(st.booleans()):
        rbox.append(Trans(Role(draw(st.sampled_from(roles)))))
    ind = st.sampled_from(inds)
    atomic = st.sampled_from([Name(n) for n in names])
    abox = draw(
        st.lists(
            st.one_of(
                st.builds(ClassAssertion, st.one_of(atomic, cs), ind),
                st.builds(RoleAssertion, st.sampled_from([Role(r) for r in roles]), ind, ind),
            ),
            min_size=1,
            max_size=4,
        )
    )
    if equality:
        extra = draw(
            st.lists(
                st.one_of(
                    st.builds(lambda a, b: SameAs((a, b)), ind, ind),
                    st.builds(DifferentFrom, ind, ind),
                ),
                max_size=1,
            )
        )
        abox += [ax for ax in extra if not (isinstance(ax, DifferentFrom) and ax.left == ax.right)]
    return Ontology.from_axioms(tbox + rbox + abox)


def ground_axioms(n_concepts: int = 3, n_roles: int = 2, n_individuals: int = 3):
    names = CONCEPTS[:n_concepts]
    roles = [Role(r) for r in ROLES[:n_roles]]
    ind = st.sampled_from(INDIVIDUALS[:n_individuals])
    cs = concepts(names, ROLES[:n_roles], depth=1)
    return st.one_of(
        st.builds(SubClassOf, cs, cs),
        st.builds(ClassAssertion, cs, ind),
        st.builds(RoleAssertion, st.sampled_from(roles), ind, ind),
        st.builds(SubRoleOf, st.sampled_from(roles), st.sampled_from(roles)),
        st.builds(lambda a, b: SameAs((a, b)), ind, ind),
        st.builds(DifferentFrom, ind, ind),
    )


# -- query templates ----------------------------------------------------------

CVARS = (CVar("x"), CVar("y"))
RVARS = (RVar("p"), RVar("q"))
IVARS = (IVar("u"), IVar("v"))


def concept_templates(names, roles, with_vars=True):
    leaf_opts = [Name(n) for n in names] + [TOP]
    if with_vars:
        leaf_opts += list(CVARS)
    leaf = st.sampled_from(leaf_opts)
    role = st.sampled_from([Role(r) for r in roles] + (list(RVARS) if with_vars else []))

    def extend(inner):
        return st.one_of(
            st.builds(Not, inner),
            st.builds(lambda a, b: And((a, b)), inner, inner),
            st.builds(lambda a, b: Or((a, b)), inner, inner),
            st.builds(Exists, role, inner),
            st.builds(Forall, role, inner),
        )

    return st.recursive(leaf, extend, max_leaves=3)


@st.composite
def queries(draw, n_concepts: int = 4, n_roles: int = 2, n_individuals: int = 4, max_templates: int = 3):
    names = CONCEPTS[:n_concepts]
    roles = ROLES[:n_roles]
    ind_terms = st.sampled_from(list(INDIVIDUALS[:n_individuals]) + list(IVARS))
    cterm = st.sampled_from([Name(n) for n in names] + list(CVARS))
    rterm = st.sampled_from([Role(r) for r in roles] + list(RVARS))
    ct = concept_templates(names, roles)
    template = st.one_of(
        st.builds(ClassAssertion, cterm, ind_terms),
        st.builds(ClassAssertion, ct, ind_terms),
        st.builds(RoleAssertion, rterm, ind_terms, ind_terms),
        st.builds(SubClassOf, cterm, cterm),
        st.builds(SubClassOf, ct, ct),
        st.builds(SubClassOf, cterm, ct),
        st.builds(SubRoleOf, rterm, rterm),
        st.builds(lambda a, b: SameAs((a, b)), ind_terms, ind_terms),
        st.builds(DifferentFrom, ind_terms, ind_terms),
    )
    return draw(st.lists(template, min_size=1, max_size=max_templates, unique=True))
