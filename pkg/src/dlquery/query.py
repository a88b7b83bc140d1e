"""Queries over an ontology: axiom templates, rewriting and polarity.

A query is a non-empty set of axiom templates, that is axioms in which
``?name`` variables may stand for concept names, role names or individuals.
This module holds everything that can be decided from the query text alone
(plus the role box of the queried ontology for instantiation validity): the
rewriting of templates into cheaper equivalent ones, the split into
connected components, the polarity of concept and role variables that
licenses hierarchy pruning, and the simple/complex classification.
"""

from __future__ import annotations

from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass
from enum import Enum
from functools import cached_property

from .errors import ParseError, UnsupportedConstruct
from .parsing import parse_axioms
from .roles import RoleHierarchyClosure, role_hierarchy_closure, simplicity_violations
from .syntax import (
    And,
    AtLeast,
    AtMost,
    Axiom,
    ClassAssertion,
    Concept,
    CVar,
    DifferentFrom,
    Exists,
    Forall,
    Inverse,
    IVar,
    MappingValue,
    Name,
    Not,
    Ontology,
    Or,
    Role,
    RoleAssertion,
    RoleTerm,
    RVar,
    SameAs,
    SubClassOf,
    SubRoleOf,
    Top,
    Trans,
    Variable,
    axiom_concepts,
    axiom_roles,
    subconcepts,
    substitute,
    variables,
)

# A (partial) mapping is stored as a frozenset of (variable, value) pairs so
# that sets of mappings can be formed directly.
Solution = frozenset[tuple[Variable, MappingValue]]
IDENTITY: Solution = frozenset()


def as_dict(mu: Solution) -> dict[Variable, MappingValue]:
    return dict(mu)


def bind(mu: Solution, values: Mapping[Variable, MappingValue]) -> Solution:
    """``mu`` extended by ``values`` (which must not rebind any variable)."""
    return mu | frozenset(values.items())


def domain(mu: Solution) -> frozenset[Variable]:
    return frozenset(v for v, _ in mu)


def restrict(mu: Solution, vs: Iterable[Variable]) -> Solution:
    keep = set(vs)
    return frozenset((v, x) for v, x in mu if v in keep)


def instantiate(at: Axiom, mu: Solution) -> Axiom:
    return substitute(at, dict(mu))


def _value_text(x: MappingValue) -> str:
    return x if isinstance(x, str) else str(x)


def format_solution(mu: Solution) -> str:
    """Tab-separated ``?var=value`` pairs, variables in lexicographic order."""
    return "\t".join(f"{v}={_value_text(x)}" for v, x in sorted(mu, key=lambda p: str(p[0])))


# ---------------------------------------------------------------------------
# Queries
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Query:
    """A non-empty, duplicate-free set of axiom templates (kept in input order)."""

    templates: tuple[Axiom, ...]

    def __post_init__(self) -> None:
        if not self.templates:
            raise ValueError("a query needs at least one axiom template")
        seen: dict[Axiom, None] = dict.fromkeys(self.templates)
        if len(seen) != len(self.templates):
            object.__setattr__(self, "templates", tuple(seen))

    def __iter__(self) -> Iterator[Axiom]:
        return iter(self.templates)

    def __len__(self) -> int:
        return len(self.templates)

    @cached_property
    def variables(self) -> frozenset[Variable]:
        return frozenset().union(*(variables(at) for at in self.templates))

    def __str__(self) -> str:
        return " ".join(map(str, self.templates))


def parse_query(text: str) -> Query:
    """Parse templates in the ontology syntax with ``?``-prefixed variables.

    Variable sorts follow from their positions; a variable used in two sorts
    raises :class:`~dlquery.errors.SignatureError`.
    """
    templates = parse_axioms(text, allow_variables=True)
    if not templates:
        raise ParseError("a query needs at least one axiom template", 1, 1)
    return Query(tuple(templates))


# ---------------------------------------------------------------------------
# Rewriting
# ---------------------------------------------------------------------------


def rewrite_template(at: Axiom) -> tuple[Axiom, ...]:
    """One rewriting step; templates without a redex come back unchanged."""
    match at:
        case ClassAssertion(And(args), t):
            return tuple(ClassAssertion(c, t) for c in args)
        case SubClassOf(sub, And(args)):
            return tuple(SubClassOf(sub, c) for c in args)
        case SubClassOf(Or(args), sup):
            return tuple(SubClassOf(c, sup) for c in args)
        case SameAs(inds) if len(inds) > 2:
            return tuple(SameAs((a, b)) for a, b in zip(inds, inds[1:]))
    return (at,)


def rewrite(query: Query | Iterable[Axiom]) -> Query:
    """Apply the rewriting rules until no template changes."""
    pending = list(query)
    out: dict[Axiom, None] = {}
    while pending:
        at = pending.pop(0)
        parts = rewrite_template(at)
        if parts == (at,):
            out.setdefault(at, None)
        else:
            pending[:0] = parts
    return Query(tuple(out))


def connected_components(query: Query | Iterable[Axiom]) -> list[tuple[Axiom, ...]]:
    """Partition templates by shared-variable reachability, in input order."""
    templates = list(query)
    parent = list(range(len(templates)))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    owner: dict[Variable, int] = {}
    for i, at in enumerate(templates):
        for v in sorted(variables(at), key=str):
            if v in owner:
                parent[find(i)] = find(owner[v])
            else:
                owner[v] = i
    groups: dict[int, list[Axiom]] = {}
    for i, at in enumerate(templates):
        groups.setdefault(find(i), []).append(at)
    return [tuple(g) for g in groups.values()]


# ---------------------------------------------------------------------------
# Polarity
# ---------------------------------------------------------------------------


class Polarity(Enum):
    POS = "pos"
    NEG = "neg"
    UNDEFINED = "undefined"


def _flip(s: frozenset[bool]) -> frozenset[bool]:
    return frozenset(not p for p in s)


def _role_is(r: RoleTerm, var: RVar) -> bool:
    return r == var or (isinstance(r, Inverse) and r.role == var)


def _occurrences(var: Variable, c: Concept) -> frozenset[bool]:
    """Signs (``True`` positive) under which ``var`` occurs in ``c``."""
    match c:
        case CVar():
            return frozenset((True,)) if c == var else frozenset()
        case Not(arg):
            return _flip(_occurrences(var, arg))
        case And(args) | Or(args):
            return frozenset().union(*(_occurrences(var, a) for a in args))
        case Exists(r, f) | AtLeast(_, r, f):
            base = frozenset((True,)) if isinstance(var, RVar) and _role_is(r, var) else frozenset()
            return base | _occurrences(var, f)
        case Forall(r, f):
            base = frozenset((False,)) if isinstance(var, RVar) and _role_is(r, var) else frozenset()
            return base | _occurrences(var, f)
        case AtMost(_, r, f):
            base = frozenset((False,)) if isinstance(var, RVar) and _role_is(r, var) else frozenset()
            return base | _flip(_occurrences(var, f))
    return frozenset()


def _template_sides(at: Axiom) -> tuple[Concept | None, Concept] | None:
    """``(lhs, rhs)`` of a concept inclusion; assertions ``C(a)`` have no lhs."""
    match at:
        case SubClassOf(sub, sup):
            return sub, sup
        case ClassAssertion(c, _):
            return None, c
    return None


def occurrence_signs(var: Variable, at: Axiom) -> frozenset[bool]:
    sides = _template_sides(at)
    if sides is None:
        return frozenset()
    lhs, rhs = sides
    signs = _occurrences(var, rhs)
    if lhs is not None:
        signs |= _flip(_occurrences(var, lhs))
    return signs


def _polarity(var: Variable, at: Axiom) -> Polarity:
    if var not in variables(at):
        raise ValueError(f"{var} does not occur in {at}")
    signs = occurrence_signs(var, at)
    if signs == {True}:
        return Polarity.POS
    if signs == {False}:
        return Polarity.NEG
    return Polarity.UNDEFINED


def pol_c(var: CVar, at: Axiom | Concept) -> Polarity:
    """Polarity of a concept variable in a concept template or inclusion/assertion template."""
    if not isinstance(var, CVar):
        raise TypeError("pol_c expects a concept variable")
    if not isinstance(at, (SubClassOf, ClassAssertion)):
        at = ClassAssertion(at, "§")  # a bare concept template counts as a right-hand side
    return _polarity(var, at)


def pol_r(var: RVar, at: Axiom | Concept) -> Polarity:
    """Polarity of a role variable in a concept template or inclusion/assertion template."""
    if not isinstance(var, RVar):
        raise TypeError("pol_r expects a role variable")
    if not isinstance(at, (SubClassOf, ClassAssertion)):
        at = ClassAssertion(at, "§")
    return _polarity(var, at)


def prunable(var: Variable, at: Axiom) -> Polarity | None:
    """The polarity licensing hierarchy pruning for ``var`` in ``at``, if any.

    Pruning applies to concept and role variables of inclusion and
    assertion templates whose occurrences all have the same sign.
    """
    if isinstance(var, IVar) or _template_sides(at) is None:
        return None
    pol = _polarity(var, at)
    return None if pol is Polarity.UNDEFINED else pol


def _concept_roles(c: Concept) -> Iterator[RoleTerm]:
    for sub in subconcepts(c):
        if isinstance(sub, (Exists, Forall, AtLeast, AtMost)):
            yield sub.role


# ---------------------------------------------------------------------------
# Simple and complex templates
# ---------------------------------------------------------------------------


def _is_concept_term(c: Concept) -> bool:
    return isinstance(c, (Name, CVar))


def _is_role_term(r: RoleTerm) -> bool:
    return isinstance(r, (Role, RVar))


def _ground_or_var(c: Concept) -> bool:
    """A (possibly complex) concept without variables, or a bare concept variable."""
    if isinstance(c, CVar):
        return True
    return not any(isinstance(s, CVar) for s in subconcepts(c)) and not any(
        isinstance(r.role if isinstance(r, Inverse) else r, RVar) for r in _concept_roles(c)
    )


def is_simple(at: Axiom) -> bool:
    """Whether ``at`` maps onto a dedicated reasoning task.

    The simple forms are ``C ⊑ C'`` (each side a concept or a concept
    variable), domain ``∃r.⊤ ⊑ c`` and range ``⊤ ⊑ ∀r.c`` templates,
    ``r ⊑ s``, ``C(t)``, ``r(t, t')``, ``t ≈ t'`` and ``t ≉ t'``.
    """
    match at:
        case SubClassOf(sub, sup) if _ground_or_var(sub) and _ground_or_var(sup):
            return True
        case SubClassOf(Exists(r, Top()), c) if _is_role_term(r) and _is_concept_term(c):
            return True
        case SubClassOf(Top(), Forall(r, c)) if _is_role_term(r) and _is_concept_term(c):
            return True
        case SubRoleOf(r, s):
            return True
        case ClassAssertion(c, _) if _ground_or_var(c):
            return True
        case RoleAssertion():
            return True
        case SameAs(inds) if len(inds) == 2:
            return True
        case DifferentFrom():
            return True
    return False


# ---------------------------------------------------------------------------
# Instantiation validity
# ---------------------------------------------------------------------------


def check_supported(query: Query | Iterable[Axiom]) -> None:
    """Reject templates the evaluator does not handle."""
    for at in query:
        if isinstance(at, Trans):
            raise UnsupportedConstruct("transitivity axiom in a query", str(at))
        for r in axiom_roles(at):
            if isinstance(r, Inverse):
                raise UnsupportedConstruct("inverse role in a query", str(at))


class Validity:
    """Decides whether ``O ∪ µ(q)`` stays inside the supported fragment.

    The only way an instantiation of a supported template can leave the
    fragment is a number restriction over a non-simple role, either in the
    instantiated templates themselves or in the ontology once the
    instantiated role inclusions are added.
    """

    def __init__(self, onto: Ontology):
        self.onto = onto
        self.closure: RoleHierarchyClosure = role_hierarchy_closure(onto)
        self._counting = any(
            isinstance(s, (AtLeast, AtMost)) for ax in onto.axioms for c in axiom_concepts(ax) for s in subconcepts(c)
        )

    def valid(self, axioms: Iterable[Axiom]) -> bool:
        axioms = tuple(axioms)
        inclusions = [ax for ax in axioms if isinstance(ax, SubRoleOf)]
        if not inclusions:
            return not simplicity_violations(axioms, self.closure)
        closure = role_hierarchy_closure(self.onto.axioms + tuple(inclusions))
        if simplicity_violations(axioms, closure):
            return False
        return not (self._counting and simplicity_violations(self.onto.axioms, closure))


__all__ = [
    "IDENTITY",
    "Polarity",
    "Query",
    "Solution",
    "Validity",
    "as_dict",
    "bind",
    "check_supported",
    "connected_components",
    "domain",
    "format_solution",
    "instantiate",
    "is_simple",
    "occurrence_signs",
    "parse_query",
    "pol_c",
    "pol_r",
    "prunable",
    "restrict",
    "rewrite",
    "rewrite_template",
]
