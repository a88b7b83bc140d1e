"""Abstract syntax for concepts, roles, axioms, templates and ontologies.

Every node is a frozen dataclass, so terms hash structurally and can be used
as dictionary keys or set members.  Variables (``CVar``, ``RVar``, ``IVar``)
may appear wherever a name of the matching sort may appear; an axiom that
contains variables is an axiom template.
"""

from __future__ import annotations

from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass, field
from typing import Union

from .errors import SignatureError

# Names beginning with this character are reserved for internally generated
# symbols; the parser never produces them, so they cannot leak into answers.
RESERVED_PREFIX = "§"


# ---------------------------------------------------------------------------
# Roles
# ---------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class Role:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True, slots=True)
class RVar:
    """A role variable ``?name``."""

    name: str

    def __str__(self) -> str:
        return f"?{self.name}"


@dataclass(frozen=True, slots=True)
class Inverse:
    """Inverse of a named role or role variable; never nested."""

    role: Role | RVar

    def __post_init__(self) -> None:
        if not isinstance(self.role, (Role, RVar)):
            raise TypeError("inverse may only wrap a role name or role variable")

    def __str__(self) -> str:
        return f"inv({self.role})"


@dataclass(frozen=True, slots=True)
class TopRole:
    def __str__(self) -> str:
        return "TopRole"


@dataclass(frozen=True, slots=True)
class BottomRole:
    def __str__(self) -> str:
        return "BottomRole"


TOP_ROLE = TopRole()
BOTTOM_ROLE = BottomRole()

RoleTerm = Union[Role, RVar, Inverse, TopRole, BottomRole]


def inverse(role: RoleTerm) -> RoleTerm:
    """Return the inverse of ``role`` without ever building ``inv(inv(r))``."""
    if isinstance(role, Inverse):
        return role.role
    if isinstance(role, (TopRole, BottomRole)):
        return role
    return Inverse(role)


# ---------------------------------------------------------------------------
# Concepts
# ---------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class Top:
    def __str__(self) -> str:
        return "Top"


@dataclass(frozen=True, slots=True)
class Bottom:
    def __str__(self) -> str:
        return "Bottom"


TOP = Top()
BOTTOM = Bottom()


@dataclass(frozen=True, slots=True)
class Name:
    """A concept name."""

    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True, slots=True)
class CVar:
    """A concept variable ``?name``."""

    name: str

    def __str__(self) -> str:
        return f"?{self.name}"


@dataclass(frozen=True, slots=True)
class Not:
    arg: "Concept"

    def __str__(self) -> str:
        return f"not({self.arg})"


@dataclass(frozen=True, slots=True)
class And:
    args: tuple["Concept", ...]

    def __post_init__(self) -> None:
        if len(self.args) < 2:
            raise ValueError("and(...) needs at least two operands")

    def __str__(self) -> str:
        return "and(" + " ".join(map(str, self.args)) + ")"


@dataclass(frozen=True, slots=True)
class Or:
    args: tuple["Concept", ...]

    def __post_init__(self) -> None:
        if len(self.args) < 2:
            raise ValueError("or(...) needs at least two operands")

    def __str__(self) -> str:
        return "or(" + " ".join(map(str, self.args)) + ")"


@dataclass(frozen=True, slots=True)
class Exists:
    role: RoleTerm
    filler: "Concept"

    def __str__(self) -> str:
        return f"some({self.role} {self.filler})"


@dataclass(frozen=True, slots=True)
class Forall:
    role: RoleTerm
    filler: "Concept"

    def __str__(self) -> str:
        return f"all({self.role} {self.filler})"


@dataclass(frozen=True, slots=True)
class AtLeast:
    n: int
    role: RoleTerm
    filler: "Concept"

    def __post_init__(self) -> None:
        if self.n < 0:
            raise ValueError("cardinality must be non-negative")

    def __str__(self) -> str:
        return f"atLeast({self.n} {self.role} {self.filler})"


@dataclass(frozen=True, slots=True)
class AtMost:
    n: int
    role: RoleTerm
    filler: "Concept"

    def __post_init__(self) -> None:
        if self.n < 0:
            raise ValueError("cardinality must be non-negative")

    def __str__(self) -> str:
        return f"atMost({self.n} {self.role} {self.filler})"


Concept = Union[Top, Bottom, Name, CVar, Not, And, Or, Exists, Forall, AtLeast, AtMost]


def exactly(n: int, role: RoleTerm, filler: Concept) -> And:
    """``=n r.C`` is sugar for ``>=n r.C`` and ``<=n r.C``."""
    return And((AtLeast(n, role, filler), AtMost(n, role, filler)))


# ---------------------------------------------------------------------------
# Individuals and axioms
# ---------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class IVar:
    """An individual variable ``?name``."""

    name: str

    def __str__(self) -> str:
        return f"?{self.name}"


IndividualTerm = Union[str, IVar]
Variable = Union[CVar, RVar, IVar]


@dataclass(frozen=True, slots=True)
class SubClassOf:
    sub: Concept
    sup: Concept

    def __str__(self) -> str:
        return f"SubClassOf({self.sub} {self.sup})"


@dataclass(frozen=True, slots=True)
class SubRoleOf:
    sub: RoleTerm
    sup: RoleTerm

    def __str__(self) -> str:
        return f"SubRoleOf({self.sub} {self.sup})"


@dataclass(frozen=True, slots=True)
class Trans:
    role: RoleTerm

    def __str__(self) -> str:
        return f"Trans({self.role})"


@dataclass(frozen=True, slots=True)
class ClassAssertion:
    concept: Concept
    individual: IndividualTerm

    def __str__(self) -> str:
        return f"ClassAssertion({self.concept} {self.individual})"


@dataclass(frozen=True, slots=True)
class RoleAssertion:
    role: RoleTerm
    subject: IndividualTerm
    object: IndividualTerm

    def __str__(self) -> str:
        return f"RoleAssertion({self.role} {self.subject} {self.object})"


@dataclass(frozen=True, slots=True)
class NegRoleAssertion:
    role: RoleTerm
    subject: IndividualTerm
    object: IndividualTerm

    def __str__(self) -> str:
        return f"NegRoleAssertion({self.role} {self.subject} {self.object})"


@dataclass(frozen=True, slots=True)
class SameAs:
    """Equality between two or more individuals (n-ary only in queries)."""

    individuals: tuple[IndividualTerm, ...]

    def __post_init__(self) -> None:
        if len(self.individuals) < 2:
            raise ValueError("SameAs needs at least two individuals")

    def __str__(self) -> str:
        return "SameAs(" + " ".join(map(str, self.individuals)) + ")"


@dataclass(frozen=True, slots=True)
class DifferentFrom:
    left: IndividualTerm
    right: IndividualTerm

    def __str__(self) -> str:
        return f"DifferentFrom({self.left} {self.right})"


Axiom = Union[
    SubClassOf,
    SubRoleOf,
    Trans,
    ClassAssertion,
    RoleAssertion,
    NegRoleAssertion,
    SameAs,
    DifferentFrom,
]
TBOX_TYPES = (SubClassOf,)
RBOX_TYPES = (SubRoleOf, Trans)
ABOX_TYPES = (ClassAssertion, RoleAssertion, NegRoleAssertion, SameAs, DifferentFrom)


# ---------------------------------------------------------------------------
# Traversal helpers
# ---------------------------------------------------------------------------


def subconcepts(c: Concept) -> Iterator[Concept]:
    """Yield ``c`` and every concept nested inside it (pre-order)."""
    stack = [c]
    while stack:
        cur = stack.pop()
        yield cur
        match cur:
            case Not(arg):
                stack.append(arg)
            case And(args) | Or(args):
                stack.extend(reversed(args))
            case Exists(_, f) | Forall(_, f) | AtLeast(_, _, f) | AtMost(_, _, f):
                stack.append(f)


def concept_roles(c: Concept) -> Iterator[RoleTerm]:
    for sub in subconcepts(c):
        if isinstance(sub, (Exists, Forall, AtLeast, AtMost)):
            yield sub.role


def axiom_concepts(ax: Axiom) -> tuple[Concept, ...]:
    match ax:
        case SubClassOf(sub, sup):
            return (sub, sup)
        case ClassAssertion(c, _):
            return (c,)
    return ()


def axiom_roles(ax: Axiom) -> tuple[RoleTerm, ...]:
    """Role terms occurring at top level of the axiom or inside its concepts."""
    out: list[RoleTerm] = []
    match ax:
        case SubRoleOf(sub, sup):
            out += [sub, sup]
        case Trans(r):
            out.append(r)
        case RoleAssertion(r, _, _) | NegRoleAssertion(r, _, _):
            out.append(r)
    for c in axiom_concepts(ax):
        out.extend(concept_roles(c))
    return tuple(out)


def axiom_individuals(ax: Axiom) -> tuple[IndividualTerm, ...]:
    match ax:
        case ClassAssertion(_, a):
            return (a,)
        case RoleAssertion(_, a, b) | NegRoleAssertion(_, a, b):
            return (a, b)
        case SameAs(inds):
            return inds
        case DifferentFrom(a, b):
            return (a, b)
    return ()


def _role_base(r: RoleTerm) -> RoleTerm:
    return r.role if isinstance(r, Inverse) else r


def variables(ax: Axiom) -> frozenset[Variable]:
    """All variables of an axiom template."""
    out: set[Variable] = set()
    for c in axiom_concepts(ax):
        for sub in subconcepts(c):
            if isinstance(sub, CVar):
                out.add(sub)
    for r in axiom_roles(ax):
        base = _role_base(r)
        if isinstance(base, RVar):
            out.add(base)
    for a in axiom_individuals(ax):
        if isinstance(a, IVar):
            out.add(a)
    return frozenset(out)


def concept_variables(c: Concept) -> frozenset[Variable]:
    out: set[Variable] = set()
    for sub in subconcepts(c):
        if isinstance(sub, CVar):
            out.add(sub)
        elif isinstance(sub, (Exists, Forall, AtLeast, AtMost)):
            base = _role_base(sub.role)
            if isinstance(base, RVar):
                out.add(base)
    return frozenset(out)


def is_ground(ax: Axiom) -> bool:
    return not variables(ax)


def names_in(ax: Axiom) -> tuple[set[str], set[str], set[str]]:
    """Concept, role and individual names used by an axiom (variables excluded)."""
    concepts: set[str] = set()
    roles: set[str] = set()
    inds: set[str] = set()
    for c in axiom_concepts(ax):
        for sub in subconcepts(c):
            if isinstance(sub, Name):
                concepts.add(sub.name)
    for r in axiom_roles(ax):
        base = _role_base(r)
        if isinstance(base, Role):
            roles.add(base.name)
    for a in axiom_individuals(ax):
        if isinstance(a, str):
            inds.add(a)
    return concepts, roles, inds


# ---------------------------------------------------------------------------
# Substitution
# ---------------------------------------------------------------------------

MappingValue = Union[Name, Top, Bottom, Role, TopRole, BottomRole, str]


def substitute_role(r: RoleTerm, mu: Mapping[Variable, MappingValue]) -> RoleTerm:
    match r:
        case RVar():
            return mu.get(r, r)  # type: ignore[return-value]
        case Inverse(base):
            return inverse(substitute_role(base, mu))
    return r


def substitute_concept(c: Concept, mu: Mapping[Variable, MappingValue]) -> Concept:
    match c:
        case CVar():
            return mu.get(c, c)  # type: ignore[return-value]
        case Not(arg):
            return Not(substitute_concept(arg, mu))
        case And(args):
            return And(tuple(substitute_concept(a, mu) for a in args))
        case Or(args):
            return Or(tuple(substitute_concept(a, mu) for a in args))
        case Exists(r, f):
            return Exists(substitute_role(r, mu), substitute_concept(f, mu))
        case Forall(r, f):
            return Forall(substitute_role(r, mu), substitute_concept(f, mu))
        case AtLeast(n, r, f):
            return AtLeast(n, substitute_role(r, mu), substitute_concept(f, mu))
        case AtMost(n, r, f):
            return AtMost(n, substitute_role(r, mu), substitute_concept(f, mu))
    return c


def _sub_ind(a: IndividualTerm, mu: Mapping[Variable, MappingValue]) -> IndividualTerm:
    if isinstance(a, IVar):
        return mu.get(a, a)  # type: ignore[return-value]
    return a


def substitute(ax: Axiom, mu: Mapping[Variable, MappingValue]) -> Axiom:
    """Replace every variable in ``dom(mu)`` by its value."""
    if not mu:
        return ax
    match ax:
        case SubClassOf(sub, sup):
            return SubClassOf(substitute_concept(sub, mu), substitute_concept(sup, mu))
        case SubRoleOf(sub, sup):
            return SubRoleOf(substitute_role(sub, mu), substitute_role(sup, mu))
        case Trans(r):
            return Trans(substitute_role(r, mu))
        case ClassAssertion(c, a):
            return ClassAssertion(substitute_concept(c, mu), _sub_ind(a, mu))
        case RoleAssertion(r, a, b):
            return RoleAssertion(substitute_role(r, mu), _sub_ind(a, mu), _sub_ind(b, mu))
        case NegRoleAssertion(r, a, b):
            return NegRoleAssertion(substitute_role(r, mu), _sub_ind(a, mu), _sub_ind(b, mu))
        case SameAs(inds):
            return SameAs(tuple(_sub_ind(a, mu) for a in inds))
        case DifferentFrom(a, b):
            return DifferentFrom(_sub_ind(a, mu), _sub_ind(b, mu))
    raise TypeError(f"not an axiom: {ax!r}")


# ---------------------------------------------------------------------------
# Negation normal form
# ---------------------------------------------------------------------------


def nnf(c: Concept) -> Concept:
    """Push negation inward until it only sits on names or concept variables."""
    match c:
        case Not(arg):
            return _nnf_neg(arg)
        case And(args):
            return And(tuple(nnf(a) for a in args))
        case Or(args):
            return Or(tuple(nnf(a) for a in args))
        case Exists(r, f):
            return Exists(r, nnf(f))
        case Forall(r, f):
            return Forall(r, nnf(f))
        case AtLeast(n, r, f):
            return AtLeast(n, r, nnf(f))
        case AtMost(n, r, f):
            return AtMost(n, r, nnf(f))
    return c


def _nnf_neg(c: Concept) -> Concept:
    match c:
        case Top():
            return BOTTOM
        case Bottom():
            return TOP
        case Name() | CVar():
            return Not(c)
        case Not(arg):
            return nnf(arg)
        case And(args):
            return Or(tuple(_nnf_neg(a) for a in args))
        case Or(args):
            return And(tuple(_nnf_neg(a) for a in args))
        case Exists(r, f):
            return Forall(r, _nnf_neg(f))
        case Forall(r, f):
            return Exists(r, _nnf_neg(f))
        case AtLeast(n, r, f):
            if n == 0:
                return BOTTOM
            return AtMost(n - 1, r, nnf(f))
        case AtMost(n, r, f):
            return AtLeast(n + 1, r, nnf(f))
    raise TypeError(f"not a concept: {c!r}")


def negate(c: Concept) -> Concept:
    """NNF of the complement of ``c``."""
    return _nnf_neg(c)


# ---------------------------------------------------------------------------
# Signature and ontology
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Signature:
    concept_names: frozenset[str] = frozenset()
    role_names: frozenset[str] = frozenset()
    individual_names: frozenset[str] = frozenset()

    def __post_init__(self) -> None:
        for a, b, what in (
            (self.concept_names, self.role_names, "concept and role"),
            (self.concept_names, self.individual_names, "concept and individual"),
            (self.role_names, self.individual_names, "role and individual"),
        ):
            clash = a & b
            if clash:
                raise SignatureError(f"name(s) used as both {what}: {', '.join(sorted(clash))}")

    def union(self, other: "Signature") -> "Signature":
        return Signature(
            self.concept_names | other.concept_names,
            self.role_names | other.role_names,
            self.individual_names | other.individual_names,
        )

    @staticmethod
    def of(axioms: Iterable[Axiom]) -> "Signature":
        cs: set[str] = set()
        rs: set[str] = set()
        inds: set[str] = set()
        for ax in axioms:
            c, r, i = names_in(ax)
            cs |= c
            rs |= r
            inds |= i
        return Signature(frozenset(cs), frozenset(rs), frozenset(inds))


def _dedupe(items: Iterable[Axiom]) -> tuple[Axiom, ...]:
    return tuple(dict.fromkeys(items))


@dataclass(frozen=True)
class Ontology:
    """A TBox, an RBox and an ABox over a signature.

    Axioms keep their insertion order (duplicates dropped) so that serialising
    and re-parsing yields a structurally equal object.  Names that are declared
    but unused can be carried in ``declared``.
    """

    tbox: tuple[SubClassOf, ...] = ()
    rbox: tuple[SubRoleOf | Trans, ...] = ()
    abox: tuple[Axiom, ...] = ()
    declared: Signature = field(default_factory=Signature)

    def __post_init__(self) -> None:
        object.__setattr__(self, "tbox", _dedupe(self.tbox))
        object.__setattr__(self, "rbox", _dedupe(self.rbox))
        object.__setattr__(self, "abox", _dedupe(self.abox))
        for ax in self.axioms:
            if variables(ax):
                raise SignatureError(f"ontology axiom contains variables: {ax}")
        # Validates pairwise disjointness of the three name sets.
        object.__setattr__(self, "_signature", self.declared.union(Signature.of(self.axioms)))

    @property
    def axioms(self) -> tuple[Axiom, ...]:
        return self.tbox + self.rbox + self.abox

    @property
    def signature(self) -> Signature:
        return self._signature  # type: ignore[attr-defined]

    @staticmethod
    def from_axioms(axioms: Iterable[Axiom], declared: Signature | None = None) -> "Ontology":
        tbox: list[SubClassOf] = []
        rbox: list[SubRoleOf | Trans] = []
        abox: list[Axiom] = []
        for ax in axioms:
            if isinstance(ax, TBOX_TYPES):
                tbox.append(ax)
            elif isinstance(ax, RBOX_TYPES):
                rbox.append(ax)
            elif isinstance(ax, ABOX_TYPES):
                abox.append(ax)
            else:
                raise TypeError(f"not an axiom: {ax!r}")
        return Ontology(tuple(tbox), tuple(rbox), tuple(abox), declared or Signature())

    def with_axioms(self, *axioms: Axiom) -> "Ontology":
        return Ontology.from_axioms(self.axioms + tuple(axioms), self.declared)

    def uses_top_role(self) -> bool:
        return any(isinstance(r, TopRole) for ax in self.axioms for r in axiom_roles(ax))

    def uses_inverse(self) -> bool:
        return any(isinstance(r, Inverse) for ax in self.axioms for r in axiom_roles(ax))
