"""Role hierarchy closure, transitivity and simplicity.

The closure ranges over role names, their inverses and the two built-in roles.
``TopRole`` is treated as transitive (the universal relation is), which makes
it non-simple: number restrictions over it are rejected.
"""

from __future__ import annotations

from collections import defaultdict
from collections.abc import Iterable
from dataclasses import dataclass

from .syntax import (
    BOTTOM_ROLE,
    TOP_ROLE,
    AtLeast,
    AtMost,
    Axiom,
    BottomRole,
    Inverse,
    Ontology,
    Role,
    RoleTerm,
    SubRoleOf,
    TopRole,
    Trans,
    axiom_concepts,
    axiom_roles,
    inverse,
    subconcepts,
)


@dataclass(frozen=True)
class RoleHierarchyClosure:
    """Reflexive-transitive role inclusion closed under inverse propagation."""

    pairs: frozenset[tuple[RoleTerm, RoleTerm]]
    transitive_flags: dict[RoleTerm, bool]
    simple_flags: dict[RoleTerm, bool]

    def subsumes(self, sub: RoleTerm, sup: RoleTerm) -> bool:
        if sub == sup or isinstance(sup, TopRole) or isinstance(sub, BottomRole):
            return True
        return (sub, sup) in self.pairs

    def equivalent(self, r: RoleTerm, s: RoleTerm) -> bool:
        return self.subsumes(r, s) and self.subsumes(s, r)

    def supers(self, r: RoleTerm) -> frozenset[RoleTerm]:
        return frozenset(s for (x, s) in self.pairs if x == r) | {r, TOP_ROLE}

    def subs(self, r: RoleTerm) -> frozenset[RoleTerm]:
        return frozenset(x for (x, s) in self.pairs if s == r) | {r, BOTTOM_ROLE}

    def is_transitive(self, r: RoleTerm) -> bool:
        if isinstance(r, TopRole):
            return True
        return self.transitive_flags.get(r, False)

    def is_simple(self, r: RoleTerm) -> bool:
        if isinstance(r, TopRole):
            return False
        if isinstance(r, BottomRole):
            return True
        return self.simple_flags.get(r, True)


def _named_terms(roles: Iterable[RoleTerm]) -> set[RoleTerm]:
    out: set[RoleTerm] = set()
    for r in roles:
        if isinstance(r, Role):
            out |= {r, Inverse(r)}
        elif isinstance(r, Inverse) and isinstance(r.role, Role):
            out |= {r, r.role}
    return out


def role_hierarchy_closure(onto: Ontology | Iterable[Axiom]) -> RoleHierarchyClosure:
    axioms = onto.axioms if isinstance(onto, Ontology) else tuple(onto)
    names: set[str] = set()
    for ax in axioms:
        for r in axiom_roles(ax):
            base = r.role if isinstance(r, Inverse) else r
            if isinstance(base, Role):
                names.add(base.name)

    succ: dict[RoleTerm, set[RoleTerm]] = defaultdict(set)
    trans_asserted: set[RoleTerm] = set()
    for ax in axioms:
        if isinstance(ax, SubRoleOf):
            succ[ax.sub].add(ax.sup)
            succ[inverse(ax.sub)].add(inverse(ax.sup))
        elif isinstance(ax, Trans):
            trans_asserted |= {ax.role, inverse(ax.role)}

    universe = _named_terms(Role(n) for n in names) | set(succ)
    universe |= {s for ss in succ.values() for s in ss}
    reach: dict[RoleTerm, set[RoleTerm]] = {}
    for r in universe:
        seen = {r}
        stack = [r]
        while stack:
            for nxt in succ.get(stack.pop(), ()):
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        reach[r] = seen
    pairs = frozenset((r, s) for r in universe for s in reach[r])

    # r is transitive iff it is equivalent to a role asserted transitive
    # (asserting trans(r) also makes inv(r) transitive).
    transitive = {
        r: r in trans_asserted or any(s in trans_asserted and r in reach[s] for s in reach[r])
        for r in universe
    }
    transitive[TOP_ROLE] = True
    # s is simple iff no transitive role lies below it.
    simple = {
        s: not any(transitive.get(r, False) for r in universe if s in reach[r]) for s in universe
    }
    return RoleHierarchyClosure(pairs, transitive, simple)


@dataclass(frozen=True)
class SimplicityViolation:
    axiom: Axiom
    restriction: AtLeast | AtMost
    role: RoleTerm

    def __str__(self) -> str:
        return f"number restriction {self.restriction} uses non-simple role {self.role} in {self.axiom}"


def simplicity_violations(
    axioms: Iterable[Axiom], closure: RoleHierarchyClosure
) -> list[SimplicityViolation]:
    out: list[SimplicityViolation] = []
    for ax in axioms:
        for c in axiom_concepts(ax):
            for sub in subconcepts(c):
                if isinstance(sub, (AtLeast, AtMost)) and not closure.is_simple(sub.role):
                    out.append(SimplicityViolation(ax, sub, sub.role))
    return out


def check_simplicity(onto: Ontology) -> list[SimplicityViolation]:
    """List every number restriction of ``onto`` over a non-simple role."""
    return simplicity_violations(onto.axioms, role_hierarchy_closure(onto))
