"""Finite-model entailment oracle used only by the test suite.

``O ⊨ α`` is decided by searching for a countermodel of size 1..``max_size``
with z3: every concept name becomes one Boolean per domain element, every
role one Boolean per ordered pair, and every individual an integer element.
This is sound for non-entailment; for entailment it relies on the fragment
having small countermodels at the sizes the generators produce.
"""

from __future__ import annotations

from functools import lru_cache

import z3

from dlquery.syntax import (
    And,
    AtLeast,
    AtMost,
    Axiom,
    Bottom,
    BottomRole,
    ClassAssertion,
    Concept,
    DifferentFrom,
    Exists,
    Forall,
    Inverse,
    Name,
    NegRoleAssertion,
    Not,
    Ontology,
    Or,
    Role,
    RoleAssertion,
    SameAs,
    SubClassOf,
    SubRoleOf,
    Top,
    TopRole,
    Trans,
    axiom_individuals,
    names_in,
)


class _Model:
    def __init__(self, n: int, concepts, roles, individuals, transitive):
        self.n = n
        self.c = {a: [z3.Bool(f"c_{a}_{i}") for i in range(n)] for a in concepts}
        self.r = {r: [[z3.Bool(f"r_{r}_{i}_{j}") for j in range(n)] for i in range(n)] for r in roles}
        self.ind = {a: z3.Int(f"i_{a}") for a in individuals}
        self.cache: dict = {}
        self.base = [z3.And(v >= 0, v < n) for v in self.ind.values()]
        for r in transitive:
            m = self.r[r]
            for i in range(n):
                for j in range(n):
                    for k in range(n):
                        self.base.append(z3.Implies(z3.And(m[i][j], m[j][k]), m[i][k]))

    def role(self, r, i: int, j: int):
        match r:
            case TopRole():
                return z3.BoolVal(True)
            case BottomRole():
                return z3.BoolVal(False)
            case Inverse(base):
                return self.role(base, j, i)
            case Role(name):
                return self.r[name][i][j]
        raise TypeError(r)

    def ext(self, c: Concept, i: int):
        key = (c, i)
        hit = self.cache.get(key)
        if hit is not None:
            return hit
        n = self.n
        match c:
            case Top():
                out = z3.BoolVal(True)
            case Bottom():
                out = z3.BoolVal(False)
            case Name(a):
                out = self.c[a][i]
            case Not(arg):
                out = z3.Not(self.ext(arg, i))
            case And(args):
                out = z3.And([self.ext(a, i) for a in args])
            case Or(args):
                out = z3.Or([self.ext(a, i) for a in args])
            case Exists(r, f):
                out = z3.Or([z3.And(self.role(r, i, j), self.ext(f, j)) for j in range(n)])
            case Forall(r, f):
                out = z3.And([z3.Implies(self.role(r, i, j), self.ext(f, j)) for j in range(n)])
            case AtLeast(k, r, f):
                terms = [(z3.And(self.role(r, i, j), self.ext(f, j)), 1) for j in range(n)]
                out = z3.BoolVal(True) if k == 0 else z3.PbGe(terms, k)
            case AtMost(k, r, f):
                terms = [(z3.And(self.role(r, i, j), self.ext(f, j)), 1) for j in range(n)]
                out = z3.PbLe(terms, k)
            case _:
                raise TypeError(c)
        self.cache[key] = out
        return out

    def at(self, a: str, fn):
        """fn(i) must hold at the element denoted by a."""
        v = self.ind[a]
        return z3.And([z3.Implies(v == i, fn(i)) for i in range(self.n)])

    def holds(self, ax: Axiom):
        n = self.n
        match ax:
            case SubClassOf(sub, sup):
                return z3.And([z3.Implies(self.ext(sub, i), self.ext(sup, i)) for i in range(n)])
            case SubRoleOf(sub, sup):
                return z3.And(
                    [z3.Implies(self.role(sub, i, j), self.role(sup, i, j)) for i in range(n) for j in range(n)]
                )
            case Trans():
                return z3.BoolVal(True)  # enforced structurally
            case ClassAssertion(c, a):
                return self.at(a, lambda i: self.ext(c, i))
            case RoleAssertion(r, a, b):
                return self.at(a, lambda i: self.at(b, lambda j: self.role(r, i, j)))
            case NegRoleAssertion(r, a, b):
                return self.at(a, lambda i: self.at(b, lambda j: z3.Not(self.role(r, i, j))))
            case SameAs(members):
                return z3.And([self.ind[a] == self.ind[b] for a, b in zip(members, members[1:])])
            case DifferentFrom(a, b):
                return self.ind[a] != self.ind[b]
        raise TypeError(ax)


def _signature(axioms):
    cs, rs, inds = set(), set(), set()
    for ax in axioms:
        c, r, i = names_in(ax)
        cs |= c
        rs |= r
        inds |= i
        inds |= {a for a in axiom_individuals(ax) if isinstance(a, str)}
    return sorted(cs), sorted(rs), sorted(inds)


def _transitive(axioms, roles):
    """Roles that must be interpreted transitively (asserted or equivalent)."""
    trans = {ax.role.name for ax in axioms if isinstance(ax, Trans) and isinstance(ax.role, Role)}
    return trans


def has_model(axioms, max_size: int = 4, extra=None) -> bool:
    """Does ``axioms`` (plus the z3 formula builder ``extra``) have a model of size ≤ max_size?"""
    axioms = tuple(axioms)
    concepts, roles, inds = _signature(axioms)
    trans = _transitive(axioms, roles)
    for n in range(1, max_size + 1):
        m = _Model(n, concepts, roles, inds, trans)
        s = z3.Solver()
        s.add(*m.base)
        for ax in axioms:
            s.add(m.holds(ax))
        if extra is not None:
            s.add(extra(m))
        if s.check() == z3.sat:
            return True
    return False


def entails(onto: Ontology, ax: Axiom, max_size: int = 4) -> bool:
    """``O ⊨ ax`` unless a countermodel with at most ``max_size`` elements exists."""
    axioms = onto.axioms
    concepts, roles, inds = _signature(axioms + (ax,))
    trans = _transitive(axioms, roles)
    for n in range(1, max_size + 1):
        m = _Model(n, concepts, roles, inds, trans)
        s = z3.Solver()
        s.add(*m.base)
        for a in axioms:
            s.add(m.holds(a))
        s.add(z3.Not(m.holds(ax)))
        if s.check() == z3.sat:
            return False
    return True


def consistent(onto: Ontology, max_size: int = 4) -> bool:
    return has_model(onto.axioms, max_size)
