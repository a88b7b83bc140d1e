"""Reasoner front end: consistency, entailment, classification, pre-models.

Ground axioms are compiled into a :class:`~.tableau.Problem` once per
ontology.  Every entailment test is a consistency test of the ontology
extended by a few assertions that encode the negated axiom, using reserved
names (prefixed with ``§``) for the fresh individuals and concepts it needs.
"""

from __future__ import annotations

import time
from collections import defaultdict
from dataclasses import dataclass, field, replace

from ..errors import UnsupportedConstruct
from ..roles import RoleHierarchyClosure, role_hierarchy_closure
from ..syntax import (
    BOTTOM,
    RESERVED_PREFIX,
    TOP,
    TOP_ROLE,
    And,
    Axiom,
    BottomRole,
    ClassAssertion,
    DifferentFrom,
    Forall,
    Inverse,
    Name,
    NegRoleAssertion,
    Not,
    Ontology,
    Role,
    RoleAssertion,
    RoleTerm,
    SameAs,
    SubClassOf,
    SubRoleOf,
    TopRole,
    Trans,
    concept_roles,
    is_ground,
)
from .concepts import ATOM, ConceptTable
from .tableau import Problem, RBoxView, Tableau

CATEGORIES = ("concept", "role", "equality", "other")


def category_of(ax: Axiom) -> str:
    """Template category used for cost bookkeeping."""
    if isinstance(ax, ClassAssertion):
        return "concept"
    if isinstance(ax, (RoleAssertion, NegRoleAssertion)):
        return "role"
    if isinstance(ax, (SameAs, DifferentFrom)):
        return "equality"
    return "other"


@dataclass
class ReasonerCounters:
    """Work done by one reasoner session; all fields only ever grow."""

    consistency_checks: int = 0
    entailment_calls: int = 0
    label_lookups: int = 0
    check_time: dict[str, float] = field(default_factory=lambda: dict.fromkeys(CATEGORIES, 0.0))
    check_count: dict[str, int] = field(default_factory=lambda: dict.fromkeys(CATEGORIES, 0))

    def merged(self, other: "ReasonerCounters") -> "ReasonerCounters":
        return ReasonerCounters(
            self.consistency_checks + other.consistency_checks,
            self.entailment_calls + other.entailment_calls,
            self.label_lookups + other.label_lookups,
            {k: self.check_time[k] + other.check_time[k] for k in CATEGORIES},
            {k: self.check_count[k] + other.check_count[k] for k in CATEGORIES},
        )


@dataclass(frozen=True)
class PreModel:
    """Abstraction of the model found by a successful consistency check.

    Provenance flags are ``True`` for nondeterministically derived entries.
    Only named individuals are exposed; ``nodes`` counts all graph nodes.
    """

    individuals: tuple[str, ...]
    rep: dict[str, int]
    concept_labels: dict[str, dict[str, bool]]
    label_sets: dict[str, frozenset[tuple[int, bool]]]
    edge_labels: dict[tuple[str, str], dict[str, bool]]
    same: dict[tuple[str, str], bool]
    nodes: int

    def types(self, a: str, include_reserved: bool = False) -> dict[str, bool]:
        lab = self.concept_labels.get(a, {})
        if include_reserved:
            return dict(lab)
        return {c: nd for c, nd in lab.items() if not c.startswith(RESERVED_PREFIX)}


def _fresh(*parts: str) -> str:
    # "|" cannot occur in parsed identifiers, so fresh names never collide.
    return RESERVED_PREFIX + "|".join(parts)


class Reasoner:
    """Decision procedure for one ontology.

    ``node_budget`` bounds the number of completion-graph nodes created in a
    single tableau run; exceeding it raises :class:`ResourceLimit`.
    """

    def __init__(self, onto: Ontology, node_budget: int = 100_000):
        self.onto = onto
        self.node_budget = node_budget
        self.closure: RoleHierarchyClosure = role_hierarchy_closure(onto)
        self.table = ConceptTable()
        self.counters = ReasonerCounters()
        self.role_names = sorted(onto.signature.role_names)
        self.concept_names = sorted(onto.signature.concept_names)
        self.individuals = sorted(onto.signature.individual_names)
        self._uses_top_role = onto.uses_top_role()
        self.rbox = self._compile_rbox()
        self._base = self._compile(onto.axioms, Problem(individuals=list(self.individuals)))
        self._tbox_only = self._compile(onto.tbox + onto.rbox, Problem())
        self._cache: dict[Axiom, bool] = {}
        self._consistent: bool | None = None
        self._premodel: PreModel | None = None

    # ------------------------------------------------------------------
    # compilation
    # ------------------------------------------------------------------
    def _compile_rbox(self) -> RBoxView:
        for ax in self.onto.rbox:
            if isinstance(ax, SubRoleOf):
                self._named_inclusion(ax.sub, ax.sup)
        supers = {}
        for r in self.role_names:
            supers[r] = frozenset(s.name for s in self.closure.supers(Role(r)) if isinstance(s, Role))
        transitive = frozenset(r for r in self.role_names if self.closure.is_transitive(Role(r)))
        return RBoxView(supers, transitive)

    @staticmethod
    def _named_inclusion(sub: RoleTerm, sup: RoleTerm) -> tuple[RoleTerm, RoleTerm]:
        """Normalise ``inv(r) ⊑ inv(s)`` to ``r ⊑ s``; reject mixed inclusions."""
        if isinstance(sub, Inverse) and isinstance(sup, Inverse):
            return sub.role, sup.role
        if isinstance(sub, Inverse) and not isinstance(sup, TopRole) or (
            isinstance(sup, Inverse) and not isinstance(sub, BottomRole)
        ):
            raise UnsupportedConstruct("inverse role", f"role inclusion {sub} ⊑ {sup}")
        if isinstance(sub, TopRole) and not isinstance(sup, TopRole):
            raise UnsupportedConstruct("TopRole as sub-role", f"role inclusion {sub} ⊑ {sup}")
        return sub, sup

    def _compile(self, axioms, problem: Problem) -> Problem:
        t = self.table
        inds = problem.individuals
        known = set(inds)

        def ind(a: str) -> str:
            if a not in known:
                known.add(a)
                inds.append(a)
            return a

        for ax in axioms:
            match ax:
                case SubClassOf(sub, sup):
                    lhs, rhs = t.intern(sub), t.intern(sup)
                    if rhs == t.top or lhs == t.bot:
                        continue
                    if t.kind[lhs] == ATOM:
                        problem.absorbed.setdefault(t.data[lhs][0], []).append(rhs)
                    elif lhs == t.top:
                        problem.globals.append(rhs)
                    else:
                        problem.globals.append(t.disj([t.neg(lhs), rhs]))
                case SubRoleOf(sub, sup):
                    sub, sup = self._named_inclusion(sub, sup)
                    if isinstance(sup, BottomRole) and isinstance(sub, Role):
                        problem.globals.append(t.all(sub.name, t.bot))
                case Trans():
                    pass
                case ClassAssertion(c, a):
                    problem.assertions.append((ind(a), t.intern(c)))
                case RoleAssertion(r, a, b):
                    if isinstance(r, Inverse):
                        r, a, b = r.role, b, a
                    if isinstance(r, Role):
                        problem.edges.append((r.name, ind(a), ind(b)))
                    elif isinstance(r, BottomRole):
                        problem.inconsistent = True
                    else:
                        ind(a), ind(b)
                case NegRoleAssertion(r, a, b):
                    if isinstance(r, Inverse):
                        r, a, b = r.role, b, a
                    if isinstance(r, Role):
                        problem.neg_edges.append((r.name, ind(a), ind(b)))
                    elif isinstance(r, TopRole):
                        problem.inconsistent = True
                    else:
                        ind(a), ind(b)
                case SameAs(members):
                    for a, b in zip(members, members[1:]):
                        problem.same.append((ind(a), ind(b)))
                case DifferentFrom(a, b):
                    if a == b:
                        problem.inconsistent = True
                    problem.different.append((ind(a), ind(b)))
                case _:
                    raise TypeError(f"not an axiom: {ax!r}")
        return problem

    @staticmethod
    def _copy(p: Problem) -> Problem:
        return replace(
            p,
            absorbed={k: list(v) for k, v in p.absorbed.items()},
            globals=list(p.globals),
            individuals=list(p.individuals),
            assertions=list(p.assertions),
            edges=list(p.edges),
            neg_edges=list(p.neg_edges),
            same=list(p.same),
            different=list(p.different),
        )

    # ------------------------------------------------------------------
    # running the tableau
    # ------------------------------------------------------------------
    def _run(self, extra, base: Problem | None = None) -> Tableau | None:
        problem = self._compile(extra, self._copy(base or self._base))
        self.counters.consistency_checks += 1
        tab = Tableau(self.table, self.rbox, problem, self.node_budget)
        return tab if tab.run() else None

    def _premodel_of(self, tab: Tableau) -> PreModel:
        t = self.table
        rep: dict[str, int] = {}
        chain_nd: dict[str, bool] = {}
        for a in tab.p.individuals:
            x, _, nd = tab.rep(tab.node_of[a])
            rep[a] = x
            chain_nd[a] = nd
        concept_labels: dict[str, dict[str, bool]] = {}
        label_sets: dict[str, frozenset[tuple[int, bool]]] = {}
        for a, x in rep.items():
            lab = tab.labels[x]
            label_sets[a] = frozenset((cid, nd or chain_nd[a]) for cid, (_, nd) in lab.items())
            concept_labels[a] = {
                t.data[cid][0]: nd or chain_nd[a] for cid, (_, nd) in lab.items() if t.kind[cid] == ATOM
            }
        edge_labels: dict[tuple[str, str], dict[str, bool]] = {}
        for a, x in rep.items():
            for b, y in rep.items():
                row = tab.succ[x].get(y)
                if row:
                    extra_nd = chain_nd[a] or chain_nd[b]
                    edge_labels[(a, b)] = {r: nd or extra_nd for r, (_, nd) in row.items()}
        same: dict[tuple[str, str], bool] = {}
        names = list(rep)
        for i, a in enumerate(names):
            for b in names[i + 1 :]:
                if rep[a] == rep[b]:
                    key = (a, b) if a < b else (b, a)
                    same[key] = chain_nd[a] or chain_nd[b]
        return PreModel(tuple(tab.p.individuals), rep, concept_labels, label_sets, edge_labels, same, len(tab.labels))

    def check_consistency(self, extra: tuple[Axiom, ...] = ()) -> tuple[bool, PreModel | None]:
        """Decide whether the ontology plus ``extra`` has a model."""
        tab = self._run(extra)
        if tab is None:
            return False, None
        return True, self._premodel_of(tab)

    def is_consistent(self) -> bool:
        if self._consistent is None:
            ok, pm = self.check_consistency()
            self._consistent = ok
            self._premodel = pm
        return self._consistent

    def premodel(self) -> PreModel | None:
        self.is_consistent()
        return self._premodel

    # ------------------------------------------------------------------
    # entailment
    # ------------------------------------------------------------------
    def is_entailed(self, ax: Axiom) -> bool:
        """True iff every model of the ontology satisfies the ground axiom ``ax``."""
        if not is_ground(ax):
            raise ValueError(f"entailment test needs a ground axiom: {ax}")
        self.counters.entailment_calls += 1
        hit = self._cache.get(ax)
        if hit is not None:
            return hit
        cat = category_of(ax)
        start = time.perf_counter()
        result = self._decide(ax)
        self.counters.check_time[cat] += time.perf_counter() - start
        self.counters.check_count[cat] += 1
        self._cache[ax] = result
        return result

    def _unsat(self, extra, base: Problem | None = None) -> bool:
        return self._run(extra, base) is None

    def _decide(self, ax: Axiom) -> bool:
        if not self.is_consistent():
            return True
        match ax:
            case SubClassOf(sub, sup):
                x = _fresh("x")
                uses_u = self._uses_top_role or any(
                    isinstance(r, TopRole) for c in (sub, sup) for r in concept_roles(c)
                )
                base = self._base if uses_u else self._tbox_only
                return self._unsat((ClassAssertion(And((sub, Not(sup))), x),), base)
            case ClassAssertion(c, a):
                return self._unsat((ClassAssertion(Not(c), a),))
            case RoleAssertion(r, a, b):
                if isinstance(r, Inverse):
                    r, a, b = r.role, b, a
                if isinstance(r, TopRole):
                    return True
                if isinstance(r, BottomRole):
                    return False
                marker = Name(_fresh("A", b))
                return self._unsat((ClassAssertion(marker, b), ClassAssertion(Forall(r, Not(marker)), a)))
            case NegRoleAssertion(r, a, b):
                if isinstance(r, Inverse):
                    r, a, b = r.role, b, a
                return self._unsat((RoleAssertion(r, a, b),))
            case SameAs(members):
                return all(
                    a == b or self._unsat((DifferentFrom(a, b),)) for a, b in zip(members, members[1:])
                )
            case DifferentFrom(a, b):
                if a == b:
                    return False
                return self._unsat((SameAs((a, b)),))
            case SubRoleOf(sub, sup):
                return self._role_subsumed(sub, sup)
            case Trans():
                raise UnsupportedConstruct("transitivity axiom in a query")
        raise TypeError(f"not an axiom: {ax!r}")

    def _role_subsumed(self, sub: RoleTerm, sup: RoleTerm) -> bool:
        if isinstance(sub, Inverse) and isinstance(sup, Inverse):
            sub, sup = sub.role, sup.role
        if isinstance(sub, Inverse) or isinstance(sup, Inverse):
            raise UnsupportedConstruct("inverse role", f"{sub} ⊑ {sup}")
        if self.closure.subsumes(sub, sup):
            return True
        x, y = _fresh("x"), _fresh("y")
        marker = Name(_fresh("A", y))
        extra: list[Axiom] = [ClassAssertion(marker, y)]
        if isinstance(sup, BottomRole):
            extra = []
        else:
            extra.append(ClassAssertion(Forall(sup, Not(marker)), x))
        if isinstance(sub, TopRole):
            # Universal role: every pair, in particular (x, y), must be in sup.
            extra.append(ClassAssertion(TOP, x))
        else:
            extra.append(RoleAssertion(sub, x, y))
        return self._unsat(tuple(extra))

    # ------------------------------------------------------------------
    # classification
    # ------------------------------------------------------------------
    def concept_subsumers(self) -> dict[str, set[str]]:
        """For each concept name, the set of concept names subsuming it.

        Unsatisfiable names map to ``None`` in the returned dictionary's
        companion set :attr:`unsatisfiable`.
        """
        subsumers: dict[str, set[str]] = {}
        self.unsatisfiable: set[str] = set()
        x = _fresh("x")
        for a in self.concept_names:
            base = self._base if self._uses_top_role else self._tbox_only
            problem = self._compile((ClassAssertion(Name(a), x),), self._copy(base))
            self.counters.consistency_checks += 1
            tab = Tableau(self.table, self.rbox, problem, self.node_budget)
            if not tab.run():
                self.unsatisfiable.add(a)
                continue
            node, _, chain = tab.rep(tab.node_of[x])
            found = {a}
            for cid, (_, nd) in tab.labels[node].items():
                if self.table.kind[cid] != ATOM:
                    continue
                b = self.table.data[cid][0]
                if b == a or b.startswith(RESERVED_PREFIX):
                    continue
                if not (nd or chain) or self.is_entailed(SubClassOf(Name(a), Name(b))):
                    found.add(b)
            subsumers[a] = found
        return subsumers

    def classify(self):
        """Concept and role hierarchies of a consistent ontology."""
        from ..hierarchy import Hierarchy

        subs = self.concept_subsumers()
        sat = [a for a in self.concept_names if a not in self.unsatisfiable]
        top_equiv = set()
        for a in sat:
            # Only a name subsuming every satisfiable name can be equivalent to Top.
            if all(a in subs[b] for b in sat) and self.is_entailed(SubClassOf(TOP, Name(a))):
                top_equiv.add(a)
        leq: dict = defaultdict(set)
        for a in sat:
            leq[Name(a)] = {Name(b) for b in subs[a]} | {TOP}
        for a in self.unsatisfiable:
            leq[Name(a)] = {BOTTOM}
        leq[TOP] = {TOP} | {Name(a) for a in top_equiv}
        leq[BOTTOM] = {BOTTOM}
        for a in top_equiv:
            leq[Name(a)] |= leq[TOP]
        concepts = Hierarchy.from_leq(leq, TOP, BOTTOM)

        rleq: dict = defaultdict(set)
        empty = set()
        for r in self.role_names:
            if self._role_subsumed(Role(r), BottomRole()):
                empty.add(r)
        universal = set()
        if self._uses_top_role:
            universal = {r for r in self.role_names if r not in empty and self._role_subsumed(TOP_ROLE, Role(r))}
        for r in self.role_names:
            if r in empty:
                continue
            rleq[Role(r)] = {Role(r), TOP_ROLE}
            for s in self.role_names:
                if s != r and (s in universal or self._role_subsumed(Role(r), Role(s))):
                    rleq[Role(r)].add(Role(s))
        for r in empty:
            rleq[Role(r)] = {BottomRole()}
        rleq[TOP_ROLE] = {TOP_ROLE} | {Role(r) for r in universal}
        for r in universal:
            rleq[Role(r)] |= rleq[TOP_ROLE]
        rleq[BottomRole()] = {BottomRole()}
        roles = Hierarchy.from_leq(rleq, TOP_ROLE, BottomRole())
        return concepts, roles

    # ------------------------------------------------------------------
    # non-simple roles
    # ------------------------------------------------------------------
    def transitive_successor_marker(self, a: str, r: str) -> str:
        return _fresh("C", a, r)

    def encode_transitive_successors(self, a: str, r: str, onto: Ontology | None = None) -> Ontology:
        """Add ``C_a(a)`` and ``C_a ⊑ ∀r.C_a^r`` so r-successors of a become C_a^r instances."""
        if self.closure.is_simple(Role(r)):
            raise ValueError(f"role {r} is simple; read its edges directly")
        base = onto or self.onto
        ca = Name(_fresh("C", a))
        car = Name(self.transitive_successor_marker(a, r))
        return base.with_axioms(ClassAssertion(ca, a), SubClassOf(ca, Forall(Role(r), car)))

    def transitive_successors(self, r: str) -> dict[tuple[str, str], bool]:
        """Pairs (a, b) with b a possible r-successor of a, for non-simple r.

        One augmented pre-model covers every individual at once.  The value
        is the provenance flag (``True`` for possible, ``False`` for known).
        """
        extra: list[Axiom] = []
        for a in self.individuals:
            ca = Name(_fresh("C", a))
            extra.append(ClassAssertion(ca, a))
        problem = self._compile(extra, self._copy(self._base))
        for a in self.individuals:
            ca = _fresh("C", a)
            car = self.table.atom(self.transitive_successor_marker(a, r))
            problem.absorbed.setdefault(ca, []).append(self.table.all(r, car))
        self.counters.consistency_checks += 1
        tab = Tableau(self.table, self.rbox, problem, self.node_budget)
        if not tab.run():
            return {}
        pm = self._premodel_of(tab)
        out: dict[tuple[str, str], bool] = {}
        for b in self.individuals:
            lab = pm.concept_labels[b]
            for a in self.individuals:
                nd = lab.get(self.transitive_successor_marker(a, r))
                if nd is not None:
                    out[(a, b)] = nd
        return out
