"""Query evaluation: ordering, dedicated lookups and hierarchy-pruned search.

A :class:`Session` holds everything computed once per ontology (consistency,
classification, statistics and clusters).  :func:`evaluate` then answers a
query against a session:

1. the templates are rewritten into simpler equivalent ones and split into
   connected components;
2. each component is evaluated template by template in the order chosen by
   the planner, starting from the single empty mapping;
3. for every partial solution a template is either checked directly (all
   its variables bound), answered by a dedicated lookup (simple templates),
   or answered by a search that walks the concept or role hierarchy from
   the top or the bottom and prunes subtrees that cannot contain solutions;
4. component answers are combined by cross product.

Mappings whose instantiation would leave the supported fragment are never
tested and never reported.
"""

from __future__ import annotations

import itertools
import time
from collections import deque
from collections.abc import Iterable, Iterator, Sequence
from dataclasses import dataclass, field

from .errors import InconsistentOntology, UnsupportedConstruct
from .hierarchy import Hierarchy
from .planner import (
    ExecutionPlan,
    PlanStep,
    build_join_graph,
    dynamic_step,
    static_plan,
)
from .query import (
    IDENTITY,
    Polarity,
    Query,
    Solution,
    Validity,
    check_supported,
    connected_components,
    format_solution,
    instantiate,
    is_simple,
    prunable,
    rewrite,
)
from .reasoner import Reasoner, ReasonerCounters
from .stats import StatsStore, build_clusters, build_stats, clusters_from_stats
from .syntax import (
    BOTTOM,
    BOTTOM_ROLE,
    TOP,
    TOP_ROLE,
    Axiom,
    Bottom,
    BottomRole,
    ClassAssertion,
    CVar,
    DifferentFrom,
    IVar,
    MappingValue,
    Name,
    Ontology,
    Role,
    RoleAssertion,
    RVar,
    SameAs,
    SubClassOf,
    SubRoleOf,
    Top,
    TopRole,
    Variable,
    variables,
)

MODES = ("static", "dynamic", "dynamic-sampled")
BUILTINS = (Top, Bottom, TopRole, BottomRole)


def _is_builtin(m) -> bool:
    return isinstance(m, BUILTINS)


# ---------------------------------------------------------------------------
# Preprocessing
# ---------------------------------------------------------------------------


class StatsReasoner:
    """Stand-in reasoner that answers ground atoms from statistics alone.

    Every possible instance is taken to be a real one, so counting the calls
    made by an evaluation predicts the checks a real reasoner would need.
    """

    def __init__(self, stats: StatsStore):
        self.stats = stats
        self.counters = ReasonerCounters()
        self.concept_names = list(stats.concept_names)
        self.role_names = list(stats.role_names)
        self.individuals = list(stats.individuals)

    def is_entailed(self, ax: Axiom) -> bool:
        self.counters.entailment_calls += 1
        s = self.stats
        match ax:
            case ClassAssertion(Name(c), str() as a):
                return s.concept_status(c, a) is not None
            case ClassAssertion(Top(), str()):
                return True
            case RoleAssertion(Role(r), str() as a, str() as b):
                return s.role_status(r, a, b) is not None
            case RoleAssertion(TopRole(), str(), str()):
                return True
            case SameAs((str() as a, str() as b)):
                return s.equal_status(a, b) is not None
            case SubClassOf(Name(a), Name(b)):
                return a in s.sub_closure.get(b, frozenset((b,)))
            case SubRoleOf(Role(a), Role(b)):
                return a in s.role_sub_closure.get(b, frozenset((b,)))
            case ClassAssertion(Bottom(), str()) | RoleAssertion(BottomRole(), str(), str()):
                return False
        raise UnsupportedConstruct("template outside what recorded statistics can answer", str(ax))


def _hierarchy_from_closure(closure: dict[str, frozenset[str]], wrap, top, bottom) -> Hierarchy:
    leq: dict = {wrap(n): {top} for n in closure}
    for sup, subs in closure.items():
        for sub in subs:
            leq.setdefault(wrap(sub), {top}).add(wrap(sup))
    return Hierarchy.from_leq(leq, top, bottom)


@dataclass
class Session:
    """Reasoner, hierarchies and statistics shared by every query on one ontology."""

    onto: Ontology
    reasoner: Reasoner | StatsReasoner
    concepts: Hierarchy
    roles: Hierarchy
    stats: StatsStore
    validity: Validity
    timings: dict[str, float] = field(default_factory=dict)
    simulated: bool = False

    @classmethod
    def prepare(
        cls,
        onto: Ontology,
        node_budget: int = 100_000,
        with_clusters: bool = True,
        reasoner: Reasoner | None = None,
        stats: StatsStore | None = None,
    ) -> "Session":
        """Run consistency, classification, statistics and clustering once.

        Injected ``stats`` replace the computed ones; entailment checks still
        go to the reasoner.
        """
        timings: dict[str, float] = {}
        reasoner = reasoner or Reasoner(onto, node_budget)
        t = time.perf_counter()
        consistent = reasoner.is_consistent()
        timings["consistency"] = time.perf_counter() - t
        if not consistent:
            raise InconsistentOntology("the ontology has no model")
        t = time.perf_counter()
        concepts, roles = reasoner.classify()
        timings["classify"] = time.perf_counter() - t
        t = time.perf_counter()
        injected = stats is not None
        if stats is None:
            stats = build_stats(reasoner, concepts, roles, with_clusters=False)
        timings["stats"] = time.perf_counter() - t
        t = time.perf_counter()
        if with_clusters and stats.clusters is None:
            stats.clusters = clusters_from_stats(stats) if injected else build_clusters(reasoner.premodel())
        timings["clusters"] = time.perf_counter() - t
        return cls(onto, reasoner, concepts, roles, stats, Validity(onto), timings)

    @classmethod
    def from_stats(cls, stats: StatsStore) -> "Session":
        """Planner-experiment session: no ontology, answers simulated from ``stats``."""
        concepts = _hierarchy_from_closure(
            {c: stats.sub_closure.get(c, frozenset((c,))) for c in stats.concept_names}, Name, TOP, BOTTOM
        )
        roles = _hierarchy_from_closure(
            {r: stats.role_sub_closure.get(r, frozenset((r,))) for r in stats.role_names}, Role, TOP_ROLE, BOTTOM_ROLE
        )
        if stats.clusters is None:
            stats.clusters = clusters_from_stats(stats)
        onto = Ontology()
        timings = dict.fromkeys(("consistency", "classify", "stats", "clusters"), 0.0)
        return cls(onto, StatsReasoner(stats), concepts, roles, stats, Validity(onto), timings, simulated=True)

    def concept_values(self, include_bottom: bool) -> tuple[MappingValue, ...]:
        names = tuple(Name(c) for c in self.reasoner.concept_names)
        return ((TOP, BOTTOM) + names) if include_bottom else names

    def role_values(self, include_bottom: bool) -> tuple[MappingValue, ...]:
        names = tuple(Role(r) for r in self.reasoner.role_names)
        return ((TOP_ROLE, BOTTOM_ROLE) + names) if include_bottom else names

    def values(self, v: Variable, include_bottom: bool) -> tuple[MappingValue, ...]:
        if isinstance(v, CVar):
            return self.concept_values(include_bottom)
        if isinstance(v, RVar):
            return self.role_values(include_bottom)
        return tuple(self.reasoner.individuals)


# ---------------------------------------------------------------------------
# Instrumentation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StepReport:
    """What evaluating one template cost."""

    component: int
    step: PlanStep
    inputs: int
    outputs: int
    entailment_checks: int
    lookups: int
    skipped_invalid: int
    seconds: float


@dataclass(frozen=True)
class Evaluation:
    answers: frozenset[Solution]
    mode: str
    templates: tuple[Axiom, ...]
    components: tuple[tuple[Axiom, ...], ...]
    steps: tuple[StepReport, ...]
    skipped_final: int = 0

    @property
    def entailment_checks(self) -> int:
        return sum(s.entailment_checks for s in self.steps)

    @property
    def lookups(self) -> int:
        return sum(s.lookups for s in self.steps)

    @property
    def skipped_invalid(self) -> int:
        return sum(s.skipped_invalid for s in self.steps) + self.skipped_final

    @property
    def seconds(self) -> float:
        return sum(s.seconds for s in self.steps)

    @property
    def plan(self) -> tuple[Axiom, ...]:
        return tuple(s.step.template for s in self.steps)

    def rows(self) -> list[str]:
        return sorted(format_solution(mu) for mu in self.answers)

    def explain(self) -> str:
        lines = [f"mode\t{self.mode}", f"templates\t{len(self.templates)}", f"components\t{len(self.components)}"]
        for r in self.steps:
            lines.append(
                f"step\t{r.component}\t{r.step.template}\tcost={r.step.cost}\tin={r.inputs}\tout={r.outputs}"
                f"\tchecks={r.entailment_checks}\tlookups={r.lookups}\tskipped={r.skipped_invalid}"
            )
            for at, c in r.step.candidates:
                lines.append(f"  candidate\t{at}\t{c}")
        lines.append(f"total\tchecks={self.entailment_checks}\tlookups={self.lookups}\tskipped={self.skipped_invalid}")
        return "\n".join(lines)


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------


class _Evaluator:
    def __init__(self, session: Session, prune: bool, include_bottom: bool):
        self.s = session
        self.stats = session.stats
        self.reasoner = session.reasoner
        self.prune = prune
        self.include_bottom = include_bottom
        self.lookups = 0
        self.skipped = 0
        self.inds = tuple(session.reasoner.individuals)
        self.known_inds = frozenset(session.stats.individuals)
        self.concept_names = frozenset(session.stats.concept_names)
        self.role_names = frozenset(session.stats.role_names)
        self.cvalues = session.concept_values(include_bottom)
        self.rvalues = session.role_values(include_bottom)
        self._cdomain = frozenset(self.cvalues)
        self._rdomain = frozenset(self.rvalues)

    # -- helpers -------------------------------------------------------
    def in_domain(self, v: Variable, x: MappingValue) -> bool:
        if isinstance(v, CVar):
            return x in self._cdomain
        if isinstance(v, RVar):
            return x in self._rdomain
        return True

    def values(self, v: Variable) -> tuple[MappingValue, ...]:
        if isinstance(v, CVar):
            return self.cvalues
        if isinstance(v, RVar):
            return self.rvalues
        return self.inds

    def entailed(self, ax: Axiom) -> bool:
        return self.reasoner.is_entailed(ax)

    def holds(self, ax: Axiom) -> bool:
        """Entailment of a ground instantiation, using recorded statuses first."""
        if not self.s.validity.valid((ax,)):
            self.skipped += 1
            return False
        st = self.stats
        status = "unknown"
        match ax:
            case ClassAssertion(Name(c), str() as a) if c in self.concept_names and a in self.known_inds:
                status = st.concept_status(c, a)
            case RoleAssertion(Role(r), str() as a, str() as b) if (
                r in self.role_names and a in self.known_inds and b in self.known_inds
            ):
                status = st.role_status(r, a, b)
            case SameAs((str() as a, str() as b)) if a in self.known_inds and b in self.known_inds:
                status = st.equal_status(a, b)
        if status == "known":
            self.lookups += 1
            return True
        if status is None:
            self.lookups += 1
            return False
        return self.entailed(ax)

    # -- one template over the current solutions ------------------------
    def step(self, at: Axiom, solutions: Sequence[Solution]) -> list[Solution]:
        out: dict[Solution, None] = {}
        simple = is_simple(at)
        for mu in solutions:
            inst = instantiate(at, mu)
            if not variables(inst):
                if self.holds(inst):
                    out[mu] = None
                continue
            exts = self.simple(inst) if simple else self.search(inst)
            for ext in exts:
                out[mu | ext] = None
        return list(out)

    # -- dedicated tasks for simple templates ----------------------------
    def simple(self, at: Axiom) -> Iterator[Solution]:
        match at:
            case ClassAssertion(Name(c), IVar() as x):
                if c not in self.concept_names:
                    return
                for a in sorted(self.stats.known(c)):
                    self.lookups += 1
                    yield frozenset({(x, a)})
                for a in sorted(self.stats.possible(c)):
                    if self.entailed(ClassAssertion(Name(c), a)):
                        yield frozenset({(x, a)})
            case ClassAssertion(CVar() as x, str() as a):
                for c in self.types_of(a):
                    yield frozenset({(x, c)})
            case ClassAssertion(CVar() as x, IVar() as y):
                for a in self.inds:
                    for c in self.types_of(a):
                        yield frozenset({(x, c), (y, a)})
            case ClassAssertion(concept, IVar() as x):
                for a in self.inds:
                    if self.holds(ClassAssertion(concept, a)):
                        yield frozenset({(x, a)})
            case RoleAssertion(Role(r), s, t):
                yield from self.role_pairs(r, s, t)
            case RoleAssertion(RVar() as z, s, t):
                for v in self.rvalues:
                    if isinstance(v, Role):
                        exts = self.role_pairs(v.name, s, t) if variables(at) - {z} else (
                            [frozenset()] if self.holds(RoleAssertion(v, s, t)) else []
                        )
                    else:
                        exts = self.builtin_role_pairs(v, s, t)
                    for ext in exts:
                        yield ext | {(z, v)}
            case RoleAssertion(TopRole() | BottomRole() as v, s, t):
                yield from self.builtin_role_pairs(v, s, t)
            case SameAs((s, t)):
                yield from self.equalities(s, t)
            case DifferentFrom(s, t):
                for ext in self.assignments([v for v in (s, t) if isinstance(v, IVar)]):
                    m = dict(ext)
                    a, b = m.get(s, s), m.get(t, t)
                    if a == b or self.stats.equal_status(a, b) == "known":
                        self.lookups += 1
                        continue
                    if self.holds(DifferentFrom(a, b)):
                        yield ext
            case SubClassOf(sub, sup) if isinstance(sub, CVar) or isinstance(sup, CVar):
                found = self.inclusions(sub, sup, self.s.concepts, CVar)
                yield from (found if found is not None else self.search(at))
            case SubRoleOf(sub, sup):
                found = self.inclusions(sub, sup, self.s.roles, RVar)
                yield from (found if found is not None else self.search(at))
            case _:
                yield from self.search(at)

    def types_of(self, a: str) -> Iterator[MappingValue]:
        for v in self.cvalues:
            if isinstance(v, Top):
                self.lookups += 1
                yield v
            elif isinstance(v, Bottom):
                self.lookups += 1
            elif a in self.known_inds and v.name in self.concept_names:
                if self.holds(ClassAssertion(v, a)):
                    yield v
            elif self.entailed(ClassAssertion(v, a)):
                yield v

    def assignments(self, vs: Sequence[Variable]) -> Iterator[Solution]:
        vs = list(dict.fromkeys(vs))
        for combo in itertools.product(*(self.values(v) for v in vs)):
            yield frozenset(zip(vs, combo))

    def role_pairs(self, r: str, s, t) -> Iterator[Solution]:
        st = self.stats
        if r not in self.role_names:
            return
        if isinstance(s, str) and isinstance(t, str):
            if self.holds(RoleAssertion(Role(r), s, t)):
                yield frozenset()
            return
        if isinstance(s, str) or isinstance(t, str):
            a, var = (s, t) if isinstance(s, str) else (t, s)
            forward = isinstance(s, str)
            known = st.suc_k(r, a) if forward else st.pre_k(r, a)
            possible = st.suc_p(r, a) if forward else st.pre_p(r, a)
            for b in sorted(known):
                self.lookups += 1
                yield frozenset({(var, b)})
            for b in sorted(possible):
                ax = RoleAssertion(Role(r), a, b) if forward else RoleAssertion(Role(r), b, a)
                if self.entailed(ax):
                    yield frozenset({(var, b)})
            return
        for pairs, confirm in ((st.role_k(r), False), (st.role_p(r), True)):
            for a, b in sorted(pairs):
                if s == t and a != b:
                    continue
                if confirm:
                    if not self.entailed(RoleAssertion(Role(r), a, b)):
                        continue
                else:
                    self.lookups += 1
                yield frozenset({(s, a), (t, b)})

    def builtin_role_pairs(self, v, s, t) -> Iterator[Solution]:
        self.lookups += 1
        if isinstance(v, BottomRole):
            return
        yield from self.assignments([x for x in (s, t) if isinstance(x, IVar)])

    def equalities(self, s, t) -> Iterator[Solution]:
        st = self.stats
        if isinstance(s, str) or isinstance(t, str):
            a, var = (s, t) if isinstance(s, str) else (t, s)
            if a not in self.known_inds:
                return
            self.lookups += 1
            yield frozenset({(var, a)})
            for b in sorted(st.eq_k(a)):
                self.lookups += 1
                yield frozenset({(var, b)})
            for b in sorted(st.eq_p(a)):
                if self.entailed(SameAs((a, b))):
                    yield frozenset({(var, b)})
            return
        for a in self.inds:
            self.lookups += 1
            if s == t:
                yield frozenset({(s, a)})
                continue
            yield frozenset({(s, a), (t, a)})
            for b in sorted(st.eq_k(a)):
                self.lookups += 1
                yield frozenset({(s, a), (t, b)})
            for b in sorted(st.eq_p(a)):
                if self.entailed(SameAs((a, b))):
                    yield frozenset({(s, a), (t, b)})

    def inclusions(self, sub, sup, hier: Hierarchy, var_type) -> list[Solution] | None:
        """Inclusions between names and variables read off a hierarchy."""
        sub_var, sup_var = isinstance(sub, var_type), isinstance(sup, var_type)
        if not sub_var and sub not in hier or not sup_var and sup not in hier:
            return None
        domain = self._cdomain if var_type is CVar else self._rdomain
        values = self.cvalues if var_type is CVar else self.rvalues
        out: list[Solution] = []
        if sub_var and sup_var:
            for x in values:
                if sub == sup:
                    self.lookups += 1
                    out.append(frozenset({(sub, x)}))
                    continue
                for y in sorted(hier.supers(x) & domain, key=str):
                    self.lookups += 1
                    out.append(frozenset({(sub, x), (sup, y)}))
        elif sub_var:
            for x in sorted(hier.subs(sup) & domain, key=str):
                self.lookups += 1
                out.append(frozenset({(sub, x)}))
        else:
            for y in sorted(hier.supers(sub) & domain, key=str):
                self.lookups += 1
                out.append(frozenset({(sup, y)}))
        return out

    # -- hierarchy-pruned search ----------------------------------------
    def optimization_variables(self, at: Axiom) -> dict[Variable, Polarity]:
        if not self.prune:
            return {}
        out = {}
        for v in sorted(variables(at), key=str):
            pol = prunable(v, at)
            if pol is not None:
                out[v] = pol
        return out

    def hierarchy(self, v: Variable) -> Hierarchy:
        return self.s.concepts if isinstance(v, CVar) else self.s.roles

    def initialize_variable_mappings(self, at: Axiom, opt: dict[Variable, Polarity]) -> list[dict]:
        """Seeds: ⊤ or ⊤_r for positive, ⊥ or ⊥_r for negative variables; others enumerated."""
        seeds = {}
        for v, pol in opt.items():
            h = self.hierarchy(v)
            seeds[v] = h.top_class if pol is Polarity.POS else h.bottom_class
        plain = [v for v in sorted(variables(at), key=str) if v not in opt]
        out = []
        for combo in itertools.product(*(self.values(v) for v in plain)):
            state = dict(seeds)
            state.update(zip(plain, combo))
            out.append(state)
        return out

    def get_possible_mappings(self, v: Variable, pol: Polarity, state: dict) -> list[dict]:
        """Direct subclasses (positive) or superclasses (negative) of ``state[v]``."""
        h = self.hierarchy(v)
        rep = h.representative(state[v])
        nxt = h.direct_children(rep) if pol is Polarity.POS else h.direct_parents(rep)
        return [{**state, v: cls} for cls in nxt]

    def search(self, at: Axiom) -> Iterator[Solution]:
        opt = self.optimization_variables(at)
        queue = deque(self.initialize_variable_mappings(at, opt))
        visited: set[frozenset] = set()
        while queue:
            state = queue.popleft()
            key = frozenset(state.items())
            if key in visited:
                continue
            visited.add(key)
            builtin_only = not self.include_bottom and any(all(map(_is_builtin, state[v])) for v in opt)
            mu = {v: (self.hierarchy(v).representative(x) if v in opt else x) for v, x in state.items()}
            expand = True
            if not builtin_only:
                inst = instantiate(at, frozenset(mu.items()))
                if not self.s.validity.valid((inst,)):
                    self.skipped += 1
                elif self.entailed(inst):
                    plain = [(v, x) for v, x in mu.items() if v not in opt]
                    members = [
                        [(v, m) for m in sorted(state[v], key=str) if self.in_domain(v, m)] for v in opt
                    ]
                    for combo in itertools.product(*members):
                        yield frozenset(plain) | frozenset(combo)
                else:
                    expand = False
            if expand:
                for v, pol in opt.items():
                    queue.extend(self.get_possible_mappings(v, pol, state))


def _cross(parts: Sequence[Sequence[Solution]]) -> set[Solution]:
    out: set[Solution] = {IDENTITY}
    for part in parts:
        out = {a | b for a in out for b in part}
    return out


def evaluate(
    session: Session,
    query: Query | Iterable[Axiom],
    mode: str = "static",
    *,
    rewrite_templates: bool = True,
    prune: bool = True,
    include_bottom: bool = False,
) -> Evaluation:
    """All solution mappings of ``query`` over the session's ontology."""
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}; expected one of {', '.join(MODES)}")
    query = query if isinstance(query, Query) else Query(tuple(query))
    check_supported(query)
    templates = rewrite(query) if rewrite_templates else query
    components = connected_components(templates)
    ev = _Evaluator(session, prune, include_bottom)
    clusters = None
    if mode == "dynamic-sampled":
        clusters = session.stats.clusters or clusters_from_stats(session.stats)
    counters = session.reasoner.counters
    reports: list[StepReport] = []
    parts: list[list[Solution]] = []
    for ci, comp in enumerate(components):
        graph = build_join_graph(comp)
        planned: ExecutionPlan | None = static_plan(comp, session.stats, graph) if mode == "static" else None
        current: list[Solution] = [IDENTITY]
        chosen: list[Axiom] = []
        while len(chosen) < len(comp):
            if planned is not None:
                step = planned.steps[len(chosen)]
            else:
                step = dynamic_step(chosen, graph, current, session.stats, clusters)
            checks0, lookups0, skipped0 = counters.entailment_calls, ev.lookups, ev.skipped
            t0 = time.perf_counter()
            nxt = ev.step(step.template, current)
            reports.append(
                StepReport(
                    ci,
                    step,
                    len(current),
                    len(nxt),
                    counters.entailment_calls - checks0,
                    ev.lookups - lookups0,
                    ev.skipped - skipped0,
                    time.perf_counter() - t0,
                )
            )
            current = nxt
            chosen.append(step.template)
        parts.append(current)
    combined = _cross(parts)
    answers = {mu for mu in combined if session.validity.valid(instantiate(at, mu) for at in query)}
    return Evaluation(
        frozenset(answers),
        mode,
        tuple(templates),
        tuple(components),
        tuple(reports),
        skipped_final=len(combined) - len(answers),
    )


__all__ = [
    "MODES",
    "Evaluation",
    "Session",
    "StatsReasoner",
    "StepReport",
    "evaluate",
]
