"""Cost estimation and execution-plan construction.

Every template gets a pair ⟨Ec, Rs⟩: the estimated reasoning cost (lookups
at ``C_L`` and entailment checks at ``C_E``) and the estimated number of
mappings it produces.  Plans are built greedily from the candidates that are
connected to the templates already chosen, always taking the candidate with
the smallest ``Ec + Rs`` and breaking ties by the template's text.

* :func:`static_cost` estimates a template given which of its variables are
  bound, using only the known/possible statistics.
* :func:`dynamic_cost` sums static costs over the instantiations of a
  template by the solutions computed so far.
* :func:`sampled_cost` does the same but prices one representative per
  individual cluster and multiplies by the cluster's share of the solutions.
"""

from __future__ import annotations

import math
from collections import Counter
from collections.abc import Callable, Iterable, Sequence
from dataclasses import dataclass, field

from .errors import UnsupportedConstruct
from .query import Solution, instantiate, is_simple, restrict
from .reasoner.core import category_of
from .stats import Clusters, StatsStore
from .syntax import (
    Axiom,
    ClassAssertion,
    CVar,
    Inverse,
    IVar,
    Name,
    Role,
    RoleAssertion,
    RVar,
    SameAs,
    SubClassOf,
    SubRoleOf,
    Variable,
    axiom_roles,
    variables,
)

# ---------------------------------------------------------------------------
# Cost pairs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CostPair:
    """Reasoning cost ``ec`` (time units) and expected result size ``rs``."""

    ec: float
    rs: float

    def __post_init__(self) -> None:
        for v in (self.ec, self.rs):
            if not math.isfinite(v) or v < 0:
                raise ValueError(f"cost components must be finite and non-negative, got {self}")

    def __add__(self, other: "CostPair") -> "CostPair":
        return CostPair(self.ec + other.ec, self.rs + other.rs)

    def scaled(self, k: float) -> "CostPair":
        return CostPair(self.ec * k, self.rs * k)

    def divided(self, n: float) -> "CostPair":
        """Division where a zero denominator makes the whole term vanish."""
        return ZERO if n == 0 else CostPair(self.ec / n, self.rs / n)

    def combined(self, w_ec: float = 1.0, w_rs: float = 1.0) -> float:
        return w_ec * self.ec + w_rs * self.rs

    @property
    def total(self) -> float:
        return self.ec + self.rs

    def __str__(self) -> str:
        return f"⟨{self.ec:g}, {self.rs:g}⟩"


ZERO = CostPair(0.0, 0.0)


def _ratio(num: int, den: int) -> float:
    return 0.0 if den == 0 else num / den


# ---------------------------------------------------------------------------
# Join graph
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class QueryJoinGraph:
    """Templates as vertices; an edge joins two templates sharing a variable."""

    vertices: tuple[Axiom, ...]
    edges: frozenset[frozenset[Axiom]]
    edge_labels: dict[frozenset[Axiom], frozenset[Variable]] = field(hash=False, compare=False)

    def neighbours(self, at: Axiom) -> tuple[Axiom, ...]:
        return tuple(v for v in self.vertices if v != at and frozenset((at, v)) in self.edges)


def build_join_graph(query: Iterable[Axiom]) -> QueryJoinGraph:
    vertices = tuple(dict.fromkeys(query))
    if not vertices:
        raise ValueError("a query needs at least one axiom template")
    labels: dict[frozenset[Axiom], frozenset[Variable]] = {}
    for i, a in enumerate(vertices):
        for b in vertices[i + 1 :]:
            shared = variables(a) & variables(b)
            if shared:
                labels[frozenset((a, b))] = shared
    return QueryJoinGraph(vertices, frozenset(labels), labels)


# ---------------------------------------------------------------------------
# Static costs
# ---------------------------------------------------------------------------


def _no_inverses(at: Axiom) -> None:
    if any(isinstance(r, Inverse) for r in axiom_roles(at)):
        raise UnsupportedConstruct("inverse role in a query", str(at))


def static_cost(at: Axiom, bound: Iterable[Variable], stats: StatsStore) -> CostPair:
    """``s(at, bound)`` for every template shape; see the module docstring."""
    _no_inverses(at)
    b = frozenset(bound) & variables(at)
    match at:
        case ClassAssertion(Name(c), t):
            return _concept_atom(c, t, b, stats)
        case ClassAssertion(CVar() as x, t):
            return _general_concept_assertion(x, t, b, stats)
        case RoleAssertion(Role(r), s, t):
            return _role_atom(r, s, t, b, stats)
        case RoleAssertion(RVar() as z, s, t):
            unbound = _general_role_assertion(s, t, b - {z}, stats)
            return unbound.divided(stats.n_r) if z in b else unbound
        case SameAs((s, t)):
            return _equality(s, t, b, stats)
        case SubClassOf(Name() | CVar() as sub, Name() | CVar() as sup):
            return _inclusion(sub, sup, b, stats.n_c, stats.sub_closure, stats.cost.c_l("other"), Name)
        case SubRoleOf(Role() | RVar() as sub, Role() | RVar() as sup):
            return _inclusion(sub, sup, b, stats.n_r, stats.role_sub_closure, stats.cost.c_l("other"), Role)
    return _fallback(at, b, stats)


def _status_cost(status: str | None, d: float, cl: float, ce: float, p_is: float) -> CostPair:
    if status == "known":
        return CostPair(d * cl, 1.0)
    if status == "possible":
        return CostPair(d * ce, p_is)
    return CostPair(d * cl, 0.0)


def _kp(nk: float, np_: float, d: float, cl: float, ce: float, p_is: float) -> CostPair:
    return CostPair(nk * d * cl + np_ * d * ce, nk + p_is * np_)


def _concept_atom(c: str, t, bound, stats: StatsStore) -> CostPair:
    d = stats.depth_of(c)
    cl, ce, p_is = stats.cost.c_l("concept"), stats.cost.c_e("concept"), stats.cost.p_is
    if isinstance(t, str):
        return _status_cost(stats.concept_status(c, t), d, cl, ce, p_is)
    base = _kp(len(stats.known(c)), len(stats.possible(c)), d, cl, ce, p_is)
    return base.divided(stats.n_i) if t in bound else base


def _general_concept_assertion(x: CVar, t, bound, stats: StatsStore) -> CostPair:
    cl, ce, p_is = stats.cost.c_l("concept"), stats.cost.c_e("concept"), stats.cost.p_is
    if isinstance(t, str):
        total = ZERO
        for c in sorted(stats.known_types(t)):
            total += CostPair(stats.depth_of(c) * cl, 1.0)
        for c in sorted(stats.possible_types(t)):
            total += CostPair(stats.depth_of(c) * ce, p_is)
        return total.divided(stats.n_c) if x in bound else total
    total = ZERO
    for c in stats.concept_names:
        total += _kp(len(stats.known(c)), len(stats.possible(c)), stats.depth_of(c), cl, ce, p_is)
    if x in bound and t in bound:
        return total.divided(stats.n_i * stats.n_c)
    if x in bound:
        return total.divided(stats.n_c)
    if t in bound:
        return total.divided(stats.n_i)
    return total


def _role_atom(r: str, s, t, bound, stats: StatsStore) -> CostPair:
    d = stats.depth_of(r)
    cl, ce, p_is = stats.cost.c_l("role"), stats.cost.c_e("role"), stats.cost.p_is
    n_i = stats.n_i
    if isinstance(s, str) and isinstance(t, str):
        return _status_cost(stats.role_status(r, s, t), d, cl, ce, p_is)
    if isinstance(s, str):
        base = _kp(len(stats.suc_k(r, s)), len(stats.suc_p(r, s)), d, cl, ce, p_is)
        return base.divided(n_i) if t in bound else base
    if isinstance(t, str):
        base = _kp(len(stats.pre_k(r, t)), len(stats.pre_p(r, t)), d, cl, ce, p_is)
        return base.divided(n_i) if s in bound else base
    nk, np_ = len(stats.role_k(r)), len(stats.role_p(r))
    full = _kp(nk, np_, d, cl, ce, p_is)
    if s == t:
        return full.divided(n_i * n_i) if s in bound else full
    if s in bound and t in bound:
        return full.divided(n_i * n_i)
    if s in bound:
        avg_k, avg_p = _ratio(nk, len(stats.suc_k(r))), _ratio(np_, len(stats.suc_p(r)))
        return _kp(avg_k, avg_p, d, cl, ce, p_is)
    if t in bound:
        avg_k, avg_p = _ratio(nk, len(stats.pre_k(r))), _ratio(np_, len(stats.pre_p(r)))
        return _kp(avg_k, avg_p, d, cl, ce, p_is)
    return full


def _general_role_assertion(s, t, bound, stats: StatsStore) -> CostPair:
    total = ZERO
    for r in stats.role_names:
        total += _role_atom(r, s, t, bound, stats)
    return total


def _equality(s, t, bound, stats: StatsStore) -> CostPair:
    cl, ce, p_is = stats.cost.c_l("equality"), stats.cost.c_e("equality"), stats.cost.p_is
    n_i = stats.n_i
    if isinstance(s, str) and isinstance(t, str):
        return _status_cost(stats.equal_status(s, t), 1.0, cl, ce, p_is)
    if isinstance(s, str) or isinstance(t, str):
        a, x = (s, t) if isinstance(s, str) else (t, s)
        base = _kp(len(stats.eq_k(a)), len(stats.eq_p(a)), 1.0, cl, ce, p_is)
        return base.divided(n_i) if x in bound else base
    total = ZERO
    for a in stats.individuals:
        total += _kp(len(stats.eq_k(a)), len(stats.eq_p(a)), 1.0, cl, ce, p_is)
    total = total.scaled(0.5)
    n_bound = len({s, t} & bound)
    if s == t:
        return total.divided(n_i * n_i) if n_bound else total
    if n_bound == 2:
        return total.divided(n_i * n_i)
    if n_bound == 1:
        return total.divided(n_i)
    return total


def _inclusion(sub, sup, bound, n_names: int, closure: dict[str, frozenset[str]], cl: float, named) -> CostPair:
    """Hierarchy lookups: one lookup per candidate, every candidate a match."""

    def subs(x) -> int:
        return len(closure.get(x.name, frozenset((x.name,))))

    def supers(x) -> int:
        return sum(1 for members in closure.values() if x.name in members) or 1

    sub_var, sup_var = not isinstance(sub, named), not isinstance(sup, named)
    if not sub_var and not sup_var:
        hit = sub.name in closure.get(sup.name, frozenset((sup.name,)))
        return CostPair(cl, 1.0 if hit else 0.0)
    if sub_var and sup_var:
        if sub == sup:
            return CostPair(cl, 1.0) if sub in bound else CostPair(n_names * cl, float(n_names))
        pairs = float(sum(len(m) for m in closure.values()))
        n_bound = len({sub, sup} & bound)
        if n_bound == 2:
            return CostPair(cl, _ratio(pairs, n_names * n_names))
        if n_bound == 1:
            avg = _ratio(pairs, n_names)
            return CostPair(avg * cl, avg)
        return CostPair(pairs * cl, pairs)
    n = subs(sup) if sub_var else supers(sub)
    var = sub if sub_var else sup
    if var in bound:
        return CostPair(cl, _ratio(n, n_names))
    return CostPair(n * cl, float(n))


def _domain_size(v: Variable, stats: StatsStore) -> int:
    if isinstance(v, CVar):
        return stats.n_c
    if isinstance(v, RVar):
        return stats.n_r
    return stats.n_i


def _fallback(at: Axiom, bound, stats: StatsStore) -> CostPair:
    """One entailment check per value of each unbound variable."""
    ce = stats.cost.c_e(category_of(at))
    unbound = sorted(variables(at) - bound, key=str)
    if not unbound:
        return CostPair(ce, 1.0)
    n = math.prod(_domain_size(v, stats) for v in unbound)
    return CostPair(n * ce, float(n))


# ---------------------------------------------------------------------------
# Dynamic and sampled costs
# ---------------------------------------------------------------------------


def _key(mu: Solution) -> str:
    return "\t".join(sorted(f"{v}={x}" for v, x in mu))


def dynamic_cost(at: Axiom, omega: Iterable[Solution], stats: StatsStore) -> CostPair:
    """``d(at, Ω) = Σ_{µ∈Ω} s(µ(at), ∅)``; equal instantiations are priced once."""
    vs = variables(at)
    counts = Counter(restrict(mu, vs) for mu in omega)
    total = ZERO
    for mu in sorted(counts, key=_key):
        total += static_cost(instantiate(at, mu), (), stats).scaled(counts[mu])
    return total


def _cluster_key(at: Axiom, mu: Solution, clusters: Clusters):
    """Cluster of the individuals ``mu`` binds in a query atom, or ``None``."""
    m = dict(mu)
    match at:
        case ClassAssertion(Name(), IVar() as x) if x in m:
            return ("cc", clusters.cluster_id("cc", m[x]))
        case RoleAssertion(Role(), s, t):
            sb = isinstance(s, IVar) and s in m
            tb = isinstance(t, IVar) and t in m
            if sb and tb:
                return ("pc12", clusters.cluster_id("pc12", (m[s], m[t])))
            if sb:
                return ("pc1", clusters.cluster_id("pc1", m[s]), t)
            if tb:
                return ("pc2", clusters.cluster_id("pc2", m[t]), s)
        case SameAs((s, t)):
            ids = tuple(
                clusters.cluster_id("cc", m[v]) if isinstance(v, IVar) and v in m else str(v) for v in (s, t)
            )
            if any(isinstance(v, IVar) and v in m for v in (s, t)):
                return ("cc",) + ids
    return None


def sampled_cost(at: Axiom, omega: Iterable[Solution], stats: StatsStore, clusters: Clusters) -> CostPair:
    """Dynamic cost priced on one representative binding per relevant cluster."""
    vs = variables(at)
    groups: dict = {}
    counts = Counter(restrict(mu, vs) for mu in omega)
    for mu in sorted(counts, key=_key):
        key = _cluster_key(at, mu, clusters)
        if key is None:
            key = ("exact", mu)
        rep, n = groups.get(key, (mu, 0))
        groups[key] = (rep, n + counts[mu])
    total = ZERO
    for rep, n in groups.values():
        total += static_cost(instantiate(at, rep), (), stats).scaled(n)
    return total


# ---------------------------------------------------------------------------
# Plans
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PlanStep:
    """One chosen template with the costs that decided the choice."""

    template: Axiom
    bound: frozenset[Variable]
    cost: CostPair
    candidates: tuple[tuple[Axiom, CostPair], ...]
    mode: str


@dataclass(frozen=True)
class ExecutionPlan:
    steps: tuple[PlanStep, ...]

    @property
    def templates(self) -> tuple[Axiom, ...]:
        return tuple(s.template for s in self.steps)

    def bound_variables(self, i: int) -> frozenset[Variable]:
        return self.steps[i].bound

    def __len__(self) -> int:
        return len(self.steps)


def candidate_templates(
    plan: Sequence[Axiom], graph: QueryJoinGraph, complex_templates: Iterable[Axiom] | None = None
) -> tuple[Axiom, ...]:
    """Potential next templates: connected successors, widened past complex ones."""
    if complex_templates is None:
        complex_templates = [at for at in graph.vertices if not is_simple(at)]
    if not plan:
        return graph.vertices
    done = set(plan)
    succ = lambda at: {n for n in graph.neighbours(at) if n not in done}  # noqa: E731
    s_i: set[Axiom] = set().union(*(succ(at) for at in plan))
    q_i = set(s_i)
    for at in set(complex_templates) & s_i:
        q_i |= succ(at)
    if not q_i:
        # Only reachable for unconnected input; every remaining template qualifies.
        q_i = {at for at in graph.vertices if at not in done}
    return tuple(at for at in graph.vertices if at in q_i)


def next_template(
    candidates: Iterable[Axiom], cost: Callable[[Axiom], CostPair]
) -> tuple[Axiom, CostPair, tuple[tuple[Axiom, CostPair], ...]]:
    """Cheapest candidate by ``Ec + Rs``; ties go to the smaller template text."""
    priced = tuple((at, cost(at)) for at in candidates)
    if not priced:
        raise ValueError("no candidate templates")
    at, c = min(priced, key=lambda p: (p[1].total, str(p[0])))
    return at, c, priced


def _bound_before(plan: Sequence[Axiom]) -> frozenset[Variable]:
    return frozenset().union(*(variables(at) for at in plan)) if plan else frozenset()


def static_plan(
    query: Iterable[Axiom], stats: StatsStore, graph: QueryJoinGraph | None = None
) -> ExecutionPlan:
    """Greedy complete plan under the static cost function."""
    graph = graph or build_join_graph(query)
    complex_templates = [at for at in graph.vertices if not is_simple(at)]
    chosen: list[Axiom] = []
    steps: list[PlanStep] = []
    while len(chosen) < len(graph.vertices):
        bound = _bound_before(chosen)
        cands = candidate_templates(chosen, graph, complex_templates)
        at, c, priced = next_template(cands, lambda t: static_cost(t, bound, stats))
        steps.append(PlanStep(at, variables(at) & bound, c, priced, "static"))
        chosen.append(at)
    return ExecutionPlan(tuple(steps))


def dynamic_step(
    plan: Sequence[Axiom],
    graph: QueryJoinGraph,
    omega: Sequence[Solution],
    stats: StatsStore,
    clusters: Clusters | None = None,
) -> PlanStep:
    """Next template under the dynamic (or, with ``clusters``, sampled) cost."""
    complex_templates = [at for at in graph.vertices if not is_simple(at)]
    cands = candidate_templates(plan, graph, complex_templates)
    if clusters is None:
        cost = lambda t: dynamic_cost(t, omega, stats)  # noqa: E731
        mode = "dynamic"
    else:
        cost = lambda t: sampled_cost(t, omega, stats, clusters)  # noqa: E731
        mode = "dynamic-sampled"
    at, c, priced = next_template(cands, cost)
    return PlanStep(at, variables(at) & _bound_before(plan), c, priced, mode)


# ---------------------------------------------------------------------------
# Replay against recorded instance counts
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ReplayResult:
    """Plan chosen from recorded counts and the entailment checks it predicts."""

    plan: ExecutionPlan
    predicted_checks: tuple[int, ...]

    @property
    def total_checks(self) -> int:
        return sum(self.predicted_checks)


def _row_static_cost(at: Axiom, bound: frozenset[Variable], stats: StatsStore) -> CostPair:
    row = stats.row((), str(at))
    if row is None:
        return static_cost(at, bound, stats)
    cat = category_of(at)
    d = _depth_of_atom(at, stats)
    base = _kp(row.known, row.possible, d, stats.cost.c_l(cat), stats.cost.c_e(cat), stats.cost.p_is)
    vs = variables(at)
    n_bound = len(vs & bound)
    if n_bound == 0:
        return base
    if isinstance(at, RoleAssertion) and n_bound == 2:
        return base.divided(stats.n_i * stats.n_i)
    return base.divided(stats.n_i)


def _depth_of_atom(at: Axiom, stats: StatsStore) -> int:
    match at:
        case ClassAssertion(Name(c), _):
            return stats.depth_of(c)
        case RoleAssertion(Role(r), _, _):
            return stats.depth_of(r)
    return 1


def replay(query: Iterable[Axiom], stats: StatsStore, mode: str = "static") -> ReplayResult:
    """Plan a query against recorded rows ``(prefix, template, K, P, real)``.

    The static plan prices templates with the unconditioned rows.  The
    dynamic plan prices a template after prefix ``P`` by instantiating it
    with every solution of ``P``: ``K`` of them are known instances (one
    lookup each), ``P`` possible ones (one check each) and the rest known
    non-instances (one lookup each).  The predicted checks of a step are the
    possible instances in its row.
    """
    graph = build_join_graph(query)
    complex_templates = [at for at in graph.vertices if not is_simple(at)]
    chosen: list[Axiom] = []
    steps: list[PlanStep] = []
    checks: list[int] = []
    omega_size = 1
    while len(chosen) < len(graph.vertices):
        prefix = frozenset(map(str, chosen))
        bound = _bound_before(chosen)
        cands = candidate_templates(chosen, graph, complex_templates)
        if mode == "static" or not chosen:
            cost = lambda t: _row_static_cost(t, bound, stats)  # noqa: E731
        else:

            def cost(t: Axiom) -> CostPair:
                row = stats.row(prefix, str(t))
                if row is None:
                    return static_cost(t, bound, stats)
                cat = category_of(t)
                d = _depth_of_atom(t, stats)
                cl, ce = stats.cost.c_l(cat), stats.cost.c_e(cat)
                misses = max(0, omega_size - row.known - row.possible)
                return CostPair(d * (row.known * cl + misses * cl + row.possible * ce), row.known + stats.cost.p_is * row.possible)

        at, c, priced = next_template(cands, cost)
        steps.append(PlanStep(at, variables(at) & bound, c, priced, mode))
        row = stats.row(prefix, str(at))
        checks.append(row.possible if row is not None else 0)
        if row is not None:
            omega_size = row.known + row.real
        chosen.append(at)
    return ReplayResult(ExecutionPlan(tuple(steps)), tuple(checks))
