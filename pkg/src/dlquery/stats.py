"""Known/possible instance statistics and individual clusters.

Statistics are read off a pre-model: an entry derived deterministically makes
an individual a *known* instance, a nondeterministic entry a *possible* one,
and anything absent from the pre-model is a non-instance.  Concept
memberships are stored as direct types and aggregated over the subconcept
closure on lookup.

The module also reads and writes a line-oriented snapshot so a planner run
can be driven by injected statistics instead of a reasoner::

    param   C_E     100
    n_individuals   10000
    concept_known   C   a
    concept_possible    C   c
    role_possible   r   c   d
    row  r(?x ?y)   C(?x)   100 150 100
"""

from __future__ import annotations

import math
from collections import defaultdict
from collections.abc import Iterable
from dataclasses import dataclass, field
from functools import cached_property

from .hierarchy import Hierarchy
from .reasoner.core import CATEGORIES, PreModel, Reasoner
from .syntax import RESERVED_PREFIX, Name, Role

Pair = tuple[str, str]


# ---------------------------------------------------------------------------
# Cost parameters
# ---------------------------------------------------------------------------


@dataclass
class CostParams:
    """Lookup and entailment cost per template category, plus P_IS.

    Until a measurement is recorded for a (category, kind) pair its cost is
    the configured default; afterwards it is the running mean of the
    measurements.
    """

    lookup_default: float = 1.0
    entailment_default: float = 100.0
    p_is: float = 0.5
    _sums: dict[tuple[str, str], list[float]] = field(default_factory=dict)

    def record(self, category: str, kind: str, duration: float) -> None:
        if category not in CATEGORIES:
            raise ValueError(f"unknown template category {category!r}")
        if kind not in ("lookup", "entailment"):
            raise ValueError(f"unknown measurement kind {kind!r}")
        if duration < 0 or not math.isfinite(duration):
            raise ValueError("duration must be a finite non-negative number")
        acc = self._sums.setdefault((category, kind), [0.0, 0])
        acc[0] += duration
        acc[1] += 1

    def _value(self, category: str, kind: str, default: float) -> float:
        acc = self._sums.get((category, kind))
        return default if not acc else acc[0] / acc[1]

    def c_l(self, category: str = "concept") -> float:
        return self._value(category, "lookup", self.lookup_default)

    def c_e(self, category: str = "concept") -> float:
        return self._value(category, "entailment", self.entailment_default)


def record_cost_measurement(params: CostParams, category: str, kind: str, duration: float) -> CostParams:
    params.record(category, kind, duration)
    return params


# ---------------------------------------------------------------------------
# Clusters
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Clusters:
    """Partitions of the individuals (CC, PC1, PC2) and of labelled pairs (PC12)."""

    cc: tuple[frozenset[str], ...]
    pc1: tuple[frozenset[str], ...]
    pc2: tuple[frozenset[str], ...]
    pc12: tuple[frozenset[Pair], ...]

    @cached_property
    def index(self) -> dict[str, dict]:
        out: dict[str, dict] = {"cc": {}, "pc1": {}, "pc2": {}, "pc12": {}}
        for kind in ("cc", "pc1", "pc2", "pc12"):
            for k, cluster in enumerate(getattr(self, kind)):
                for m in cluster:
                    out[kind][m] = k
        return out

    def cluster_id(self, kind: str, member) -> int:
        """Cluster number of ``member``; unlabelled pairs share the id -1."""
        return self.index[kind].get(member, -1)


def _partition(keys: dict) -> tuple[frozenset, ...]:
    groups: dict = defaultdict(set)
    for m, k in keys.items():
        groups[k].add(m)
    return tuple(sorted((frozenset(g) for g in groups.values()), key=lambda g: sorted(map(str, g))))


def build_clusters(pm: PreModel) -> Clusters:
    """Group individuals with equal labels (and equal successor/predecessor roles)."""
    inds = pm.individuals
    label = {a: pm.label_sets[a] for a in inds}
    p1: dict[str, set[str]] = {a: set() for a in inds}
    p2: dict[str, set[str]] = {a: set() for a in inds}
    for (a, b), roles in pm.edge_labels.items():
        p1[a] |= set(roles)
        p2[b] |= set(roles)
    cc = _partition({a: label[a] for a in inds})
    pc1 = _partition({a: (label[a], frozenset(p1[a])) for a in inds})
    pc2 = _partition({a: (label[a], frozenset(p2[a])) for a in inds})
    pc12 = _partition(
        {
            (a, b): (label[a], label[b], frozenset(roles.items()))
            for (a, b), roles in pm.edge_labels.items()
            if roles
        }
    )
    return Clusters(cc, pc1, pc2, pc12)


# ---------------------------------------------------------------------------
# Statistics store
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ReplayRow:
    """One row of a replay table: instance counts of ``template`` after ``prefix``."""

    prefix: frozenset[str]
    template: str
    known: int
    possible: int
    real: int


@dataclass
class StatsStore:
    individuals: tuple[str, ...]
    concept_names: tuple[str, ...]
    role_names: tuple[str, ...]
    known_direct: dict[str, frozenset[str]]
    possible_concept: dict[str, frozenset[str]]
    role_known: dict[str, frozenset[Pair]]
    role_possible: dict[str, frozenset[Pair]]
    equal_known: dict[str, frozenset[str]]
    equal_possible: dict[str, frozenset[str]]
    depth: dict[str, int]
    sub_closure: dict[str, frozenset[str]]
    cost: CostParams = field(default_factory=CostParams)
    n_individuals_override: int | None = None
    clusters: Clusters | None = None
    rows: tuple[ReplayRow, ...] = ()
    role_sub_closure: dict[str, frozenset[str]] = field(default_factory=dict)
    _agg: dict = field(default_factory=dict, repr=False)

    # -- sizes -----------------------------------------------------------
    @property
    def n_i(self) -> int:
        return self.n_individuals_override if self.n_individuals_override is not None else len(self.individuals)

    @property
    def n_c(self) -> int:
        return len(self.concept_names)

    @property
    def n_r(self) -> int:
        return len(self.role_names)

    def depth_of(self, name: str) -> int:
        return self.depth.get(name, 1)

    # -- concepts --------------------------------------------------------
    def known(self, c: str) -> frozenset[str]:
        """Known instances of ``c`` aggregated over its subconcepts."""
        key = ("K", c)
        if key not in self._agg:
            out: set[str] = set()
            for sub in self.sub_closure.get(c, frozenset((c,))):
                out |= self.known_direct.get(sub, frozenset())
            self._agg[key] = frozenset(out)
        return self._agg[key]

    def possible(self, c: str) -> frozenset[str]:
        key = ("P", c)
        if key not in self._agg:
            out: set[str] = set()
            for sub in self.sub_closure.get(c, frozenset((c,))):
                out |= self.possible_concept.get(sub, frozenset())
            self._agg[key] = frozenset(out) - self.known(c)
        return self._agg[key]

    def concept_status(self, c: str, a: str) -> str | None:
        if a in self.known(c):
            return "known"
        if a in self.possible(c):
            return "possible"
        return None

    def known_types(self, a: str) -> frozenset[str]:
        return frozenset(c for c in self.concept_names if a in self.known(c))

    def possible_types(self, a: str) -> frozenset[str]:
        return frozenset(c for c in self.concept_names if a in self.possible(c))

    def direct_types(self, a: str) -> frozenset[str]:
        """Known types of ``a`` with no strictly more specific known type."""
        if a not in self.individuals:
            raise KeyError(f"unknown individual {a!r}")
        return frozenset(c for c, members in self.known_direct.items() if a in members)

    # -- roles -----------------------------------------------------------
    def role_k(self, r: str) -> frozenset[Pair]:
        return self.role_known.get(r, frozenset())

    def role_p(self, r: str) -> frozenset[Pair]:
        return self.role_possible.get(r, frozenset()) - self.role_k(r)

    def role_status(self, r: str, a: str, b: str) -> str | None:
        if (a, b) in self.role_k(r):
            return "known"
        if (a, b) in self.role_p(r):
            return "possible"
        return None

    def _index(self, kind: str, r: str) -> dict[str, frozenset[str]]:
        key = (kind, r)
        if key not in self._agg:
            pairs = self.role_k(r) if kind in ("sucK", "preK") else self.role_p(r)
            out: dict[str, set[str]] = defaultdict(set)
            for a, b in pairs:
                if kind.startswith("suc"):
                    out[a].add(b)
                else:
                    out[b].add(a)
            self._agg[key] = {k: frozenset(v) for k, v in out.items()}
        return self._agg[key]

    def suc_k(self, r: str, a: str | None = None):
        idx = self._index("sucK", r)
        return frozenset(idx) if a is None else idx.get(a, frozenset())

    def suc_p(self, r: str, a: str | None = None):
        idx = self._index("sucP", r)
        return frozenset(idx) if a is None else idx.get(a, frozenset())

    def pre_k(self, r: str, a: str | None = None):
        idx = self._index("preK", r)
        return frozenset(idx) if a is None else idx.get(a, frozenset())

    def pre_p(self, r: str, a: str | None = None):
        idx = self._index("preP", r)
        return frozenset(idx) if a is None else idx.get(a, frozenset())

    # -- equality --------------------------------------------------------
    def eq_k(self, a: str) -> frozenset[str]:
        return self.equal_known.get(a, frozenset())

    def eq_p(self, a: str) -> frozenset[str]:
        return self.equal_possible.get(a, frozenset()) - self.eq_k(a)

    def equal_status(self, a: str, b: str) -> str | None:
        if a == b or b in self.eq_k(a):
            return "known"
        if b in self.eq_p(a):
            return "possible"
        return None

    # -- replay ----------------------------------------------------------
    def row(self, prefix: Iterable[str], template: str) -> ReplayRow | None:
        """Replay row for ``template`` after ``prefix``, else the unconditioned row."""
        pre = frozenset(prefix)
        fallback = None
        for row in self.rows:
            if row.template != template:
                continue
            if row.prefix == pre:
                return row
            if not row.prefix:
                fallback = row
        return fallback


# ---------------------------------------------------------------------------
# Building statistics from a reasoner
# ---------------------------------------------------------------------------


def build_stats(
    reasoner: Reasoner,
    concepts: Hierarchy,
    roles: Hierarchy,
    pm: PreModel | None = None,
    with_clusters: bool = True,
) -> StatsStore:
    """Initialise known/possible instances, role pairs and equalities."""
    pm = pm or reasoner.premodel()
    if pm is None:
        raise ValueError("statistics need a consistent ontology")
    names = tuple(reasoner.concept_names)
    role_names = tuple(reasoner.role_names)
    inds = tuple(reasoner.individuals)

    known_direct: dict[str, set[str]] = defaultdict(set)
    possible: dict[str, set[str]] = defaultdict(set)
    for a in inds:
        labels = pm.types(a)
        known_all: set[str] = set()
        for c, nd in labels.items():
            if not nd and Name(c) in concepts:
                known_all |= {m.name for m in concepts.supers(Name(c)) if isinstance(m, Name)}
        for c in known_all:
            if not any(
                d != c and concepts.subsumes(Name(d), Name(c)) and not concepts.subsumes(Name(c), Name(d))
                for d in known_all
            ):
                known_direct[c].add(a)
        for c, nd in labels.items():
            if nd and c not in known_all:
                possible[c].add(a)

    role_known: dict[str, set[Pair]] = defaultdict(set)
    role_possible: dict[str, set[Pair]] = defaultdict(set)
    for (a, b), label in pm.edge_labels.items():
        for r, nd in label.items():
            if r.startswith(RESERVED_PREFIX):
                continue
            (role_possible if nd else role_known)[r].add((a, b))
    for r in role_names:
        if reasoner.closure.is_simple(Role(r)):
            continue
        role_known[r] = set()
        role_possible[r] = set()
        for pair, nd in reasoner.transitive_successors(r).items():
            (role_possible if nd else role_known)[r].add(pair)

    eq_k: dict[str, set[str]] = defaultdict(set)
    eq_p: dict[str, set[str]] = defaultdict(set)
    for (a, b), nd in pm.same.items():
        target = eq_p if nd else eq_k
        target[a].add(b)
        target[b].add(a)

    depth: dict[str, int] = {}
    for c in names:
        depth[c] = concepts.depth(Name(c))
    for r in role_names:
        depth[r] = roles.depth(Role(r))
    sub_closure = {
        c: frozenset(m.name for m in concepts.subs(Name(c)) if isinstance(m, Name)) for c in names
    }
    role_sub_closure = {
        r: frozenset(m.name for m in roles.subs(Role(r)) if isinstance(m, Role)) for r in role_names
    }
    freeze = lambda d: {k: frozenset(v) for k, v in d.items()}  # noqa: E731
    return StatsStore(
        individuals=inds,
        concept_names=names,
        role_names=role_names,
        known_direct=freeze(known_direct),
        possible_concept=freeze(possible),
        role_known=freeze(role_known),
        role_possible=freeze(role_possible),
        equal_known=freeze(eq_k),
        equal_possible=freeze(eq_p),
        depth=depth,
        sub_closure=sub_closure,
        clusters=build_clusters(pm) if with_clusters else None,
        role_sub_closure=role_sub_closure,
    )


def clusters_from_stats(stats: StatsStore) -> Clusters:
    """Clusters for injected statistics, using known/possible types as labels."""
    inds = stats.individuals
    label = {a: (stats.known_types(a), stats.possible_types(a)) for a in inds}
    p1: dict[str, set[str]] = {a: set() for a in inds}
    p2: dict[str, set[str]] = {a: set() for a in inds}
    edges: dict[Pair, set[tuple[str, bool]]] = defaultdict(set)
    for r in stats.role_names:
        for nd, pairs in ((False, stats.role_k(r)), (True, stats.role_p(r))):
            for a, b in pairs:
                p1.setdefault(a, set()).add(r)
                p2.setdefault(b, set()).add(r)
                edges[(a, b)].add((r, nd))
    cc = _partition(label)
    pc1 = _partition({a: (label[a], frozenset(p1[a])) for a in inds})
    pc2 = _partition({a: (label[a], frozenset(p2[a])) for a in inds})
    pc12 = _partition(
        {
            (a, b): (label.get(a), label.get(b), frozenset(e))
            for (a, b), e in edges.items()
        }
    )
    return Clusters(cc, pc1, pc2, pc12)


# ---------------------------------------------------------------------------
# Snapshot format
# ---------------------------------------------------------------------------


def write_snapshot(stats: StatsStore) -> str:
    lines = [
        f"param\tC_L\t{stats.cost.lookup_default:g}",
        f"param\tC_E\t{stats.cost.entailment_default:g}",
        f"param\tP_IS\t{stats.cost.p_is:g}",
    ]
    if stats.n_individuals_override is not None:
        lines.append(f"n_individuals\t{stats.n_individuals_override}")
    lines += [f"individual\t{a}" for a in stats.individuals]
    lines += [f"concept\t{c}" for c in stats.concept_names]
    lines += [f"role\t{r}" for r in stats.role_names]
    for c in sorted(stats.known_direct):
        lines += [f"concept_known\t{c}\t{a}" for a in sorted(stats.known_direct[c])]
    for c in sorted(stats.possible_concept):
        lines += [f"concept_possible\t{c}\t{a}" for a in sorted(stats.possible_concept[c])]
    for r in sorted(stats.role_known):
        lines += [f"role_known\t{r}\t{a}\t{b}" for a, b in sorted(stats.role_known[r])]
    for r in sorted(stats.role_possible):
        lines += [f"role_possible\t{r}\t{a}\t{b}" for a, b in sorted(stats.role_possible[r])]
    for kind, table in (("equal_known", stats.equal_known), ("equal_possible", stats.equal_possible)):
        for a in sorted(table):
            lines += [f"{kind}\t{a}\t{b}" for b in sorted(table[a]) if a < b]
    lines += [f"depth\t{n}\t{d}" for n, d in sorted(stats.depth.items())]
    for c in sorted(stats.sub_closure):
        lines += [f"sub\t{d}\t{c}" for d in sorted(stats.sub_closure[c]) if d != c]
    for r in sorted(stats.role_sub_closure):
        lines += [f"subrole\t{s}\t{r}" for s in sorted(stats.role_sub_closure[r]) if s != r]
    for row in stats.rows:
        prefix = " ; ".join(sorted(row.prefix)) or "-"
        lines.append(f"row\t{prefix}\t{row.template}\t{row.known}\t{row.possible}\t{row.real}")
    return "\n".join(lines) + "\n"


def _reflexive_closure(names: Iterable[str], told: dict[str, set[str]]) -> dict[str, frozenset[str]]:
    """Reflexive-transitive closure of told ``sub`` edges."""
    out: dict[str, frozenset[str]] = {}
    for c in names:
        seen = {c}
        stack = [c]
        while stack:
            for d in told.get(stack.pop(), ()):
                if d not in seen:
                    seen.add(d)
                    stack.append(d)
        out[c] = frozenset(seen)
    return out


def read_snapshot(text: str) -> StatsStore:
    """Parse the snapshot format; names are collected from every record."""
    from .errors import ParseError

    cost = CostParams()
    inds: dict[str, None] = {}
    concepts: dict[str, None] = {}
    roles: dict[str, None] = {}
    kd: dict[str, set[str]] = defaultdict(set)
    pc: dict[str, set[str]] = defaultdict(set)
    rk: dict[str, set[Pair]] = defaultdict(set)
    rp: dict[str, set[Pair]] = defaultdict(set)
    ek: dict[str, set[str]] = defaultdict(set)
    ep: dict[str, set[str]] = defaultdict(set)
    depth: dict[str, int] = {}
    told_sub: dict[str, set[str]] = defaultdict(set)
    told_subrole: dict[str, set[str]] = defaultdict(set)
    rows: list[ReplayRow] = []
    n_override = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        f = [p.strip() for p in line.split("\t")] if "\t" in line else line.split()
        kind, args = f[0], f[1:]

        def need(n: int) -> None:
            if len(args) != n:
                raise ParseError(f"{kind} record needs {n} fields, found {len(args)}", lineno, 1)

        try:
            if kind == "param":
                need(2)
                value = float(args[1])
                if args[0] == "C_L":
                    cost.lookup_default = value
                elif args[0] == "C_E":
                    cost.entailment_default = value
                elif args[0] == "P_IS":
                    cost.p_is = value
                else:
                    raise ParseError(f"unknown parameter {args[0]!r}", lineno, 1)
            elif kind == "n_individuals":
                need(1)
                n_override = int(args[0])
            elif kind == "individual":
                need(1)
                inds[args[0]] = None
            elif kind == "concept":
                need(1)
                concepts[args[0]] = None
            elif kind == "role":
                need(1)
                roles[args[0]] = None
            elif kind in ("concept_known", "concept_possible"):
                need(2)
                concepts[args[0]] = None
                inds[args[1]] = None
                (kd if kind == "concept_known" else pc)[args[0]].add(args[1])
            elif kind in ("role_known", "role_possible"):
                need(3)
                roles[args[0]] = None
                inds[args[1]] = None
                inds[args[2]] = None
                (rk if kind == "role_known" else rp)[args[0]].add((args[1], args[2]))
            elif kind in ("equal_known", "equal_possible"):
                need(2)
                a, b = args
                inds[a] = inds[b] = None
                table = ek if kind == "equal_known" else ep
                table[a].add(b)
                table[b].add(a)
            elif kind == "depth":
                need(2)
                depth[args[0]] = int(args[1])
            elif kind == "sub":
                need(2)
                told_sub[args[1]].add(args[0])
                concepts[args[0]] = concepts[args[1]] = None
            elif kind == "subrole":
                need(2)
                told_subrole[args[1]].add(args[0])
                roles[args[0]] = roles[args[1]] = None
            elif kind == "row":
                need(5)
                prefix = frozenset() if args[0] in ("-", "") else frozenset(
                    p.strip() for p in args[0].split(";") if p.strip()
                )
                rows.append(ReplayRow(prefix, args[1], int(args[2]), int(args[3]), int(args[4])))
            else:
                raise ParseError(f"unknown record type {kind!r}", lineno, 1)
        except ValueError as exc:
            raise ParseError(str(exc), lineno, 1) from None

    sub_closure = _reflexive_closure(concepts, told_sub)
    freeze = lambda d: {k: frozenset(v) for k, v in d.items()}  # noqa: E731
    stats = StatsStore(
        individuals=tuple(sorted(inds)),
        concept_names=tuple(sorted(concepts)),
        role_names=tuple(sorted(roles)),
        known_direct=freeze(kd),
        possible_concept=freeze(pc),
        role_known=freeze(rk),
        role_possible=freeze(rp),
        equal_known=freeze(ek),
        equal_possible=freeze(ep),
        depth=depth,
        sub_closure=sub_closure,
        cost=cost,
        n_individuals_override=n_override,
        rows=tuple(rows),
        role_sub_closure=_reflexive_closure(roles, told_subrole),
    )
    stats.clusters = clusters_from_stats(stats)
    return stats
