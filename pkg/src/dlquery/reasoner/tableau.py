"""Completion-graph tableau for the supported fragment.

The calculus works on negation-normal-form labels and a graph whose nodes are
named individuals (roots) and anonymous nodes (trees hanging below roots).
Rules are applied in three tiers: deterministic rules to saturation, then one
nondeterministic rule (disjunction, choose, at-most merge), then one
generating rule (some, at-least, some-over-TopRole).  Anonymous nodes are
subset blocked by an anonymous ancestor.

Every label entry carries a dependency set (the branch points it rests on,
used for backjumping) and an ``nd`` flag saying whether a nondeterministic
choice lies anywhere in its derivation.  An entry with ``nd = False`` was
derived by deterministic rules from deterministic premises only.

Inclusions whose left-hand side is a concept name are absorbed into a
lookup rule (``A`` in a label adds the right-hand side); every other
inclusion ``C ⊑ D`` is internalised as the disjunction ``not C or D`` in
every label.  Definitions are not unfolded lazily, so a concept name absent
from a label of a complete clash-free graph is a non-consequence.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import ResourceLimit
from .concepts import ALL, ALLU, AND, ATOM, BOT_K, GE, LE, NATOM, OR, SOME, SOMEU, TOP_K, ConceptTable

EMPTY: frozenset[int] = frozenset()


class _Clash(Exception):
    def __init__(self, deps: frozenset[int]):
        self.deps = deps


@dataclass(slots=True)
class _Branch:
    ident: int
    trail_len: int
    kind: str  # "or" | "choose" | "merge"
    node: int
    alternatives: list
    base: frozenset[int]
    next: int = 0
    failed: frozenset[int] = EMPTY


@dataclass(frozen=True)
class RBoxView:
    """What the tableau needs to know about roles."""

    supers: dict[str, frozenset[str]]  # reflexive named super-roles
    transitive: frozenset[str]

    def sup(self, r: str) -> frozenset[str]:
        return self.supers.get(r, frozenset((r,)))

    def below(self, t: str, s: str) -> bool:
        return s in self.sup(t)


@dataclass
class Problem:
    """Compiled input for one tableau run.

    ``absorbed`` maps a concept name to the concepts it implies, ``globals``
    are added to every node, ``assertions``/``edges``/``same``/``different``
    and ``neg_edges`` describe the ABox over named nodes.
    """

    absorbed: dict[str, list[int]] = field(default_factory=dict)
    globals: list[int] = field(default_factory=list)
    individuals: list[str] = field(default_factory=list)
    assertions: list[tuple[str, int]] = field(default_factory=list)
    edges: list[tuple[str, str, str]] = field(default_factory=list)
    neg_edges: list[tuple[str, str, str]] = field(default_factory=list)
    same: list[tuple[str, str]] = field(default_factory=list)
    different: list[tuple[str, str]] = field(default_factory=list)
    inconsistent: bool = False


class Tableau:
    def __init__(self, table: ConceptTable, rbox: RBoxView, problem: Problem, node_budget: int = 100_000):
        self.t = table
        self.rbox = rbox
        self.p = problem
        self.budget = node_budget
        # graph state
        self.labels: list[dict[int, tuple[frozenset[int], bool]]] = []
        self.succ: list[dict[int, dict[str, tuple[frozenset[int], bool]]]] = []
        self.preds: list[set[int]] = []
        self.parent: list[int] = []
        self.children: list[list[int]] = []
        self.named: list[str | None] = []
        self.alive: list[bool] = []
        self.merged: list[tuple[int, frozenset[int], bool] | None] = []
        self.neq: dict[tuple[int, int], tuple[frozenset[int], bool]] = {}
        self.ge_done: set[tuple[int, int]] = set()
        self.allu: dict[int, tuple[frozenset[int], bool]] = {}
        self.node_of: dict[str, int] = {}
        # search state
        self.trail: list[tuple] = []
        self.branches: list[_Branch] = []
        self.branch_counter = 0
        self.dirty: set[int] = set()
        self.pending_nd: set[int] = set()
        self.pending_gen: set[int] = set()
        self.created = 0
        self.rule_applications = 0

    # ------------------------------------------------------------------
    # primitive mutations (all trailed)
    # ------------------------------------------------------------------
    def _new_node(self, name: str | None, parent: int) -> int:
        self.created += 1
        if self.created > self.budget:
            raise ResourceLimit(f"tableau node budget of {self.budget} exceeded")
        x = len(self.labels)
        self.labels.append({})
        self.succ.append({})
        self.preds.append(set())
        self.parent.append(parent)
        self.children.append([])
        self.named.append(name)
        self.alive.append(True)
        self.merged.append(None)
        if parent >= 0:
            self.children[parent].append(x)
        self.trail.append(("N",))
        self.dirty.add(x)
        for cid in self.p.globals:
            self.add(x, cid, EMPTY, False)
        for cid, (deps, nd) in list(self.allu.items()):
            self.add(x, cid, deps, nd)
        return x

    def add(self, x: int, cid: int, deps: frozenset[int], nd: bool) -> bool:
        """Add ``cid`` to L(x); upgrade the provenance if it is already there."""
        lab = self.labels[x]
        old = lab.get(cid)
        if old is not None:
            odeps, ond = old
            if (ond and not nd) or (ond == nd and deps < odeps):
                lab[cid] = (deps, nd)
                self.trail.append(("U", x, cid, old))
                self._touch(x)
                return True
            return False
        kind = self.t.kind[cid]
        if kind == TOP_K:
            return False
        lab[cid] = (deps, nd)
        self.trail.append(("L", x, cid))
        self._touch(x)
        if kind == BOT_K:
            raise _Clash(deps)
        if kind in (ATOM, NATOM):
            other = lab.get(self.t.neg(cid))
            if other is not None:
                raise _Clash(deps | other[0])
        return True

    def _touch(self, x: int) -> None:
        self.dirty.add(x)
        self.dirty.update(self.preds[x])

    def add_edge(self, x: int, y: int, role: str, deps: frozenset[int], nd: bool) -> bool:
        changed = False
        row = self.succ[x].get(y)
        if row is None:
            row = {}
            self.succ[x][y] = row
            self.preds[y].add(x)
            self.trail.append(("EN", x, y))
        for r in self.rbox.sup(role):
            old = row.get(r)
            if old is None:
                row[r] = (deps, nd)
                self.trail.append(("E", x, y, r))
                changed = True
            elif (old[1] and not nd) or (old[1] == nd and deps < old[0]):
                row[r] = (deps, nd)
                self.trail.append(("EU", x, y, r, old))
                changed = True
        if changed:
            self.dirty.add(x)
        return changed

    def add_neq(self, x: int, y: int, deps: frozenset[int], nd: bool) -> None:
        if x == y:
            raise _Clash(deps)
        key = (x, y) if x < y else (y, x)
        old = self.neq.get(key)
        if old is None:
            self.neq[key] = (deps, nd)
            self.trail.append(("Q", key, None))
        elif (old[1] and not nd) or (old[1] == nd and deps < old[0]):
            self.neq[key] = (deps, nd)
            self.trail.append(("Q", key, old))

    def neq_entry(self, x: int, y: int):
        return self.neq.get((x, y) if x < y else (y, x))

    def _kill(self, x: int, subtree: bool = True) -> None:
        if not self.alive[x]:
            return
        if not subtree:
            self.alive[x] = False
            self.trail.append(("K", x))
            self.pending_nd.discard(x)
            self.pending_gen.discard(x)
            self.dirty.discard(x)
            return
        stack = [x]
        while stack:
            cur = stack.pop()
            if not self.alive[cur]:
                continue
            self.alive[cur] = False
            self.trail.append(("K", cur))
            self.pending_nd.discard(cur)
            self.pending_gen.discard(cur)
            self.dirty.discard(cur)
            stack.extend(c for c in self.children[cur] if self.alive[c])

    def undo_to(self, length: int) -> None:
        trail = self.trail
        while len(trail) > length:
            rec = trail.pop()
            op = rec[0]
            if op == "L":
                del self.labels[rec[1]][rec[2]]
            elif op == "U":
                self.labels[rec[1]][rec[2]] = rec[3]
            elif op == "E":
                del self.succ[rec[1]][rec[2]][rec[3]]
            elif op == "EU":
                self.succ[rec[1]][rec[2]][rec[3]] = rec[4]
            elif op == "EN":
                del self.succ[rec[1]][rec[2]]
                self.preds[rec[2]].discard(rec[1])
            elif op == "N":
                x = len(self.labels) - 1
                p = self.parent[x]
                if p >= 0:
                    self.children[p].pop()
                for lst in (self.labels, self.succ, self.preds, self.parent, self.children,
                            self.named, self.alive, self.merged):
                    lst.pop()
            elif op == "K":
                self.alive[rec[1]] = True
            elif op == "M":
                self.merged[rec[1]] = None
            elif op == "Q":
                if rec[2] is None:
                    del self.neq[rec[1]]
                else:
                    self.neq[rec[1]] = rec[2]
            elif op == "G":
                self.ge_done.discard(rec[1])
            elif op == "A":
                if rec[2] is None:
                    del self.allu[rec[1]]
                else:
                    self.allu[rec[1]] = rec[2]
        n = len(self.labels)
        self.dirty = {x for x in range(n) if self.alive[x]}
        self.pending_nd = set()
        self.pending_gen = set()

    # ------------------------------------------------------------------
    # helpers
    # ------------------------------------------------------------------
    def neighbours(self, x: int, role: str):
        """Alive r-neighbours of x with the edge entry for ``role``."""
        for y, row in self.succ[x].items():
            if self.alive[y]:
                e = row.get(role)
                if e is not None:
                    yield y, e

    def rep(self, x: int) -> tuple[int, frozenset[int], bool]:
        deps, nd = EMPTY, False
        while self.merged[x] is not None:
            y, d, n = self.merged[x]  # type: ignore[misc]
            deps |= d
            nd = nd or n
            x = y
        return x, deps, nd

    # ------------------------------------------------------------------
    # merging
    # ------------------------------------------------------------------
    def merge(self, y: int, z: int, deps: frozenset[int], nd: bool) -> None:
        """Merge node ``y`` into node ``z``."""
        if y == z:
            return
        e = self.neq_entry(y, z)
        if e is not None:
            raise _Clash(deps | e[0])
        for cid, (d, n) in list(self.labels[y].items()):
            self.add(z, cid, d | deps, n or nd)
        for w in list(self.preds[y]):
            if not self.alive[w]:
                continue
            src = z if w == y else w
            for r, (d, n) in list(self.succ[w][y].items()):
                self.add_edge(src, z, r, d | deps, n or nd)
        y_is_tree = self.named[y] is None and self.parent[y] >= 0
        for v, row in list(self.succ[y].items()):
            if not self.alive[v] or v == y:
                continue
            if y_is_tree and self.parent[v] == y:
                continue  # pruned with y below
            for r, (d, n) in list(row.items()):
                self.add_edge(z, v, r, d | deps, n or nd)
        for (a, b), (d, n) in list(self.neq.items()):
            if a == y or b == y:
                other = b if a == y else a
                if self.alive[other] and other != y:
                    self.add_neq(z, other, d | deps, n or nd)
        self.merged[y] = (z, deps, nd)
        self.trail.append(("M", y))
        # An anonymous node takes its subtree with it; the successors of a
        # root were re-attached to z above and stay alive.
        self._kill(y, subtree=y_is_tree)
        self._touch(z)

    # ------------------------------------------------------------------
    # setup
    # ------------------------------------------------------------------
    def _setup(self) -> None:
        p = self.p
        if p.inconsistent:
            raise _Clash(EMPTY)
        for a in p.individuals:
            if a not in self.node_of:
                self.node_of[a] = self._new_node(a, -1)
        for a, cid in p.assertions:
            self.add(self.node_of[a], cid, EMPTY, False)
        for r, a, b in p.edges:
            self.add_edge(self.node_of[a], self.node_of[b], r, EMPTY, False)
        for a, b in p.different:
            self.add_neq(self.node_of[a], self.node_of[b], EMPTY, False)
        for a, b in p.same:
            x, _, _ = self.rep(self.node_of[a])
            y, _, _ = self.rep(self.node_of[b])
            if x != y:
                lo, hi = (x, y) if x < y else (y, x)
                self.merge(hi, lo, EMPTY, False)

    # ------------------------------------------------------------------
    # deterministic rules
    # ------------------------------------------------------------------
    def _process(self, x: int) -> None:
        """Apply all deterministic rules at x; record pending work."""
        t = self.t
        kind, data = t.kind, t.data
        lab = self.labels[x]
        has_nd = False
        has_gen = False
        for cid, (deps, nd) in list(lab.items()):
            if not self.alive[x]:
                return
            k = kind[cid]
            if k == ATOM:
                for d in self.p.absorbed.get(data[cid][0], ()):
                    self.add(x, d, deps, nd)
            elif k == AND:
                for d in data[cid]:
                    self.add(x, d, deps, nd)
            elif k == OR:
                if self._or_rule(x, cid, deps, nd):
                    has_nd = True
            elif k == ALL:
                role, f = data[cid]
                for y, row in list(self.succ[x].items()):
                    if not self.alive[y]:
                        continue
                    e = row.get(role)
                    if e is not None:
                        self.add(y, f, deps | e[0], nd or e[1])
                    for tr, te in row.items():
                        if tr in self.rbox.transitive and self.rbox.below(tr, role):
                            self.add(y, t.all(tr, f), deps | te[0], nd or te[1])
            elif k == ALLU:
                f = data[cid][0]
                old = self.allu.get(f)
                if old is None or (old[1] and not nd) or (old[1] == nd and deps < old[0]):
                    self.allu[f] = (deps, nd)
                    self.trail.append(("A", f, old))
                    for y in range(len(self.labels)):
                        if self.alive[y]:
                            self.add(y, f, deps, nd)
            elif k == LE:
                state = self._le_state(x, cid, deps, nd)
                if state:
                    has_nd = True
            elif k in (SOME, GE, SOMEU):
                has_gen = True
        if has_nd:
            self.pending_nd.add(x)
        else:
            self.pending_nd.discard(x)
        if has_gen:
            self.pending_gen.add(x)
        else:
            self.pending_gen.discard(x)

    def _or_open(self, x: int, cid: int):
        """Return (satisfied, open disjuncts, deps of refuted disjuncts, nd of those)."""
        lab = self.labels[x]
        t = self.t
        open_: list[int] = []
        rdeps = EMPTY
        rnd = False
        for d in t.data[cid]:
            if d in lab:
                return True, [], EMPTY, False
            comp = lab.get(t.neg(d))
            if comp is not None:
                rdeps |= comp[0]
                rnd = rnd or comp[1]
            else:
                open_.append(d)
        return False, open_, rdeps, rnd

    def _or_rule(self, x: int, cid: int, deps: frozenset[int], nd: bool) -> bool:
        sat, open_, rdeps, rnd = self._or_open(x, cid)
        if sat:
            return False
        if not open_:
            raise _Clash(deps | rdeps)
        if len(open_) == 1:
            self.add(x, open_[0], deps | rdeps, nd or rnd)
            return False
        return True

    def _le_candidates(self, x: int, cid: int):
        n, role, f = self.t.data[cid]
        if f == self.t.top:
            return n, list(self.neighbours(x, role)), f
        return n, [(y, e) for y, e in self.neighbours(x, role) if f in self.labels[y]], f

    def _le_state(self, x: int, cid: int, deps: frozenset[int], nd: bool) -> bool:
        """Deterministic part of the at-most rule; True if nondeterministic work remains."""
        n, role, f = self.t.data[cid]
        pending = False
        if f != self.t.top:
            negf = self.t.neg(f)
            for y, _ in self.neighbours(x, role):
                lab = self.labels[y]
                if f not in lab and negf not in lab:
                    pending = True
        _, cands, _ = self._le_candidates(x, cid)
        if len(cands) <= n:
            return pending
        pairs = self._merge_pairs(cands)
        if not pairs:
            d, _ = self._merge_deps(x, cid, cands, deps, nd)
            for i, (y, _) in enumerate(cands):
                for z, _ in cands[i + 1 :]:
                    q = self.neq_entry(y, z)
                    if q is not None:
                        d = d | q[0]
            raise _Clash(d)
        if len(pairs) == 1:
            y, z = pairs[0]
            d, dn = self._merge_deps(x, cid, cands, deps, nd)
            self.merge(y, z, d, dn)
            return False
        return True

    def _merge_pairs(self, cands) -> list[tuple[int, int]]:
        """Unordered mergeable pairs, each oriented (source, target)."""
        pairs = []
        for i, (y, _) in enumerate(cands):
            for z, _ in cands[i + 1 :]:
                if self.neq_entry(y, z) is not None:
                    continue
                pairs.append(self._orient(y, z))
        return pairs

    def _orient(self, y: int, z: int) -> tuple[int, int]:
        """Merge anonymous into named nodes; otherwise the younger into the older."""
        y_named = self.named[y] is not None
        z_named = self.named[z] is not None
        if y_named and not z_named:
            return z, y
        if z_named and not y_named:
            return y, z
        return (z, y) if y < z else (y, z)

    def _merge_deps(self, x: int, cid: int, cands, deps, nd):
        f = self.t.data[cid][2]
        d, dn = deps, nd
        for y, e in cands:
            d = d | e[0]
            dn = dn or e[1]
            le = self.labels[y].get(f)
            if le is not None:
                d = d | le[0]
                dn = dn or le[1]
        return d, dn

    def _global_checks(self) -> None:
        """Negative role assertions, including paths over transitive sub-roles."""
        for r, a, b in self.p.neg_edges:
            x, dx, _ = self.rep(self.node_of[a])
            y, dy, _ = self.rep(self.node_of[b])
            row = self.succ[x].get(y)
            if row is not None and r in row:
                raise _Clash(dx | dy | row[r][0])
            for tr in self.rbox.transitive:
                if not self.rbox.below(tr, r):
                    continue
                path = self._path_deps(x, y, tr)
                if path is not None:
                    raise _Clash(dx | dy | path)

    def _path_deps(self, x: int, y: int, role: str) -> frozenset[int] | None:
        """Dependencies of some ``role``-path from x to y, or None."""
        seen = {x: EMPTY}
        queue = [x]
        while queue:
            cur = queue.pop()
            for v, e in self.neighbours(cur, role):
                if v not in seen:
                    seen[v] = seen[cur] | e[0]
                    if v == y:
                        return seen[v]
                    queue.append(v)
        return None

    # ------------------------------------------------------------------
    # nondeterministic rules
    # ------------------------------------------------------------------
    def _open_branch(self, kind: str, x: int, alternatives: list, base: frozenset[int], extra=None) -> None:
        self.branch_counter += 1
        b = _Branch(self.branch_counter, len(self.trail), kind, x, alternatives, base)
        if extra is not None:
            b.failed = EMPTY
        self.branches.append(b)
        self._take(b)

    def _take(self, b: _Branch) -> None:
        alt = b.alternatives[b.next]
        b.next += 1
        deps = b.base | {b.ident}
        if b.kind in ("or", "choose"):
            self.add(b.node, alt, deps, True)
        else:
            y, z = alt
            self.merge(y, z, deps, True)

    def _nondeterministic_step(self) -> bool:
        t = self.t
        for x in sorted(self.pending_nd):
            if not self.alive[x]:
                continue
            lab = self.labels[x]
            for cid, (deps, nd) in list(lab.items()):
                if t.kind[cid] != OR:
                    continue
                sat, open_, rdeps, _ = self._or_open(x, cid)
                if not sat and len(open_) > 1:
                    self._open_branch("or", x, open_, deps | rdeps)
                    return True
            for cid, (deps, nd) in list(lab.items()):
                if t.kind[cid] != LE:
                    continue
                n, role, f = t.data[cid]
                if f != t.top:
                    negf = t.neg(f)
                    for y, e in self.neighbours(x, role):
                        ly = self.labels[y]
                        if f not in ly and negf not in ly:
                            self._open_branch("choose", y, [f, negf], deps | e[0])
                            return True
                _, cands, _ = self._le_candidates(x, cid)
                if len(cands) > n:
                    pairs = self._merge_pairs(cands)
                    if len(pairs) > 1:
                        d, _ = self._merge_deps(x, cid, cands, deps, nd)
                        self._open_branch("merge", x, pairs, d)
                        return True
        return False

    # ------------------------------------------------------------------
    # generating rules
    # ------------------------------------------------------------------
    def _blocked(self, x: int, memo: dict[int, bool]) -> bool:
        if x in memo:
            return memo[x]
        p = self.parent[x]
        if self.named[x] is not None or p < 0:
            memo[x] = False
            return False
        if self._blocked(p, memo):
            memo[x] = True
            return True
        keys = self.labels[x].keys()
        y = p
        result = False
        while y >= 0 and self.named[y] is None:
            if self.parent[y] < 0:
                break
            if keys <= self.labels[y].keys():
                result = True
                break
            y = self.parent[y]
        memo[x] = result
        return result

    def _generating_step(self) -> bool:
        t = self.t
        memo: dict[int, bool] = {}
        for x in sorted(self.pending_gen):
            if not self.alive[x] or self._blocked(x, memo):
                continue
            for cid, (deps, nd) in list(self.labels[x].items()):
                k = t.kind[cid]
                if k == SOME:
                    role, f = t.data[cid]
                    # ⊤ is never stored in labels, so any neighbour satisfies ∃r.⊤.
                    if any(f == t.top or f in self.labels[y] for y, _ in self.neighbours(x, role)):
                        continue
                    y = self._new_node(None, x)
                    self.add_edge(x, y, role, deps, nd)
                    self.add(y, f, deps, nd)
                    return True
                if k == GE:
                    if (x, cid) in self.ge_done:
                        continue
                    n, role, f = t.data[cid]
                    self.ge_done.add((x, cid))
                    self.trail.append(("G", (x, cid)))
                    made = []
                    for _ in range(n):
                        y = self._new_node(None, x)
                        self.add_edge(x, y, role, deps, nd)
                        self.add(y, f, deps, nd)
                        made.append(y)
                    for i, y in enumerate(made):
                        for z in made[i + 1 :]:
                            self.add_neq(y, z, deps, nd)
                    return True
                if k == SOMEU:
                    f = t.data[cid][0]
                    if any(self.alive[y] and (f == t.top or f in self.labels[y]) for y in range(len(self.labels))):
                        continue
                    y = self._new_node(None, -1)
                    self.add(y, f, deps, nd)
                    return True
        return False

    # ------------------------------------------------------------------
    # driver
    # ------------------------------------------------------------------
    def _backjump(self, deps: frozenset[int]) -> bool:
        """Resume search after a clash; False when the clash is unconditional."""
        while True:
            if not deps:
                return False
            top = max(deps)
            while self.branches and self.branches[-1].ident > top:
                self.branches.pop()
            if not self.branches:
                return False
            b = self.branches[-1]
            self.undo_to(b.trail_len)
            b.failed = b.failed | (deps - {b.ident})
            if b.next < len(b.alternatives):
                try:
                    self._take(b)
                    return True
                except _Clash as c:
                    deps = c.deps
                    continue
            self.branches.pop()
            deps = b.failed

    def run(self) -> bool:
        try:
            self._setup()
        except _Clash:
            return False
        while True:
            try:
                while self.dirty:
                    x = min(self.dirty)
                    self.dirty.discard(x)
                    if self.alive[x]:
                        self.rule_applications += 1
                        self._process(x)
                self._global_checks()
                if self._nondeterministic_step():
                    continue
                if self._generating_step():
                    continue
                return True
            except _Clash as c:
                if not self._backjump(c.deps):
                    return False
