"""Classification hierarchies over concept or role names.

A hierarchy is the quotient of a preorder (``x ⊑ y``) by equivalence,
reduced to its direct edges.  The built-in top and bottom elements are
members like any other, so every class has a path up to the top class and
down to the bottom class.
"""

from __future__ import annotations

from collections.abc import Hashable, Iterable, Mapping
from dataclasses import dataclass
from functools import cached_property

Member = Hashable
Class = frozenset


def _sort_key(m: Member) -> tuple[int, str]:
    return (0 if type(m).__name__ in ("Top", "TopRole", "Bottom", "BottomRole") else 1, str(m))


@dataclass(frozen=True)
class Hierarchy:
    top: Member
    bottom: Member
    class_of: Mapping[Member, Class]
    # strict supers / subs between classes, transitively closed
    above: Mapping[Class, frozenset[Class]]
    below: Mapping[Class, frozenset[Class]]
    parents: Mapping[Class, tuple[Class, ...]]
    children: Mapping[Class, tuple[Class, ...]]

    @staticmethod
    def from_leq(leq: Mapping[Member, Iterable[Member]], top: Member, bottom: Member) -> "Hierarchy":
        """Build from ``leq[x]`` = every member known to subsume ``x``."""
        members = set(leq) | {top, bottom}
        ups: dict[Member, set[Member]] = {m: set(leq.get(m, ())) | {m, top} for m in members}
        for m in members:
            if bottom in ups[m]:
                ups[m] = set(members)
        ups[bottom] = set(members)
        # transitive closure (inputs are normally closed already)
        changed = True
        while changed:
            changed = False
            for m in members:
                extra = set().union(*(ups[u] for u in ups[m])) - ups[m]
                if extra:
                    ups[m] |= extra
                    changed = True
        class_of: dict[Member, Class] = {}
        for m in members:
            if m not in class_of:
                cls = frozenset(u for u in ups[m] if m in ups[u])
                for u in cls:
                    class_of[u] = cls
        classes = set(class_of.values())
        rep = {c: next(iter(c)) for c in classes}
        above = {c: frozenset(class_of[u] for u in ups[rep[c]]) - {c} for c in classes}
        below_sets: dict[Class, set[Class]] = {c: set() for c in classes}
        for c, ups_c in above.items():
            for u in ups_c:
                below_sets[u].add(c)
        below = {c: frozenset(s) for c, s in below_sets.items()}
        order = lambda cs: tuple(sorted(cs, key=lambda c: min(map(_sort_key, c))))  # noqa: E731
        parents = {
            c: order(p for p in above[c] if not any(p in above[q] for q in above[c])) for c in classes
        }
        children = {
            c: order(k for k in below[c] if not any(k in below[q] for q in below[c])) for c in classes
        }
        return Hierarchy(top, bottom, class_of, above, below, parents, children)

    # -- queries -----------------------------------------------------------
    @property
    def top_class(self) -> Class:
        return self.class_of[self.top]

    @property
    def bottom_class(self) -> Class:
        return self.class_of[self.bottom]

    @cached_property
    def classes(self) -> tuple[Class, ...]:
        return tuple(sorted(set(self.class_of.values()), key=lambda c: min(map(_sort_key, c))))

    def members(self) -> frozenset[Member]:
        return frozenset(self.class_of)

    def __contains__(self, m: Member) -> bool:
        return m in self.class_of

    def subsumes(self, sub: Member, sup: Member) -> bool:
        """True iff ``sub ⊑ sup``."""
        a, b = self.class_of[sub], self.class_of[sup]
        return a == b or b in self.above[a]

    def equivalents(self, m: Member) -> Class:
        return self.class_of[m]

    def direct_parents(self, m: Member) -> tuple[Class, ...]:
        return self.parents[self.class_of[m]]

    def direct_children(self, m: Member) -> tuple[Class, ...]:
        return self.children[self.class_of[m]]

    def subs(self, m: Member) -> frozenset[Member]:
        """Every member ``x`` with ``x ⊑ m`` (including m and its equivalents)."""
        c = self.class_of[m]
        return frozenset().union(c, *self.below[c])

    def supers(self, m: Member) -> frozenset[Member]:
        c = self.class_of[m]
        return frozenset().union(c, *self.above[c])

    @cached_property
    def _depth(self) -> dict[Class, int]:
        out: dict[Class, int] = {}
        bottom = self.bottom_class

        def height(c: Class) -> int:
            if c in out:
                return out[c]
            kids = [k for k in self.children[c] if k != bottom]
            out[c] = 1 + max((height(k) for k in kids), default=0)
            return out[c]

        for c in sorted(self.classes, key=lambda c: len(self.below[c])):
            height(c)
        return out

    def depth(self, m: Member) -> int:
        """1 + length of the longest downward path to a leaf (bottom excluded)."""
        return self._depth[self.class_of[m]]

    def representative(self, cls: Class) -> Member:
        """Canonical member: a built-in if present, else the smallest name."""
        return min(cls, key=_sort_key)
