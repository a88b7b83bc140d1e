"""Interned concept table used by the tableau.

Ground concepts are hash-consed into small integers.  Interning normalises
on the fly (flattening, unit and zero elements, ``>=1`` as ``some``) and
complements are computed structurally, so labels only ever hold
negation-normal-form concepts.
"""

from __future__ import annotations

from ..errors import UnsupportedConstruct
from ..syntax import (
    And,
    AtLeast,
    AtMost,
    Bottom,
    BottomRole,
    Concept,
    CVar,
    Exists,
    Forall,
    Inverse,
    Name,
    Not,
    Or,
    Role,
    RoleTerm,
    RVar,
    Top,
    TopRole,
)

TOP_K, BOT_K, ATOM, NATOM, AND, OR, SOME, ALL, GE, LE, SOMEU, ALLU = range(12)

_BOTTOM_ROLE = object()


class ConceptTable:
    def __init__(self) -> None:
        self.kind: list[int] = []
        self.data: list[tuple] = []
        self._ids: dict[tuple, int] = {}
        self._neg: dict[int, int] = {}
        self._interned: dict[Concept, int] = {}
        self.top = self._make(TOP_K, ())
        self.bot = self._make(BOT_K, ())

    def __len__(self) -> int:
        return len(self.kind)

    def _make(self, kind: int, data: tuple) -> int:
        key = (kind, data)
        cid = self._ids.get(key)
        if cid is None:
            cid = len(self.kind)
            self.kind.append(kind)
            self.data.append(data)
            self._ids[key] = cid
        return cid

    # -- constructors ------------------------------------------------------
    def atom(self, name: str, positive: bool = True) -> int:
        return self._make(ATOM if positive else NATOM, (name,))

    def conj(self, ids) -> int:
        flat: set[int] = set()
        for i in ids:
            k = self.kind[i]
            if k == TOP_K:
                continue
            if k == BOT_K:
                return self.bot
            if k == AND:
                flat.update(self.data[i])
            else:
                flat.add(i)
        if not flat:
            return self.top
        if len(flat) == 1:
            return next(iter(flat))
        return self._make(AND, tuple(sorted(flat)))

    def disj(self, ids) -> int:
        flat: list[int] = []
        seen: set[int] = set()
        for i in ids:
            k = self.kind[i]
            if k == BOT_K:
                continue
            if k == TOP_K:
                return self.top
            parts = self.data[i] if k == OR else (i,)
            for p in parts:
                if p not in seen:
                    seen.add(p)
                    flat.append(p)
        if not flat:
            return self.bot
        if len(flat) == 1:
            return flat[0]
        # Disjunct order is kept: the tableau tries disjuncts left to right,
        # and internalised inclusions put the negated left-hand side first.
        return self._make(OR, tuple(flat))

    def some(self, role, f: int) -> int:
        if role is _BOTTOM_ROLE or f == self.bot:
            return self.bot
        if role is None:
            return self._make(SOMEU, (f,))
        return self._make(SOME, (role, f))

    def all(self, role, f: int) -> int:
        if role is _BOTTOM_ROLE or f == self.top:
            return self.top
        if role is None:
            return self._make(ALLU, (f,))
        return self._make(ALL, (role, f))

    def ge(self, n: int, role, f: int) -> int:
        if n == 0:
            return self.top
        if n == 1:
            return self.some(role, f)
        if role is _BOTTOM_ROLE or f == self.bot:
            return self.bot
        if role is None:
            raise UnsupportedConstruct("number restriction over TopRole")
        return self._make(GE, (n, role, f))

    def le(self, n: int, role, f: int) -> int:
        if role is _BOTTOM_ROLE or f == self.bot:
            return self.top
        if n == 0:
            return self.all(role, self.neg(f))
        if role is None:
            raise UnsupportedConstruct("number restriction over TopRole")
        return self._make(LE, (n, role, f))

    # -- complement --------------------------------------------------------
    def neg(self, cid: int) -> int:
        out = self._neg.get(cid)
        if out is not None:
            return out
        k, d = self.kind[cid], self.data[cid]
        if k == TOP_K:
            out = self.bot
        elif k == BOT_K:
            out = self.top
        elif k == ATOM:
            out = self.atom(d[0], False)
        elif k == NATOM:
            out = self.atom(d[0], True)
        elif k == AND:
            out = self.disj(self.neg(i) for i in d)
        elif k == OR:
            out = self.conj(self.neg(i) for i in d)
        elif k == SOME:
            out = self.all(d[0], self.neg(d[1]))
        elif k == ALL:
            out = self.some(d[0], self.neg(d[1]))
        elif k == GE:
            out = self.le(d[0] - 1, d[1], d[2])
        elif k == LE:
            out = self.ge(d[0] + 1, d[1], d[2])
        elif k == SOMEU:
            out = self.all(None, self.neg(d[0]))
        else:  # ALLU
            out = self.some(None, self.neg(d[0]))
        self._neg[cid] = out
        self._neg.setdefault(out, cid)
        return out

    # -- conversion from abstract syntax -----------------------------------
    @staticmethod
    def role_key(role: RoleTerm):
        if isinstance(role, Role):
            return role.name
        if isinstance(role, TopRole):
            return None
        if isinstance(role, BottomRole):
            return _BOTTOM_ROLE
        if isinstance(role, Inverse):
            raise UnsupportedConstruct("inverse role", "inverse roles are not supported by the reasoner")
        if isinstance(role, RVar):
            raise TypeError("cannot intern a concept template with role variables")
        raise TypeError(f"not a role: {role!r}")

    def intern(self, c: Concept) -> int:
        cid = self._interned.get(c)
        if cid is not None:
            return cid
        match c:
            case Top():
                cid = self.top
            case Bottom():
                cid = self.bot
            case Name(n):
                cid = self.atom(n)
            case Not(arg):
                cid = self.neg(self.intern(arg))
            case And(args):
                cid = self.conj([self.intern(a) for a in args])
            case Or(args):
                cid = self.disj([self.intern(a) for a in args])
            case Exists(r, f):
                cid = self.some(self.role_key(r), self.intern(f))
            case Forall(r, f):
                cid = self.all(self.role_key(r), self.intern(f))
            case AtLeast(n, r, f):
                cid = self.ge(n, self.role_key(r), self.intern(f))
            case AtMost(n, r, f):
                cid = self.le(n, self.role_key(r), self.intern(f))
            case CVar():
                raise TypeError("cannot intern a concept template with concept variables")
            case _:
                raise TypeError(f"not a concept: {c!r}")
        self._interned[c] = cid
        return cid

    def describe(self, cid: int) -> str:
        """Readable rendering, mainly for debugging and error messages."""
        k, d = self.kind[cid], self.data[cid]
        role = lambda r: "TopRole" if r is None else r  # noqa: E731
        if k == TOP_K:
            return "Top"
        if k == BOT_K:
            return "Bottom"
        if k == ATOM:
            return d[0]
        if k == NATOM:
            return f"not({d[0]})"
        if k in (AND, OR):
            word = "and" if k == AND else "or"
            return f"{word}(" + " ".join(self.describe(i) for i in d) + ")"
        if k == SOME:
            return f"some({role(d[0])} {self.describe(d[1])})"
        if k == ALL:
            return f"all({role(d[0])} {self.describe(d[1])})"
        if k == GE:
            return f"atLeast({d[0]} {d[1]} {self.describe(d[2])})"
        if k == LE:
            return f"atMost({d[0]} {d[1]} {self.describe(d[2])})"
        if k == SOMEU:
            return f"some(TopRole {self.describe(d[0])})"
        return f"all(TopRole {self.describe(d[0])})"
