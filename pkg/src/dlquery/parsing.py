"""Reader and writer for the functional-style ontology and query syntax.

Example document::

    # comments run to the end of the line
    SubClassOf(Infection some(hasCausalLinkTo Top))
    EquivalentClasses(B some(r C))
    ClassAssertion(A a)  RoleAssertion(r a b)

Queries use the same grammar; ``?name`` marks a variable whose sort (concept,
role or individual) is inferred from the position it occupies.
"""

from __future__ import annotations

import re
from collections.abc import Iterator
from dataclasses import dataclass

from .errors import ParseError, SignatureError, SimplicityError, UnsupportedConstruct
from .syntax import (
    BOTTOM,
    BOTTOM_ROLE,
    TOP,
    TOP_ROLE,
    And,
    AtLeast,
    AtMost,
    Axiom,
    ClassAssertion,
    Concept,
    CVar,
    DifferentFrom,
    Exists,
    Forall,
    IndividualTerm,
    Inverse,
    IVar,
    Name,
    NegRoleAssertion,
    Not,
    Ontology,
    Or,
    Role,
    RoleAssertion,
    RoleTerm,
    RVar,
    SameAs,
    SubClassOf,
    SubRoleOf,
    Trans,
    exactly,
)

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r\f\v]+)
  | (?P<nl>\n)
  | (?P<comment>\#[^\n]*)
  | (?P<lp>\()
  | (?P<rp>\))
  | (?P<int>\d+(?![\w.:\-]))
  | (?P<var>\?[A-Za-z_][\w\-.:]*)
  | (?P<ident>[A-Za-z_][\w\-.:]*)
  | (?P<brace>[{}])
    """,
    re.VERBOSE,
)

# Keywords of constructs outside the supported fragment, mapped to a
# human-readable description used in the error message.
_UNSUPPORTED = {
    "oneOf": "nominal",
    "ObjectOneOf": "nominal",
    "nominal": "nominal",
    "hasValue": "nominal",
    "ObjectHasValue": "nominal",
    "hasSelf": "Self restriction",
    "Self": "Self restriction",
    "ObjectHasSelf": "Self restriction",
    "chain": "role chain",
    "ObjectPropertyChain": "role chain",
    "SubPropertyChainOf": "role chain",
    "DataSomeValuesFrom": "data property",
    "DataAllValuesFrom": "data property",
    "DataHasValue": "data property",
    "DataPropertyAssertion": "data property",
    "DataProperty": "data property",
    "DataMinCardinality": "data property",
    "DataMaxCardinality": "data property",
    "Reflexive": "reflexive role",
    "Irreflexive": "irreflexive role",
    "Asymmetric": "asymmetric role",
    "Symmetric": "symmetric role",
    "Functional": "functional role axiom",
}


@dataclass(frozen=True, slots=True)
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    line, line_start, pos = 1, 0, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        col = pos - line_start + 1
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        assert kind is not None
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind == "brace":
            raise UnsupportedConstruct("nominal", f"line {line}, column {col}")
        elif kind not in ("ws", "comment"):
            tokens.append(Token(kind, m.group(), line, col))
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


class _Parser:
    def __init__(self, text: str, allow_variables: bool):
        self.tokens = tokenize(text)
        self.i = 0
        self.allow_variables = allow_variables
        self.var_sorts: dict[str, tuple[str, Token]] = {}

    # -- token helpers -----------------------------------------------------
    def peek(self, k: int = 0) -> Token:
        return self.tokens[min(self.i + k, len(self.tokens) - 1)]

    def next(self) -> Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, kind: str, what: str) -> Token:
        tok = self.next()
        if tok.kind != kind:
            found = tok.text or "end of input"
            raise ParseError(f"expected {what}, found {found!r}", tok.line, tok.col)
        return tok

    def error(self, tok: Token, msg: str) -> ParseError:
        return ParseError(msg, tok.line, tok.col)

    def _check_unsupported(self, tok: Token) -> None:
        if tok.kind == "ident" and tok.text in _UNSUPPORTED and self.peek().kind == "lp":
            raise UnsupportedConstruct(_UNSUPPORTED[tok.text], f"line {tok.line}, column {tok.col}")

    def variable(self, tok: Token, sort: str) -> str:
        if not self.allow_variables:
            raise self.error(tok, f"variable {tok.text} not allowed in an ontology")
        name = tok.text[1:]
        seen = self.var_sorts.get(name)
        if seen is not None and seen[0] != sort:
            raise SignatureError(
                f"variable ?{name} used as {sort} but earlier as {seen[0]} "
                f"(line {seen[1].line}, column {seen[1].col})",
                tok.line,
                tok.col,
            )
        self.var_sorts.setdefault(name, (sort, tok))
        return name

    # -- grammar -----------------------------------------------------------
    def document(self) -> list[Axiom]:
        out: list[Axiom] = []
        while self.peek().kind != "eof":
            out.extend(self.axiom())
        return out

    def axiom(self) -> list[Axiom]:
        tok = self.next()
        if tok.kind != "ident":
            raise self.error(tok, f"expected an axiom keyword, found {tok.text or 'end of input'!r}")
        self._check_unsupported(tok)
        kw = tok.text
        self.expect("lp", "'('")
        result: list[Axiom]
        if kw == "SubClassOf":
            result = [SubClassOf(self.concept(), self.concept())]
        elif kw == "EquivalentClasses":
            cs = self.concepts(2)
            result = []
            for a, b in zip(cs, cs[1:]):
                result += [SubClassOf(a, b), SubClassOf(b, a)]
        elif kw == "SubRoleOf":
            result = [SubRoleOf(self.role(), self.role())]
        elif kw == "Trans":
            result = [Trans(self.role())]
        elif kw == "ClassAssertion":
            result = [ClassAssertion(self.concept(), self.individual())]
        elif kw == "RoleAssertion":
            result = [RoleAssertion(self.role(), self.individual(), self.individual())]
        elif kw == "NegRoleAssertion":
            result = [NegRoleAssertion(self.role(), self.individual(), self.individual())]
        elif kw == "SameAs":
            result = [SameAs(tuple(self.individuals(2)))]
        elif kw == "DifferentFrom":
            inds = self.individuals(2)
            result = [DifferentFrom(a, b) for k, a in enumerate(inds) for b in inds[k + 1 :]]
        else:
            raise self.error(tok, f"unknown axiom keyword {kw!r}")
        self.expect("rp", "')'")
        return result

    def concepts(self, minimum: int) -> list[Concept]:
        out: list[Concept] = []
        while self.peek().kind != "rp":
            out.append(self.concept())
        if len(out) < minimum:
            raise self.error(self.peek(), f"expected at least {minimum} concepts")
        return out

    def individuals(self, minimum: int) -> list[IndividualTerm]:
        out: list[IndividualTerm] = []
        while self.peek().kind != "rp":
            out.append(self.individual())
        if len(out) < minimum:
            raise self.error(self.peek(), f"expected at least {minimum} individuals")
        return out

    def individual(self) -> IndividualTerm:
        tok = self.next()
        if tok.kind == "var":
            return IVar(self.variable(tok, "individual"))
        if tok.kind == "ident" and tok.text not in ("Top", "Bottom", "TopRole", "BottomRole"):
            if self.peek().kind == "lp":
                self._check_unsupported(tok)
                raise self.error(tok, f"expected an individual, found constructor {tok.text!r}")
            return tok.text
        raise self.error(tok, f"expected an individual, found {tok.text or 'end of input'!r}")

    def role(self) -> RoleTerm:
        tok = self.next()
        if tok.kind == "var":
            return RVar(self.variable(tok, "role"))
        if tok.kind != "ident":
            raise self.error(tok, f"expected a role, found {tok.text or 'end of input'!r}")
        if tok.text == "TopRole":
            return TOP_ROLE
        if tok.text == "BottomRole":
            return BOTTOM_ROLE
        if self.peek().kind == "lp":
            self._check_unsupported(tok)
            if tok.text != "inv":
                raise self.error(tok, f"unknown role constructor {tok.text!r}")
            self.next()
            inner = self.role()
            self.expect("rp", "')'")
            if not isinstance(inner, (Role, RVar)):
                raise self.error(tok, "inv(...) may only wrap a role name or role variable")
            return Inverse(inner)
        if tok.text in ("Top", "Bottom"):
            raise self.error(tok, f"{tok.text} is a concept, not a role")
        return Role(tok.text)

    def cardinality(self) -> int:
        tok = self.next()
        if tok.kind != "int":
            raise self.error(tok, f"expected a non-negative integer, found {tok.text!r}")
        return int(tok.text)

    def concept(self) -> Concept:
        tok = self.next()
        if tok.kind == "var":
            return CVar(self.variable(tok, "concept"))
        if tok.kind != "ident":
            raise self.error(tok, f"expected a concept, found {tok.text or 'end of input'!r}")
        if tok.text == "Top":
            return TOP
        if tok.text == "Bottom":
            return BOTTOM
        if tok.text in ("TopRole", "BottomRole"):
            raise self.error(tok, f"{tok.text} is a role, not a concept")
        if self.peek().kind != "lp":
            return Name(tok.text)
        self._check_unsupported(tok)
        kw = tok.text
        self.next()
        c: Concept
        if kw == "not":
            c = Not(self.concept())
        elif kw in ("and", "or"):
            args = tuple(self.concepts(2))
            c = And(args) if kw == "and" else Or(args)
        elif kw == "some":
            c = Exists(self.role(), self.concept())
        elif kw == "all":
            c = Forall(self.role(), self.concept())
        elif kw in ("atLeast", "atMost", "exactly"):
            n = self.cardinality()
            r = self.role()
            f = self.concept()
            c = AtLeast(n, r, f) if kw == "atLeast" else AtMost(n, r, f) if kw == "atMost" else exactly(n, r, f)
        else:
            raise self.error(tok, f"unknown concept constructor {kw!r}")
        self.expect("rp", "')'")
        return c


def parse_axioms(text: str, allow_variables: bool = False) -> list[Axiom]:
    return _Parser(text, allow_variables).document()


def parse_ontology(text: str, check_simple: bool = True) -> Ontology:
    """Parse an ontology document and validate it.

    Raises ``ParseError`` (with line and column) on malformed input,
    ``UnsupportedConstruct`` for nominals, role chains, Self or data
    properties, and ``SimplicityError`` when a number restriction uses a
    non-simple role.
    """
    from .roles import check_simplicity

    onto = Ontology.from_axioms(parse_axioms(text, allow_variables=False))
    if check_simple:
        report = check_simplicity(onto)
        if report:
            raise SimplicityError(report)
    return onto


def serialize_axioms(axioms: Iterator[Axiom] | tuple[Axiom, ...] | list[Axiom]) -> str:
    return "".join(f"{ax}\n" for ax in axioms)


def serialize_ontology(onto: Ontology) -> str:
    """One axiom per line, TBox then RBox then ABox."""
    return serialize_axioms(onto.axioms)


def parse_concept(text: str, allow_variables: bool = True) -> Concept:
    p = _Parser(text, allow_variables)
    c = p.concept()
    p.expect("eof", "end of input")
    return c
