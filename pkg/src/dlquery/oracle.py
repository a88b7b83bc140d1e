"""Reference evaluators that test mappings one by one.

:func:`naive_evaluate` enumerates every sort-correct total mapping and asks
the reasoner whether the whole instantiated query is entailed.  It applies
none of the engine's optimizations, so it serves as ground truth.

:func:`naive_ordered_evaluate` evaluates templates in a fixed order, trying
every value of each newly introduced variable against every partial
solution.  It exposes how the order of templates alone changes the number of
mappings that must be tested.
"""

from __future__ import annotations

import itertools
import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass

from .errors import InconsistentOntology, ResourceLimit
from .query import IDENTITY, Query, Solution, Validity, check_supported, instantiate
from .reasoner import Reasoner
from .syntax import (
    BOTTOM,
    BOTTOM_ROLE,
    TOP,
    TOP_ROLE,
    Axiom,
    CVar,
    MappingValue,
    Name,
    Ontology,
    Role,
    RVar,
    Variable,
    variables,
)

DEFAULT_MAPPING_BUDGET = 10**6


@dataclass(frozen=True)
class OracleResult:
    solutions: frozenset[Solution]
    mappings_tested: int
    entailment_checks: int


def sort_domain(reasoner: Reasoner, v: Variable, include_bottom: bool = False) -> tuple[MappingValue, ...]:
    """Every value a variable of ``v``'s sort may take."""
    if isinstance(v, CVar):
        names = tuple(Name(c) for c in reasoner.concept_names)
        return ((TOP, BOTTOM) + names) if include_bottom else names
    if isinstance(v, RVar):
        names = tuple(Role(r) for r in reasoner.role_names)
        return ((TOP_ROLE, BOTTOM_ROLE) + names) if include_bottom else names
    return tuple(reasoner.individuals)


def _reasoner_for(onto: Ontology, reasoner: Reasoner | None, node_budget: int) -> Reasoner:
    reasoner = reasoner or Reasoner(onto, node_budget)
    if not reasoner.is_consistent():
        raise InconsistentOntology("the ontology has no model")
    return reasoner


def naive_evaluate(
    onto: Ontology,
    query: Query | Iterable[Axiom],
    *,
    include_bottom: bool = False,
    mapping_budget: int = DEFAULT_MAPPING_BUDGET,
    reasoner: Reasoner | None = None,
    node_budget: int = 100_000,
) -> OracleResult:
    """Solutions of ``query`` by exhaustive mapping enumeration."""
    query = query if isinstance(query, Query) else Query(tuple(query))
    check_supported(query)
    reasoner = _reasoner_for(onto, reasoner, node_budget)
    validity = Validity(onto)
    vs = sorted(query.variables, key=str)
    domains = [sort_domain(reasoner, v, include_bottom) for v in vs]
    total = math.prod(len(d) for d in domains)
    if total > mapping_budget:
        raise ResourceLimit(f"{total} mappings exceed the mapping budget of {mapping_budget}")
    solutions: set[Solution] = set()
    tested = 0
    checks = 0
    for combo in itertools.product(*domains):
        mu = frozenset(zip(vs, combo))
        instance = [instantiate(at, mu) for at in query]
        if not validity.valid(instance):
            continue
        tested += 1
        checks += 1
        if all(reasoner.is_entailed(ax) for ax in instance):
            solutions.add(mu)
    return OracleResult(frozenset(solutions), tested, checks)


@dataclass(frozen=True)
class OrderedRun:
    """Outcome of evaluating templates one at a time in a fixed order."""

    solutions: frozenset[Solution]
    tests_per_step: tuple[int, ...]
    sizes_per_step: tuple[int, ...]

    @property
    def total_tests(self) -> int:
        return sum(self.tests_per_step)

    @property
    def total_size(self) -> int:
        return sum(self.sizes_per_step)


def naive_ordered_evaluate(
    reasoner: Reasoner, templates: Sequence[Axiom], include_bottom: bool = False
) -> OrderedRun:
    """Evaluate ``templates`` in the given order by testing every extension."""
    current: list[Solution] = [IDENTITY]
    bound: set[Variable] = set()
    tests: list[int] = []
    sizes: list[int] = []
    for at in templates:
        new = sorted(variables(at) - bound, key=str)
        domains = [sort_domain(reasoner, v, include_bottom) for v in new]
        nxt: list[Solution] = []
        n = 0
        for mu in current:
            for combo in itertools.product(*domains):
                ext = mu | frozenset(zip(new, combo))
                n += 1
                if reasoner.is_entailed(instantiate(at, ext)):
                    nxt.append(ext)
        tests.append(n)
        sizes.append(len(nxt))
        bound |= set(new)
        current = nxt
    return OrderedRun(frozenset(current), tuple(tests), tuple(sizes))


__all__ = [
    "DEFAULT_MAPPING_BUDGET",
    "OracleResult",
    "OrderedRun",
    "naive_evaluate",
    "naive_ordered_evaluate",
    "sort_domain",
]
