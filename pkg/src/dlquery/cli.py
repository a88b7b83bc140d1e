"""Command-line front end.

Typical use::

    dlquery --ontology onto.ofn --query q.txt --mode dynamic --explain

With ``--inject-stats`` the tool runs as a planner experiment: no reasoning
happens, the plan is chosen from the recorded statistics and the number of
entailment checks it would need is predicted.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import TextIO

from .engine import MODES, Evaluation, Session, evaluate
from .errors import (
    DLQueryError,
    InconsistentOntology,
    ParseError,
    ResourceLimit,
    SimplicityError,
    UnsupportedConstruct,
)
from .oracle import DEFAULT_MAPPING_BUDGET, naive_evaluate
from .parsing import parse_ontology
from .planner import replay
from .query import Query, format_solution, parse_query
from .reasoner import Reasoner
from .stats import read_snapshot

EXIT_OK, EXIT_USAGE, EXIT_INCONSISTENT, EXIT_UNSUPPORTED, EXIT_BUDGET = range(5)
PHASES = ("load", "consistency", "classify", "stats", "clusters", "query")


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # usage errors share the parse-error status
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclasses.dataclass(frozen=True)
class RunConfig:
    ontology_path: Path | None
    query_paths: tuple[Path, ...]
    mode: str = "static"
    rewrite: bool = True
    prune: bool = True
    include_bottom: bool = False
    explain: bool = False
    stats_out: Path | None = None
    inject_stats: Path | None = None
    oracle: bool = False
    jobs: int = 1
    node_budget: int = 100_000
    mapping_budget: int = DEFAULT_MAPPING_BUDGET

    @property
    def planner_experiment(self) -> bool:
        return self.inject_stats is not None


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="dlquery", description="Answer axiom-template queries over a description-logic ontology.")
    p.add_argument("--ontology", type=Path, help="ontology in functional-style syntax")
    p.add_argument("--query", type=Path, action="append", required=True, help="query file (repeatable)")
    p.add_argument("--mode", choices=MODES, default="static")
    p.add_argument("--no-rewrite", action="store_true", help="evaluate templates as written")
    p.add_argument("--no-hierarchy-prune", action="store_true", help="test every candidate name")
    p.add_argument("--include-bottom", action="store_true", help="let variables take the built-in top and bottom")
    p.add_argument("--explain", action="store_true", help="print the plan and per-step counters")
    p.add_argument("--stats-out", type=Path, help="write counters and phase timings here")
    p.add_argument("--inject-stats", type=Path, help="planner experiment over recorded statistics")
    p.add_argument("--oracle", action="store_true", help="use the naive evaluator")
    p.add_argument("--jobs", type=int, default=1, help="evaluate several queries in parallel")
    p.add_argument("--node-budget", type=int, default=100_000)
    p.add_argument("--mapping-budget", type=int, default=DEFAULT_MAPPING_BUDGET)
    return p


def config_from_args(argv: list[str] | None = None) -> RunConfig:
    parser = build_parser()
    a = parser.parse_args(argv)
    if a.inject_stats is None and a.ontology is None:
        parser.error("--ontology is required unless --inject-stats is given")
    if a.jobs < 1 or a.node_budget < 1 or a.mapping_budget < 1:
        parser.error("--jobs, --node-budget and --mapping-budget must be positive")
    return RunConfig(
        ontology_path=a.ontology,
        query_paths=tuple(a.query),
        mode=a.mode,
        rewrite=not a.no_rewrite,
        prune=not a.no_hierarchy_prune,
        include_bottom=a.include_bottom,
        explain=a.explain,
        stats_out=a.stats_out,
        inject_stats=a.inject_stats,
        oracle=a.oracle,
        jobs=a.jobs,
        node_budget=a.node_budget,
        mapping_budget=a.mapping_budget,
    )


# ---------------------------------------------------------------------------
# Output
# ---------------------------------------------------------------------------


def answer_rows(solutions) -> list[str]:
    """Sorted answer lines; the empty mapping of an entailed ground query prints as ``{}``."""
    return sorted(format_solution(mu) or "{}" for mu in solutions)


def _write_counters(path: Path, timings: dict[str, float], runs: list[tuple[Path, dict]]) -> None:
    lines = [f"time_{phase}\t{timings.get(phase, 0.0):.6f}" for phase in PHASES]
    for qpath, counters in runs:
        lines.append(f"query\t{qpath}")
        lines += [f"{k}\t{v}" for k, v in counters.items()]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _counters(ev: Evaluation) -> dict:
    out = {
        "mode": ev.mode,
        "answers": len(ev.answers),
        "entailment_checks": ev.entailment_checks,
        "lookups": ev.lookups,
        "skipped_invalid": ev.skipped_invalid,
    }
    for i, r in enumerate(ev.steps, start=1):
        out[f"step_{i}"] = f"{r.step.template}\tchecks={r.entailment_checks}\tlookups={r.lookups}\tout={r.outputs}"
    return out


# ---------------------------------------------------------------------------
# Modes of operation
# ---------------------------------------------------------------------------


def _read(path: Path) -> str:
    return path.read_text(encoding="utf-8")


def _planner_experiment(cfg: RunConfig, queries: list[Query], out: TextIO) -> dict:
    stats = read_snapshot(_read(cfg.inject_stats))
    runs = []
    for qpath, q in zip(cfg.query_paths, queries):
        if len(queries) > 1:
            out.write(f"# query\t{qpath}\n")
        if stats.rows:
            mode = "static" if cfg.mode == "static" else "dynamic"
            result = replay(q, stats, mode)
            checks = result.predicted_checks
            templates = result.plan.templates
            steps = result.plan.steps
        else:
            ev = evaluate(
                Session.from_stats(stats),
                q,
                cfg.mode,
                rewrite_templates=cfg.rewrite,
                prune=cfg.prune,
                include_bottom=cfg.include_bottom,
            )
            checks = tuple(r.entailment_checks for r in ev.steps)
            templates = ev.plan
            steps = tuple(r.step for r in ev.steps)
        for i, (at, n) in enumerate(zip(templates, checks), start=1):
            out.write(f"plan\t{i}\t{at}\tpredicted_checks={n}\n")
        out.write(f"predicted_checks\t{' + '.join(map(str, checks))} = {sum(checks)}\n")
        if cfg.explain:
            for step in steps:
                for at, c in step.candidates:
                    out.write(f"# candidate\t{step.template}\t{at}\t{c}\n")
        runs.append((qpath, {"mode": cfg.mode, "predicted_checks": sum(checks)}))
    return {"runs": runs, "timings": {}}


def _evaluate_all(cfg: RunConfig, session: Session, queries: list[Query]) -> list[Evaluation]:
    def one(q: Query, s: Session) -> Evaluation:
        return evaluate(
            s, q, cfg.mode, rewrite_templates=cfg.rewrite, prune=cfg.prune, include_bottom=cfg.include_bottom
        )

    if cfg.jobs == 1 or len(queries) == 1:
        return [one(q, session) for q in queries]
    # Each worker owns its reasoner; hierarchies and statistics are shared read-only.
    sessions = [dataclasses.replace(session, reasoner=_fresh_reasoner(session, cfg)) for _ in queries]
    with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
        return list(pool.map(one, queries, sessions))


def _fresh_reasoner(session: Session, cfg: RunConfig) -> Reasoner:
    r = Reasoner(session.onto, cfg.node_budget)
    r.is_consistent()
    return r


def run(cfg: RunConfig, out: TextIO | None = None) -> int:
    out = out if out is not None else sys.stdout
    t0 = time.perf_counter()
    queries = [parse_query(_read(p)) for p in cfg.query_paths]
    if cfg.planner_experiment:
        report = _planner_experiment(cfg, queries, out)
        if cfg.stats_out:
            _write_counters(cfg.stats_out, {"load": time.perf_counter() - t0}, report["runs"])
        return EXIT_OK
    onto = parse_ontology(_read(cfg.ontology_path))
    timings = {"load": time.perf_counter() - t0}
    runs: list[tuple[Path, dict]] = []
    if cfg.oracle:
        reasoner = Reasoner(onto, cfg.node_budget)
        t = time.perf_counter()
        results = [
            naive_evaluate(
                onto, q, include_bottom=cfg.include_bottom, mapping_budget=cfg.mapping_budget, reasoner=reasoner
            )
            for q in queries
        ]
        timings["query"] = time.perf_counter() - t
        for qpath, res in zip(cfg.query_paths, results):
            if len(queries) > 1:
                out.write(f"# query\t{qpath}\n")
            for row in answer_rows(res.solutions):
                out.write(row + "\n")
            runs.append(
                (qpath, {"mode": "oracle", "answers": len(res.solutions), "entailment_checks": res.entailment_checks,
                         "mappings_tested": res.mappings_tested})
            )
    else:
        session = Session.prepare(onto, cfg.node_budget)
        timings.update(session.timings)
        t = time.perf_counter()
        evaluations = _evaluate_all(cfg, session, queries)
        timings["query"] = time.perf_counter() - t
        for qpath, ev in zip(cfg.query_paths, evaluations):
            if len(queries) > 1:
                out.write(f"# query\t{qpath}\n")
            for row in answer_rows(ev.answers):
                out.write(row + "\n")
            if cfg.explain:
                for line in ev.explain().splitlines():
                    out.write(f"# {line}\n")
            runs.append((qpath, _counters(ev)))
    if cfg.stats_out:
        _write_counters(cfg.stats_out, timings, runs)
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    cfg = config_from_args(argv)
    try:
        return run(cfg)
    except OSError as e:
        print(f"dlquery: cannot read input: {e}", file=sys.stderr)
        return EXIT_USAGE
    except ParseError as e:
        print(f"dlquery: parse error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except InconsistentOntology as e:
        print(f"dlquery: inconsistent ontology: {e}", file=sys.stderr)
        return EXIT_INCONSISTENT
    except (UnsupportedConstruct, SimplicityError) as e:
        print(f"dlquery: unsupported: {e}", file=sys.stderr)
        return EXIT_UNSUPPORTED
    except ResourceLimit as e:
        print(f"dlquery: budget exceeded: {e}", file=sys.stderr)
        return EXIT_BUDGET
    except DLQueryError as e:
        print(f"dlquery: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
