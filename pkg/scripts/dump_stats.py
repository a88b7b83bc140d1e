"""Write the statistics snapshot of an ontology, for later use with ``dlquery --inject-stats``.

Usage::

    python3 scripts/dump_stats.py onto.ofn > onto.stats
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from dlquery.errors import DLQueryError
from dlquery.parsing import parse_ontology
from dlquery.reasoner import Reasoner
from dlquery.stats import build_stats, write_snapshot


def main(argv: list[str] | None = None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("ontology", type=Path)
    p.add_argument("--node-budget", type=int, default=100_000)
    args = p.parse_args(argv)
    try:
        r = Reasoner(parse_ontology(args.ontology.read_text(encoding="utf-8")), args.node_budget)
        if not r.is_consistent():
            print("dump_stats: inconsistent ontology", file=sys.stderr)
            return 2
        concepts, roles = r.classify()
        sys.stdout.write(write_snapshot(build_stats(r, concepts, roles)))
    except (OSError, DLQueryError) as e:
        print(f"dump_stats: {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
