"""Run the acceptance suite and print one PASS/FAIL line per criterion.

Usage::

    python3 scripts/run_acceptance.py
"""

from __future__ import annotations

import sys
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parent.parent

if __name__ == "__main__":
    sys.exit(pytest.main(["-q", str(ROOT / "tests" / "test_acceptance.py")]))
