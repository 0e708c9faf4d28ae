"""Run the acceptance gate and print one PASS/FAIL line per criterion."""
import sys
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parents[1]

if __name__ == "__main__":
    sys.exit(pytest.main(["-q", "-s", "-p", "no:cacheprovider",
                          str(ROOT / "tests" / "test_acceptance.py")] + sys.argv[1:]))
