import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from amrmas.report import load_scenario  # noqa: E402

ROOT = Path(__file__).resolve().parents[1]
PRODUCTX = ROOT / "scenarios" / "productx.json"

# Filled by test_acceptance.py; printed once at the end of the session.
ACCEPTANCE_RESULTS: dict[str, tuple[bool, str]] = {}


@pytest.fixture
def productx_path() -> Path:
    return PRODUCTX


@pytest.fixture(scope="session")
def productx():
    return load_scenario(PRODUCTX)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_RESULTS, key=lambda k: int(k.split()[0][2:])):
        ok, detail = ACCEPTANCE_RESULTS[key]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {key}  {detail}")
