from pathlib import Path

import pytest

from mixlab.harness import Scenario, run

ROOT = Path(__file__).resolve().parent.parent
CORPUS_DIR = ROOT / "scenarios" / "corpus"
EXTRA_DIR = ROOT / "scenarios" / "extra"


@pytest.fixture(scope="session")
def corpus_reports():
    """Run every shipped corpus scenario once; reused by several criteria."""
    reports = []
    for path in sorted(CORPUS_DIR.glob("*.json")):
        scenario = Scenario.from_file(path)
        reports.append((scenario, run(scenario)))
    return reports
