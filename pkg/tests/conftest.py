import json
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

import helpers  # noqa: E402


def pytest_runtest_logreport(report):
    """One visible pass/fail line per acceptance criterion."""
    if report.when != "call" or "test_acceptance.py" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    outcome = "PASS" if report.passed else "FAIL"
    sys.stderr.write(f"[{outcome}] {name}\n")


@pytest.fixture
def themas_input(tmp_path: Path) -> Path:
    """THEMAS requirements as JSON-lines input for the CLI."""
    path = tmp_path / "themas.jsonl"
    lines = [
        json.dumps({"id": rid, "text": text, "source": "THEMAS"})
        for rid, text in helpers.THEMAS_TEXTS.items()
    ]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


@pytest.fixture
def gold_verdict_file(tmp_path: Path) -> Path:
    path = tmp_path / "verdicts.json"
    path.write_text(json.dumps(helpers.gold_verdict_records()), encoding="utf-8")
    return path


@pytest.fixture
def gold_label_file(tmp_path: Path) -> Path:
    labels = [
        helpers.gold_interchange(rid)
        for rid, causal in helpers.GOLD_CAUSAL.items()
        if causal
    ]
    path = tmp_path / "labels.json"
    path.write_text(json.dumps(labels), encoding="utf-8")
    return path
