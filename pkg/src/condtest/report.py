"""Render acceptance-test specifications and whole-document bundles.

Tables have one column per parameter, headed by its variable; each row is one
test case whose cells hold the parameter's condition, prefixed "not:" when the
case expects or sets the opposite. JSON is the canonical serialization and
round-trips exactly; CSV is RFC-4180 style UTF-8.
"""

from __future__ import annotations

import csv
import io
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

from .ceg import to_dot
from .detect import CausalityVerdict
from .model import (
    AcceptanceTestSpec,
    CauseEffectGraph,
    Requirement,
    canonical_json,
)

RENDER_FORMATS = ("md", "csv", "json")


class RenderError(ValueError):
    """Unknown format or unwritable bundle."""


def _cell(condition: str, value: bool) -> str:
    return condition if value else f"not: {condition}"


def _rows(spec: AcceptanceTestSpec) -> list[list[str]]:
    rows = []
    for i, tc in enumerate(spec.test_cases, start=1):
        row = [f"TC {i}", tc.polarity.value]
        for p in spec.parameters:
            value = tc.inputs[p.id] if p.id in tc.inputs else tc.expected[p.id]
            row.append(_cell(p.condition, value))
        rows.append(row)
    return rows


def render(spec: AcceptanceTestSpec, format: str) -> str:
    """Render one acceptance test in the requested format."""
    if format == "json":
        return canonical_json(spec)
    if format == "csv":
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["case", "polarity"] + [p.variable for p in spec.parameters])
        writer.writerows(_rows(spec))
        return buffer.getvalue()
    if format == "md":
        header = ["case", "polarity"] + [p.variable for p in spec.parameters]
        lines = [
            f"# Acceptance test: {spec.requirement_id}",
            "",
            f"Interpretation: {spec.mode.value}",
            "",
            "| " + " | ".join(header) + " |",
            "| " + " | ".join("---" for _ in header) + " |",
        ]
        for row in _rows(spec):
            lines.append("| " + " | ".join(row) + " |")
        return "\n".join(lines) + "\n"
    raise RenderError(f"unknown format {format!r}")


@dataclass(frozen=True)
class RequirementOutcome:
    """What the pipeline produced (or why not) for one requirement."""

    requirement: Requirement
    verdict: CausalityVerdict
    spec: Optional[AcceptanceTestSpec] = None
    graph: Optional[CauseEffectGraph] = None
    error: Optional[str] = None

    @property
    def status(self) -> str:
        if not self.verdict.causal:
            return "excluded"
        return "generated" if self.error is None else "failed"


_FILENAME_SAFE = re.compile(r"[^A-Za-z0-9._-]+")


def _filename(requirement_id: str, extension: str) -> str:
    return _FILENAME_SAFE.sub("_", requirement_id) + "." + extension


def render_bundle(
    outcomes: Sequence[RequirementOutcome],
    out_dir: Path,
    format: str = "json",
    warnings: Sequence[str] = (),
    stamp: Optional[str] = None,
) -> Path:
    """Write one file per generated acceptance test plus an index listing
    every requirement with its verdict and, where applicable, failure reason.
    Output is byte-stable across runs unless a stamp is supplied."""
    if format not in RENDER_FORMATS + ("dot",):
        raise RenderError(f"unknown format {format!r}")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    names: dict[str, str] = {}
    for outcome in outcomes:
        rid = outcome.requirement.id
        if rid in names:
            raise RenderError(f"id collision: {rid}")
        names[rid] = _filename(rid, format)
    collisions = [n for n in names.values() if list(names.values()).count(n) > 1]
    if collisions:
        raise RenderError(f"id collision after sanitizing: {sorted(set(collisions))}")

    entries = []
    for outcome in outcomes:
        rid = outcome.requirement.id
        produced: Optional[str] = None
        if outcome.status == "generated":
            if format == "dot" and outcome.graph is not None:
                content = to_dot(outcome.graph)
            elif outcome.spec is not None:
                content = render(outcome.spec, format)
            else:
                content = None
            if content is not None:
                produced = names[rid]
                (out_dir / produced).write_text(content, encoding="utf-8")
        entries.append(
            {
                "id": rid,
                "status": outcome.status,
                "verdict": {
                    "label": outcome.verdict.label.value,
                    "confidence": outcome.verdict.confidence,
                    "method": outcome.verdict.method.value,
                },
                "reason": outcome.error,
                "file": produced,
            }
        )

    index = {
        "format": format,
        "requirements": entries,
        "warnings": list(warnings),
    }
    if stamp is not None:
        index["generated_at"] = stamp
    index_path = out_dir / "index.json"
    index_path.write_text(canonical_json(index), encoding="utf-8")
    return index_path
