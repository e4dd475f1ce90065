"""Binary causal/non-causal classification of requirement sentences.

Two sources of verdicts exist: a built-in cue-phrase heuristic and an
interchange stream produced by an external classifier. The heuristic is a pure
function of the sentence text and knowingly under-detects conditionals that
carry no cue word; the interchange route is the supported path for those.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Any, Iterable, Mapping, Optional, Sequence

from .model import Requirement


class VerdictError(ValueError):
    """An interchange verdict stream is malformed or inconsistent."""


class CausalityLabel(str, Enum):
    CAUSAL = "causal"
    NON_CAUSAL = "non-causal"


class VerdictMethod(str, Enum):
    HEURISTIC = "heuristic"
    EXTERNAL = "external"


@dataclass(frozen=True)
class CausalityVerdict:
    requirement_id: str
    label: CausalityLabel
    confidence: float  # confidence that the sentence is causal, in [0, 1]
    method: VerdictMethod

    def __post_init__(self) -> None:
        if not 0.0 <= self.confidence <= 1.0:
            raise VerdictError(
                f"verdict {self.requirement_id}: confidence {self.confidence} "
                "out of range [0, 1]"
            )

    @property
    def causal(self) -> bool:
        return self.label is CausalityLabel.CAUSAL

    def to_dict(self) -> dict:
        return {
            "id": self.requirement_id,
            "label": self.label.value,
            "confidence": self.confidence,
            "method": self.method.value,
        }


def _read_lexicon(path: Optional[Path], default_resource: str) -> tuple[str, ...]:
    if path is not None:
        text = Path(path).read_text(encoding="utf-8")
    else:
        text = (
            resources.files("condtest.data").joinpath(default_resource).read_text("utf-8")
        )
    phrases = []
    for line in text.splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            phrases.append(line.lower())
    return tuple(phrases)


def load_cue_lexicon(path: Optional[Path] = None) -> tuple[str, ...]:
    return _read_lexicon(path, "cues.txt")


def load_negation_lexicon(path: Optional[Path] = None) -> tuple[str, ...]:
    return _read_lexicon(path, "negations.txt")


def _phrase_pattern(phrases: Sequence[str]) -> re.Pattern:
    alternatives = sorted(phrases, key=len, reverse=True)
    joined = "|".join(r"\s+".join(map(re.escape, p.split())) for p in alternatives)
    return re.compile(rf"\b(?:{joined})\b", re.IGNORECASE)


def classify_heuristic(
    r: Requirement, cues: Optional[Sequence[str]] = None
) -> CausalityVerdict:
    """Label a sentence causal iff it contains a cue phrase, whole-word and
    case-insensitive. Confidence is binary: 1.0 causal, 0.0 otherwise."""
    if not r.text.strip():
        raise VerdictError(f"requirement {r.id}: empty text")
    lexicon = tuple(cues) if cues is not None else load_cue_lexicon()
    hit = _phrase_pattern(lexicon).search(r.text) is not None
    return CausalityVerdict(
        requirement_id=r.id,
        label=CausalityLabel.CAUSAL if hit else CausalityLabel.NON_CAUSAL,
        confidence=1.0 if hit else 0.0,
        method=VerdictMethod.HEURISTIC,
    )


def parse_interchange_stream(text: str) -> list[Any]:
    """Parse interchange JSON: either one array or newline-delimited objects."""
    stripped = text.strip()
    if not stripped:
        return []
    try:
        if stripped.startswith("["):
            parsed = json.loads(stripped)
            if not isinstance(parsed, list):
                raise VerdictError("interchange array expected")
            return parsed
        return [json.loads(line) for line in stripped.splitlines() if line.strip()]
    except json.JSONDecodeError as exc:
        raise VerdictError(f"malformed interchange JSON: {exc}") from exc


def ingest_verdicts(stream: str) -> list[CausalityVerdict]:
    """Read externally produced verdicts, one record per requirement:
    {"id": str, "causal": bool, "confidence": number}."""
    records = parse_interchange_stream(stream)
    verdicts: list[CausalityVerdict] = []
    seen: set[str] = set()
    for record in records:
        if not isinstance(record, Mapping):
            raise VerdictError(f"verdict record must be an object, got {record!r}")
        try:
            rid = record["id"]
            causal = record["causal"]
            confidence = record["confidence"]
        except KeyError as exc:
            raise VerdictError(f"verdict record missing field {exc}") from exc
        if not isinstance(causal, bool):
            raise VerdictError(f"verdict {rid}: 'causal' must be boolean")
        if not isinstance(confidence, (int, float)) or isinstance(confidence, bool):
            raise VerdictError(f"verdict {rid}: confidence must be a number")
        if rid in seen:
            raise VerdictError(f"duplicate verdict for {rid}")
        seen.add(rid)
        verdicts.append(
            CausalityVerdict(
                requirement_id=rid,
                label=CausalityLabel.CAUSAL if causal else CausalityLabel.NON_CAUSAL,
                confidence=float(confidence),
                method=VerdictMethod.EXTERNAL,
            )
        )
    return verdicts


def filter_causal(
    reqs: Sequence[Requirement], verdicts: Iterable[CausalityVerdict]
) -> tuple[list[Requirement], list[Requirement]]:
    """Partition requirements into (causal, excluded), preserving input order.
    Every requirement needs exactly one verdict; extras are the caller's to
    report."""
    by_id = {}
    for v in verdicts:
        by_id[v.requirement_id] = v
    missing = [r.id for r in reqs if r.id not in by_id]
    if missing:
        raise VerdictError(f"missing verdict for: {', '.join(missing)}")
    causal = [r for r in reqs if by_id[r.id].causal]
    excluded = [r for r in reqs if not by_id[r.id].causal]
    return causal, excluded
