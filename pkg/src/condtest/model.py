"""Shared domain types: requirements, labeled sentences, conditional structures,
cause-effect graphs and acceptance-test specifications.

All types are immutable after construction and carry a canonical JSON form
(``to_dict``/``from_dict``); construction validates the type's invariants and
raises :class:`ModelError` on violation. Cross-type consistency rules that are
diagnostics rather than hard errors live in :func:`validate_structure`.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Mapping, Optional, Sequence


class ModelError(ValueError):
    """A domain object could not be built from the given values."""


# Sentence-internal terminator followed by more text: treated as a second
# sentence and rejected (multi-sentence requirements are not split).
_SENTENCE_BREAK = re.compile(r"[.!?][\"')\]]*\s+\S")


class Role(str, Enum):
    CAUSE = "cause"
    EFFECT = "effect"


class TopLabel(str, Enum):
    """Composition layer: which cause/effect a token belongs to, or how
    adjacent ones are linked."""

    CAUSE1 = "Cause1"
    CAUSE2 = "Cause2"
    CAUSE3 = "Cause3"
    EFFECT1 = "Effect1"
    EFFECT2 = "Effect2"
    EFFECT3 = "Effect3"
    NOT_RELEVANT = "NotRelevant"
    AND = "And"
    OR = "Or"

    @property
    def is_cause(self) -> bool:
        return self in (TopLabel.CAUSE1, TopLabel.CAUSE2, TopLabel.CAUSE3)

    @property
    def is_effect(self) -> bool:
        return self in (TopLabel.EFFECT1, TopLabel.EFFECT2, TopLabel.EFFECT3)

    @property
    def is_event(self) -> bool:
        return self.is_cause or self.is_effect

    @property
    def ordinal(self) -> int:
        if not self.is_event:
            raise ModelError(f"label {self.value} has no ordinal")
        return int(self.value[-1])

    @staticmethod
    def event(role: Role, ordinal: int) -> "TopLabel":
        name = ("Cause" if role is Role.CAUSE else "Effect") + str(ordinal)
        return TopLabel(name)


class LowerLabel(str, Enum):
    """Decomposition layer inside a cause or effect span."""

    VARIABLE = "Variable"
    CONDITION = "Condition"
    NEGATION = "Negation"


class Connective(str, Enum):
    AND = "and"
    OR = "or"


class InterpretationMode(str, Enum):
    IMPLICATION = "implication"
    EQUIVALENCE = "equivalence"


class Polarity(str, Enum):
    POSITIVE = "positive"
    NEGATIVE = "negative"


@dataclass(frozen=True)
class Requirement:
    """One natural-language requirement sentence."""

    id: str
    text: str
    source: Optional[str] = None

    def __post_init__(self) -> None:
        if not self.id:
            raise ModelError("requirement id must be non-empty")
        if not self.text.strip():
            raise ModelError(f"requirement {self.id}: text is empty")
        if _SENTENCE_BREAK.search(self.text.strip()):
            raise ModelError(
                f"requirement {self.id}: text contains more than one sentence"
            )

    def to_dict(self) -> dict:
        return {"id": self.id, "text": self.text, "source": self.source}

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "Requirement":
        return cls(id=d["id"], text=d["text"], source=d.get("source"))


@dataclass(frozen=True)
class Token:
    """A surface token with half-open character offsets into the sentence."""

    index: int
    text: str
    start: int
    end: int

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "text": self.text,
            "start": self.start,
            "end": self.end,
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "Token":
        return cls(index=d["index"], text=d["text"], start=d["start"], end=d["end"])


@dataclass(frozen=True)
class LabeledSentence:
    """Tokens of one requirement with the two annotation layers.

    Every token carries a top label; a lower label is admissible only under a
    cause/effect top label, so each token holds one or two labels in total.
    """

    requirement: Requirement
    tokens: tuple[Token, ...]
    top: tuple[TopLabel, ...]
    lower: tuple[Optional[LowerLabel], ...]

    def __post_init__(self) -> None:
        text = self.requirement.text
        n = len(self.tokens)
        if len(self.top) != n or len(self.lower) != n:
            raise ModelError(
                f"{self.requirement.id}: label layers must align with tokens"
            )
        prev_end = 0
        for i, tok in enumerate(self.tokens):
            if tok.index != i:
                raise ModelError(f"{self.requirement.id}: token index {tok.index} != {i}")
            if not (prev_end <= tok.start < tok.end <= len(text)):
                raise ModelError(
                    f"{self.requirement.id}: token offsets out of order at {i}"
                )
            if text[tok.start : tok.end] != tok.text:
                raise ModelError(
                    f"{self.requirement.id}: token text mismatch at {i}: "
                    f"{tok.text!r} != {text[tok.start:tok.end]!r}"
                )
            prev_end = tok.end
        for i, (t, lo) in enumerate(zip(self.top, self.lower)):
            if not isinstance(t, TopLabel):
                raise ModelError(f"{self.requirement.id}: missing top label at {i}")
            if lo is not None and not t.is_event:
                raise ModelError(
                    f"{self.requirement.id}: token {i} ({self.tokens[i].text!r}) "
                    f"carries {lo.value} under {t.value}"
                )

    def to_dict(self) -> dict:
        return {
            "requirement": self.requirement.to_dict(),
            "tokens": [t.to_dict() for t in self.tokens],
            "top": [t.value for t in self.top],
            "lower": [lo.value if lo is not None else None for lo in self.lower],
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "LabeledSentence":
        return cls(
            requirement=Requirement.from_dict(d["requirement"]),
            tokens=tuple(Token.from_dict(t) for t in d["tokens"]),
            top=tuple(TopLabel(t) for t in d["top"]),
            lower=tuple(LowerLabel(lo) if lo is not None else None for lo in d["lower"]),
        )


@dataclass(frozen=True)
class EventNode:
    """A cause or effect: a variable plus the condition asserted about it.

    The condition always keeps its positive wording; negation is carried by
    the flag so both polarities can be phrased downstream.
    """

    role: Role
    ordinal: int
    variable: str
    condition: str
    negated: bool = False
    variable_inherited: bool = False

    def __post_init__(self) -> None:
        if self.ordinal not in (1, 2, 3):
            raise ModelError(f"event ordinal must be 1..3, got {self.ordinal}")
        if not self.condition.strip():
            raise ModelError(f"{self.role.value} {self.ordinal}: condition is empty")

    def to_dict(self) -> dict:
        return {
            "role": self.role.value,
            "ordinal": self.ordinal,
            "variable": self.variable,
            "condition": self.condition,
            "negated": self.negated,
            "variable_inherited": self.variable_inherited,
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "EventNode":
        return cls(
            role=Role(d["role"]),
            ordinal=d["ordinal"],
            variable=d["variable"],
            condition=d["condition"],
            negated=d.get("negated", False),
            variable_inherited=d.get("variable_inherited", False),
        )


@dataclass(frozen=True)
class ConditionalStructure:
    """Assembled causes and effects with the connectives between them."""

    requirement_id: str
    causes: tuple[EventNode, ...]
    cause_links: tuple[Connective, ...]
    effects: tuple[EventNode, ...]
    effect_links: tuple[Connective, ...]

    def to_dict(self) -> dict:
        return {
            "requirement_id": self.requirement_id,
            "causes": [c.to_dict() for c in self.causes],
            "cause_links": [c.value for c in self.cause_links],
            "effects": [e.to_dict() for e in self.effects],
            "effect_links": [c.value for c in self.effect_links],
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "ConditionalStructure":
        return cls(
            requirement_id=d["requirement_id"],
            causes=tuple(EventNode.from_dict(c) for c in d["causes"]),
            cause_links=tuple(Connective(c) for c in d["cause_links"]),
            effects=tuple(EventNode.from_dict(e) for e in d["effects"]),
            effect_links=tuple(Connective(c) for c in d["effect_links"]),
        )


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations


def validate_structure(s: ConditionalStructure) -> ValidationReport:
    """Check a structure against the assembly rules; violations are data,
    never exceptions."""
    found: list[str] = []
    if not s.causes:
        found.append("no cause")
    if not s.effects:
        found.append("no effect")
    if len(s.causes) > 3:
        found.append(f"more than 3 causes ({len(s.causes)})")
    if len(s.effects) > 3:
        found.append(f"more than 3 effects ({len(s.effects)})")
    for role, nodes in ((Role.CAUSE, s.causes), (Role.EFFECT, s.effects)):
        for node in nodes:
            if node.role is not role:
                found.append(f"{role.value} slot holds a {node.role.value} node")
        ordinals = [n.ordinal for n in nodes]
        if nodes and ordinals != list(range(1, len(nodes) + 1)):
            found.append(f"{role.value} ordinals not contiguous from 1: {ordinals}")
    if s.causes and len(s.cause_links) != len(s.causes) - 1:
        found.append(
            f"cause link count {len(s.cause_links)} != {len(s.causes) - 1}"
        )
    if s.effects and len(s.effect_links) != len(s.effects) - 1:
        found.append(
            f"effect link count {len(s.effect_links)} != {len(s.effects) - 1}"
        )
    if any(link is Connective.OR for link in s.effect_links):
        found.append("disjunctive effects")
    return ValidationReport(tuple(found))


@dataclass(frozen=True)
class GraphNode:
    """A cause or effect node of the combinatorial network. Negation never
    lives on nodes; it is carried by edges (or an aggregate input flag)."""

    id: str
    role: Role
    variable: str
    condition: str
    variable_inherited: bool = False

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "role": self.role.value,
            "variable": self.variable,
            "condition": self.condition,
            "variable_inherited": self.variable_inherited,
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "GraphNode":
        return cls(
            id=d["id"],
            role=Role(d["role"]),
            variable=d["variable"],
            condition=d["condition"],
            variable_inherited=d.get("variable_inherited", False),
        )


@dataclass(frozen=True)
class Aggregator:
    """Intermediate node grouping conjunctive causes (precedence handling).
    Only AND aggregators exist; they always have at least two children."""

    id: str
    children: tuple[str, ...]

    def to_dict(self) -> dict:
        return {"id": self.id, "children": list(self.children)}

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "Aggregator":
        return cls(id=d["id"], children=tuple(d["children"]))


@dataclass(frozen=True)
class Edge:
    source: str
    target: str
    negated: bool = False

    def to_dict(self) -> dict:
        return {"source": self.source, "target": self.target, "negated": self.negated}

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "Edge":
        return cls(source=d["source"], target=d["target"], negated=d.get("negated", False))


@dataclass(frozen=True)
class EffectInput:
    """How an effect aggregates its sources. ``negated`` applies after
    aggregation and is only used for multi-source inputs; single-source
    negation folds into the edge by parity."""

    operator: str  # "single" | "and" | "or"
    sources: tuple[str, ...]
    negated: bool = False

    def __post_init__(self) -> None:
        if self.operator not in ("single", "and", "or"):
            raise ModelError(f"unknown effect input operator {self.operator!r}")
        if self.operator == "single" and len(self.sources) != 1:
            raise ModelError("single input must have exactly one source")
        if self.operator != "single" and len(self.sources) < 2:
            raise ModelError(f"{self.operator} input needs at least two sources")
        if len(set(self.sources)) != len(self.sources):
            raise ModelError("effect input sources must be distinct")

    def to_dict(self) -> dict:
        return {
            "operator": self.operator,
            "sources": list(self.sources),
            "negated": self.negated,
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "EffectInput":
        return cls(
            operator=d["operator"],
            sources=tuple(d["sources"]),
            negated=d.get("negated", False),
        )


@dataclass(frozen=True)
class CauseEffectGraph:
    """Boolean combinatorial network from cause nodes over optional AND
    aggregators into effect nodes with negatable edges."""

    requirement_id: str
    causes: tuple[GraphNode, ...]
    intermediates: tuple[Aggregator, ...]
    effects: tuple[GraphNode, ...]
    edges: tuple[Edge, ...]
    effect_inputs: Mapping[str, EffectInput]

    def __post_init__(self) -> None:
        cause_ids = [c.id for c in self.causes]
        mid_ids = [m.id for m in self.intermediates]
        effect_ids = [e.id for e in self.effects]
        all_ids = cause_ids + mid_ids + effect_ids
        if len(set(all_ids)) != len(all_ids):
            raise ModelError("duplicate node ids in graph")
        if not self.causes:
            raise ModelError("graph has no cause nodes")
        if not self.effects:
            raise ModelError("graph has no effect nodes")
        for m in self.intermediates:
            if len(m.children) < 2:
                raise ModelError(f"aggregator {m.id} has fewer than 2 children")
            for child in m.children:
                if child not in cause_ids:
                    raise ModelError(f"aggregator {m.id} child {child} is not a cause")
        seen: set[tuple[str, str]] = set()
        for e in self.edges:
            # causes feed aggregators or effects; aggregators feed effects only,
            # which keeps the graph acyclic by construction
            if e.source in cause_ids:
                if e.target not in mid_ids and e.target not in effect_ids:
                    raise ModelError(f"edge {e.source}->{e.target}: bad target")
            elif e.source in mid_ids:
                if e.target not in effect_ids:
                    raise ModelError(f"edge {e.source}->{e.target}: bad target")
            else:
                raise ModelError(f"edge source {e.source} unknown")
            if (e.source, e.target) in seen:
                raise ModelError(f"duplicate edge {e.source}->{e.target}")
            seen.add((e.source, e.target))
        if set(self.effect_inputs) != set(effect_ids):
            raise ModelError("effect_inputs must cover every effect exactly once")
        reachable: set[str] = set()
        for eid, inp in self.effect_inputs.items():
            for src in inp.sources:
                if src not in cause_ids and src not in mid_ids:
                    raise ModelError(f"effect {eid} input source {src} unknown")
                if (src, eid) not in seen:
                    raise ModelError(f"effect {eid} input source {src} has no edge")
                reachable.add(src)
        for m in self.intermediates:
            if m.id in reachable:
                for child in m.children:
                    if (child, m.id) not in seen:
                        raise ModelError(f"aggregator {m.id} child {child} has no edge")
                    reachable.add(child)
        for cid in cause_ids:
            if cid not in reachable:
                raise ModelError(f"cause {cid} reaches no effect")

    @property
    def cause_ids(self) -> tuple[str, ...]:
        return tuple(c.id for c in self.causes)

    @property
    def effect_ids(self) -> tuple[str, ...]:
        return tuple(e.id for e in self.effects)

    def edge_negated(self, source: str, target: str) -> bool:
        for e in self.edges:
            if e.source == source and e.target == target:
                return e.negated
        raise ModelError(f"no edge {source}->{target}")

    def to_dict(self) -> dict:
        return {
            "requirement_id": self.requirement_id,
            "causes": [c.to_dict() for c in self.causes],
            "intermediates": [m.to_dict() for m in self.intermediates],
            "effects": [e.to_dict() for e in self.effects],
            "edges": [e.to_dict() for e in self.edges],
            "effect_inputs": {
                eid: self.effect_inputs[eid].to_dict() for eid in sorted(self.effect_inputs)
            },
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "CauseEffectGraph":
        return cls(
            requirement_id=d["requirement_id"],
            causes=tuple(GraphNode.from_dict(c) for c in d["causes"]),
            intermediates=tuple(Aggregator.from_dict(m) for m in d["intermediates"]),
            effects=tuple(GraphNode.from_dict(e) for e in d["effects"]),
            edges=tuple(Edge.from_dict(e) for e in d["edges"]),
            effect_inputs={
                eid: EffectInput.from_dict(v) for eid, v in d["effect_inputs"].items()
            },
        )


@dataclass(frozen=True)
class Parameter:
    """One test parameter: the variable of a cause or effect node plus the
    condition inspected for it."""

    id: str
    variable: str
    condition: str
    role: Role

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "variable": self.variable,
            "condition": self.condition,
            "role": self.role.value,
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "Parameter":
        return cls(
            id=d["id"],
            variable=d["variable"],
            condition=d["condition"],
            role=Role(d["role"]),
        )


@dataclass(frozen=True)
class TestCase:
    __test__ = False  # not a pytest class despite the name

    inputs: Mapping[str, bool]
    expected: Mapping[str, bool]
    polarity: Polarity

    def to_dict(self) -> dict:
        return {
            "inputs": {k: self.inputs[k] for k in sorted(self.inputs)},
            "expected": {k: self.expected[k] for k in sorted(self.expected)},
            "polarity": self.polarity.value,
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "TestCase":
        return cls(
            inputs=dict(d["inputs"]),
            expected=dict(d["expected"]),
            polarity=Polarity(d["polarity"]),
        )


@dataclass(frozen=True)
class AcceptanceTestSpec:
    """The ordered test cases that together form one acceptance test."""

    requirement_id: str
    mode: InterpretationMode
    parameters: tuple[Parameter, ...]
    test_cases: tuple[TestCase, ...]

    def __post_init__(self) -> None:
        if not self.parameters:
            raise ModelError(f"{self.requirement_id}: spec has no parameters")
        if not self.test_cases:
            raise ModelError(f"{self.requirement_id}: spec has no test cases")
        cause_ids = {p.id for p in self.parameters if p.role is Role.CAUSE}
        effect_ids = {p.id for p in self.parameters if p.role is Role.EFFECT}
        seen_inputs: set[tuple] = set()
        seen_negative = False
        for tc in self.test_cases:
            if set(tc.inputs) != cause_ids:
                raise ModelError(
                    f"{self.requirement_id}: inputs must cover every cause exactly once"
                )
            if set(tc.expected) != effect_ids:
                raise ModelError(
                    f"{self.requirement_id}: expected must cover every effect exactly once"
                )
            key = tuple(sorted(tc.inputs.items()))
            if key in seen_inputs:
                raise ModelError(f"{self.requirement_id}: duplicate test-case inputs")
            seen_inputs.add(key)
            if tc.polarity is Polarity.NEGATIVE:
                seen_negative = True
            elif seen_negative:
                raise ModelError(
                    f"{self.requirement_id}: positive cases must precede negative ones"
                )

    def to_dict(self) -> dict:
        return {
            "requirement_id": self.requirement_id,
            "mode": self.mode.value,
            "parameters": [p.to_dict() for p in self.parameters],
            "test_cases": [tc.to_dict() for tc in self.test_cases],
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "AcceptanceTestSpec":
        return cls(
            requirement_id=d["requirement_id"],
            mode=InterpretationMode(d["mode"]),
            parameters=tuple(Parameter.from_dict(p) for p in d["parameters"]),
            test_cases=tuple(TestCase.from_dict(t) for t in d["test_cases"]),
        )


def canonical_json(value: Any) -> str:
    """Render a domain object (or plain dict) as canonical JSON: sorted keys,
    two-space indent, UTF-8 text, trailing newline. Byte-stable for equal values."""
    d = value.to_dict() if hasattr(value, "to_dict") else value
    return json.dumps(d, sort_keys=True, indent=2, ensure_ascii=False) + "\n"
