"""Shared fixtures and independent oracles for the test suite.

The oracles here re-implement semantics in deliberately plain form (direct
formula evaluation, counting loops) so the implementation under test is
checked against an independent path. Gold label tables are written by hand as
run-length rows over the tokenization, not generated from the extractor.
"""

from __future__ import annotations

import random
from typing import Mapping, Optional, Sequence

from condtest.model import (
    Aggregator,
    CauseEffectGraph,
    ConditionalStructure,
    Connective,
    Edge,
    EffectInput,
    EventNode,
    GraphNode,
    LabeledSentence,
    LowerLabel,
    Requirement,
    Role,
    TopLabel,
)
from condtest.extract import ExternalTokenLabels, tokenize

THEMAS_TEXTS = {
    "REQ A": (
        "If the temperature change is requested, then the determine "
        "heating/cooling mode process is activated and makes a heating/cooling "
        "request."
    ),
    "REQ B": (
        "If the current temperature value is strictly less than the lower value "
        "of the valid temperature range or if the received temperature value is "
        "strictly greater than the upper value of the valid temperature range, "
        "then the THEMAS system shall identify the current temperature value as "
        "an invalid temperature and shall output an invalid temperature status."
    ),
    "REQ C": (
        "The THEMAS system shall maintain the ON/OFF status of each heating and "
        "cooling unit."
    ),
    "REQ D": (
        "Temperatures that do not exceed these limits shall be output for "
        "subsequent processing."
    ),
    "REQ E": (
        "If this condition is true, then this module shall output a request to "
        "turn on the heating unit in case LO = T LT."
    ),
    "REQ F": (
        "The heating/cooling unit shall have no real-time delay when these "
        "statuses are sent to the THEMAS system."
    ),
    "REQ G": (
        "Each thermostat shall have a unique identifier by which that thermostat "
        "is identified in the THEMAS system."
    ),
    "REQ H": (
        "When an event occurs, the THEMAS system shall identify the event type "
        "and format an appropriate event message."
    ),
}

ABC_TEXT = "If A is valid and B is false, then C is true."

GOLD_CAUSAL = {
    "REQ A": True,
    "REQ B": True,
    "REQ C": False,
    "REQ D": True,
    "REQ E": True,
    "REQ F": True,
    "REQ G": False,
    "REQ H": True,
}

# Run-length label rows: (token count, top label, lower label or None).
_L = {
    "NR": TopLabel.NOT_RELEVANT,
    "C1": TopLabel.CAUSE1,
    "C2": TopLabel.CAUSE2,
    "C3": TopLabel.CAUSE3,
    "E1": TopLabel.EFFECT1,
    "E2": TopLabel.EFFECT2,
    "E3": TopLabel.EFFECT3,
    "AND": TopLabel.AND,
    "OR": TopLabel.OR,
}
_W = {"V": LowerLabel.VARIABLE, "C": LowerLabel.CONDITION, "N": LowerLabel.NEGATION}

GOLD_LABEL_ROWS: dict[str, list[tuple[int, str, Optional[str]]]] = {
    "ABC": [
        (1, "NR", None),
        (1, "C1", "V"),
        (2, "C1", "C"),
        (1, "AND", None),
        (1, "C2", "V"),
        (2, "C2", "C"),
        (2, "NR", None),
        (1, "E1", "V"),
        (2, "E1", "C"),
        (1, "NR", None),
    ],
    "REQ A": [
        (1, "NR", None),
        (3, "C1", "V"),
        (2, "C1", "C"),
        (2, "NR", None),
        (5, "E1", "V"),
        (2, "E1", "C"),
        (1, "AND", None),
        (4, "E2", "C"),
        (1, "NR", None),
    ],
    "REQ B": [
        (1, "NR", None),
        (4, "C1", "V"),
        (12, "C1", "C"),
        (1, "OR", None),
        (1, "NR", None),
        (4, "C2", "V"),
        (12, "C2", "C"),
        (2, "NR", None),
        (3, "E1", "V"),
        (10, "E1", "C"),
        (1, "AND", None),
        (6, "E2", "C"),
        (1, "NR", None),
    ],
    "REQ D": [
        (1, "C1", "V"),
        (1, "NR", None),
        (2, "C1", "N"),
        (3, "C1", "C"),
        (6, "E1", "C"),
        (1, "NR", None),
    ],
    "REQ E": [
        (1, "NR", None),
        (2, "C1", "V"),
        (2, "C1", "C"),
        (2, "NR", None),
        (2, "E1", "V"),
        (10, "E1", "C"),
        (2, "NR", None),
        (1, "C2", "V"),
        (3, "C2", "C"),
        (1, "NR", None),
    ],
    "REQ F": [
        (3, "E1", "V"),
        (2, "E1", "C"),
        (1, "E1", "N"),
        (2, "E1", "C"),
        (1, "NR", None),
        (2, "C1", "V"),
        (6, "C1", "C"),
        (1, "NR", None),
    ],
    "REQ H": [
        (1, "NR", None),
        (2, "C1", "V"),
        (1, "C1", "C"),
        (1, "NR", None),
        (3, "E1", "V"),
        (5, "E1", "C"),
        (1, "AND", None),
        (5, "E2", "C"),
        (1, "NR", None),
    ],
}


def requirement(rid: str) -> Requirement:
    text = ABC_TEXT if rid == "ABC" else THEMAS_TEXTS[rid]
    return Requirement(id=rid, text=text)


def _expand_rows(rows) -> tuple[list[TopLabel], list[Optional[LowerLabel]]]:
    top: list[TopLabel] = []
    lower: list[Optional[LowerLabel]] = []
    for count, top_code, lower_code in rows:
        for _ in range(count):
            top.append(_L[top_code])
            lower.append(_W[lower_code] if lower_code else None)
    return top, lower


def gold_sentence(rid: str) -> LabeledSentence:
    req = requirement(rid)
    tokens = tokenize(req)
    top, lower = _expand_rows(GOLD_LABEL_ROWS[rid])
    assert len(top) == len(tokens), f"{rid}: gold rows cover {len(top)} of {len(tokens)} tokens"
    return LabeledSentence(
        requirement=req, tokens=tuple(tokens), top=tuple(top), lower=tuple(lower)
    )


def gold_interchange(rid: str) -> dict:
    sentence = gold_sentence(rid)
    return {
        "id": rid,
        "tokens": [
            {
                "text": tok.text,
                "start": tok.start,
                "end": tok.end,
                "top": sentence.top[i].value,
                "lower": sentence.lower[i].value if sentence.lower[i] else None,
            }
            for i, tok in enumerate(sentence.tokens)
        ],
    }


def gold_verdict_records() -> list[dict]:
    return [
        {"id": rid, "causal": causal, "confidence": 0.95 if causal else 0.9}
        for rid, causal in GOLD_CAUSAL.items()
    ]


# ---------------------------------------------------------------------------
# Independent oracles


def formula_value(
    s: ConditionalStructure, assignment: Sequence[bool], effect_index: int
) -> bool:
    """Direct evaluation of the precedence-parsed boolean formula of a
    structure: conjunction binds tighter than disjunction, node negations
    apply to the literal (cause) or the whole antecedent value (effect)."""
    groups: list[list[int]] = [[0]]
    for i, link in enumerate(s.cause_links):
        if link is Connective.AND:
            groups[-1].append(i + 1)
        else:
            groups.append([i + 1])
    value = any(
        all(assignment[i] != s.causes[i].negated for i in group) for group in groups
    )
    return value != s.effects[effect_index].negated


def graph_truth_table(graph_dict: Mapping) -> dict[tuple[bool, ...], dict[str, bool]]:
    """Exhaustive evaluation of a serialized graph, one row per assignment."""
    cause_ids = [c["id"] for c in graph_dict["causes"]]
    negation = {
        (e["source"], e["target"]): e["negated"] for e in graph_dict["edges"]
    }
    table = {}
    for row in range(2 ** len(cause_ids)):
        bits = tuple(bool((row >> k) & 1) for k in range(len(cause_ids)))
        values = dict(zip(cause_ids, bits))
        for agg in graph_dict["intermediates"]:
            values[agg["id"]] = all(
                values[c] != negation[(c, agg["id"])] for c in agg["children"]
            )
        outputs = {}
        for eid, inp in graph_dict["effect_inputs"].items():
            contributions = [values[s] != negation[(s, eid)] for s in inp["sources"]]
            if inp["operator"] == "single":
                combined = contributions[0]
            elif inp["operator"] == "and":
                combined = all(contributions)
            else:
                combined = any(contributions)
            outputs[eid] = combined != inp["negated"]
        table[bits] = outputs
    return table


# ---------------------------------------------------------------------------
# Generators for randomized properties

_NOUNS = "pump valve sensor gate relay signal channel buffer".split()
_STATES = "active ready open closed stable armed busy idle".split()


def random_structure(rng: random.Random, allow_negation: bool = True) -> ConditionalStructure:
    def node(role: Role, ordinal: int) -> EventNode:
        return EventNode(
            role=role,
            ordinal=ordinal,
            variable=f"the {rng.choice(_NOUNS)} {ordinal}",
            condition=f"is {rng.choice(_STATES)}",
            negated=allow_negation and rng.random() < 0.3,
        )

    n_causes = rng.randint(1, 3)
    n_effects = rng.randint(1, 3)
    return ConditionalStructure(
        requirement_id=f"RND{rng.randint(0, 10**9)}",
        causes=tuple(node(Role.CAUSE, i + 1) for i in range(n_causes)),
        cause_links=tuple(
            rng.choice((Connective.AND, Connective.OR)) for _ in range(n_causes - 1)
        ),
        effects=tuple(node(Role.EFFECT, i + 1) for i in range(n_effects)),
        effect_links=tuple(Connective.AND for _ in range(n_effects - 1)),
    )


def single_aggregator_graph(n: int, operator: str) -> CauseEffectGraph:
    """Hand-built graph: n causes into one effect through one aggregation."""
    causes = tuple(
        GraphNode(id=f"c{i + 1}", role=Role.CAUSE, variable=f"x{i + 1}", condition="holds")
        for i in range(n)
    )
    effect = GraphNode(id="e1", role=Role.EFFECT, variable="y", condition="fires")
    op = "single" if n == 1 else operator
    return CauseEffectGraph(
        requirement_id=f"AGG-{operator}-{n}",
        causes=causes,
        intermediates=(),
        effects=(effect,),
        edges=tuple(Edge(source=c.id, target="e1") for c in causes),
        effect_inputs={"e1": EffectInput(operator=op, sources=tuple(c.id for c in causes))},
    )


def mixed_or_and_graph() -> CauseEffectGraph:
    """c1 OR (c2 AND c3) into one effect, via an intermediate aggregator."""
    causes = tuple(
        GraphNode(id=f"c{i}", role=Role.CAUSE, variable=f"x{i}", condition="holds")
        for i in (1, 2, 3)
    )
    effect = GraphNode(id="e1", role=Role.EFFECT, variable="y", condition="fires")
    return CauseEffectGraph(
        requirement_id="MIXED",
        causes=causes,
        intermediates=(Aggregator(id="i1", children=("c2", "c3")),),
        effects=(effect,),
        edges=(
            Edge("c2", "i1"),
            Edge("c3", "i1"),
            Edge("c1", "e1"),
            Edge("i1", "e1"),
        ),
        effect_inputs={"e1": EffectInput(operator="or", sources=("c1", "i1"))},
    )
