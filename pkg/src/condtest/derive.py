"""Derive the minimal acceptance-test suite from a cause-effect graph.

The graph is traversed back from each effect. Decision rules per aggregator:
an AND forced true (or an OR forced false) constrains every child; an AND
forced false (or an OR forced true) yields one alternative per child, with the
designated child taking the distinguishing value and its siblings held to the
non-masking one. Negated arcs flip the forced value along the path. Child sets
compose by Cartesian combination; combinations that force one cause both ways
are dropped, and a target whose combinations all drop is unsatisfiable.

Implication mode keeps only the positive sensitizations; equivalence mode adds
the negative ones. Partial assignments are completed with false, duplicates by
input map are merged keeping the first occurrence, and positives precede
negatives, so a suite is a pure function of graph and mode.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from .ceg import evaluate
from .model import (
    AcceptanceTestSpec,
    CauseEffectGraph,
    InterpretationMode,
    Parameter,
    Polarity,
    TestCase,
)


class DerivationError(ValueError):
    """No consistent assignment can force the target to the requested value."""


@dataclass(frozen=True)
class SensitizationSet:
    """Partial cause assignments that each force `target` to `value`."""

    target: str
    value: bool
    assignments: tuple[Mapping[str, bool], ...]


def force(g: CauseEffectGraph, node_id: str, value: bool) -> SensitizationSet:
    """Compute the sensitizing partial assignments for one node."""
    negation = {(e.source, e.target): e.negated for e in g.edges}
    cause_ids = set(g.cause_ids)
    aggregators = {a.id: a for a in g.intermediates}

    def force_node(node: str, wanted: bool) -> list[dict[str, bool]]:
        if node in cause_ids:
            return [{node: wanted}]
        if node in aggregators:
            agg = aggregators[node]
            pairs = [(child, negation[(child, node)]) for child in agg.children]
            return force_aggregate("and", pairs, wanted)
        if node in g.effect_inputs:
            inp = g.effect_inputs[node]
            wanted ^= inp.negated
            pairs = [(src, negation[(src, node)]) for src in inp.sources]
            if inp.operator == "single":
                src, neg = pairs[0]
                return force_node(src, wanted ^ neg)
            return force_aggregate(inp.operator, pairs, wanted)
        raise DerivationError(f"{g.requirement_id}: unknown node {node}")

    def force_through(pair: tuple[str, bool], wanted: bool) -> list[dict[str, bool]]:
        src, neg = pair
        return force_node(src, wanted ^ neg)

    def force_aggregate(
        operator: str, pairs: list[tuple[str, bool]], wanted: bool
    ) -> list[dict[str, bool]]:
        if (operator == "and") == wanted:
            # AND-true / OR-false: every child is constrained the same way
            return merge_product([force_through(p, wanted) for p in pairs])
        # AND-false / OR-true: one alternative per child
        out: list[dict[str, bool]] = []
        for i, designated in enumerate(pairs):
            branches = [force_through(designated, wanted)]
            branches += [
                force_through(sibling, not wanted)
                for j, sibling in enumerate(pairs)
                if j != i
            ]
            out.extend(merge_product(branches))
        return out

    def merge_product(branches: list[list[dict[str, bool]]]) -> list[dict[str, bool]]:
        combos: list[dict[str, bool]] = [{}]
        for branch in branches:
            next_combos = []
            for combo in combos:
                for partial in branch:
                    merged = dict(combo)
                    consistent = True
                    for key, val in partial.items():
                        if merged.get(key, val) != val:
                            consistent = False
                            break
                        merged[key] = val
                    if consistent:
                        next_combos.append(merged)
            combos = next_combos
        return combos

    assignments = []
    seen = set()
    for a in force_node(node_id, value):
        key = tuple(sorted(a.items()))
        if key not in seen:
            seen.add(key)
            assignments.append(a)
    if not assignments:
        raise DerivationError(
            f"{g.requirement_id}: unsatisfiable target {node_id}={value}"
        )
    return SensitizationSet(target=node_id, value=value, assignments=tuple(assignments))


def derive(g: CauseEffectGraph, mode: InterpretationMode) -> AcceptanceTestSpec:
    """Produce the ordered suite for the graph under the chosen interpretation."""
    parameters = tuple(
        Parameter(id=n.id, variable=n.variable, condition=n.condition, role=n.role)
        for n in g.causes + g.effects
    )

    wanted_values = [True]
    if mode is InterpretationMode.EQUIVALENCE:
        wanted_values.append(False)

    cases: list[TestCase] = []
    seen_inputs: set[tuple] = set()
    for wanted in wanted_values:
        for eid in g.effect_ids:
            for partial in force(g, eid, wanted).assignments:
                inputs = {cid: partial.get(cid, False) for cid in g.cause_ids}
                key = tuple(inputs[cid] for cid in g.cause_ids)
                if key in seen_inputs:
                    continue
                seen_inputs.add(key)
                cases.append(
                    TestCase(
                        inputs=inputs,
                        expected=evaluate(g, inputs),
                        polarity=Polarity.POSITIVE if wanted else Polarity.NEGATIVE,
                    )
                )

    return AcceptanceTestSpec(
        requirement_id=g.requirement_id,
        mode=mode,
        parameters=parameters,
        test_cases=tuple(cases),
    )


def suite_stats(spec: AcceptanceTestSpec) -> tuple[int, int]:
    """(number of test cases, number of parameters)."""
    return len(spec.test_cases), len(spec.parameters)
