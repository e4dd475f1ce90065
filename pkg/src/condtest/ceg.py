"""Compile conditional structures into cause-effect graphs and evaluate them.

Construction rules: a lone cause feeds the effect directly; all-conjunctive
causes feed an AND input, all-disjunctive an OR input; when conjunctions and
disjunctions mix, conjunction binds tighter, so each maximal run of
conjunctively linked causes becomes one intermediate AND aggregator and the
effect receives an OR over the remaining top-level terms. Every effect of one
structure receives the identical input expression. A node's negation becomes a
negated edge on the cause's outgoing arc (or the effect's incoming arc for a
single-source input, composing by parity); a negated multi-source effect
carries the flag on its aggregate input instead.
"""

from __future__ import annotations

from typing import Mapping, Optional

from .model import (
    Aggregator,
    CauseEffectGraph,
    ConditionalStructure,
    Connective,
    Edge,
    EffectInput,
    EventNode,
    GraphNode,
    Role,
    validate_structure,
)


class GraphError(ValueError):
    """The structure cannot be compiled into a graph."""


class CompletionError(ValueError):
    """No node in the structure carries a variable to inherit from."""


class EvaluationError(ValueError):
    """An assignment does not cover the cause nodes exactly."""


def complete_nodes(s: ConditionalStructure) -> ConditionalStructure:
    """Fill missing variables from the nearest referent.

    A cause inherits from the nearest cause that has a variable (preceding
    preferred, Effect 1 as last resort); an effect inherits from the nearest
    effect (preceding preferred), else from Cause 1. Conditions are never
    touched and the operation is idempotent.
    """
    if not any(n.variable for n in s.causes + s.effects):
        raise CompletionError(f"{s.requirement_id}: no node has a variable")

    def nearest(nodes: tuple[EventNode, ...], index: int) -> Optional[str]:
        best: Optional[str] = None
        best_distance = None
        for j, node in enumerate(nodes):
            if j == index or not node.variable:
                continue
            distance = abs(node.ordinal - nodes[index].ordinal)
            precedes = node.ordinal < nodes[index].ordinal
            key = (distance, 0 if precedes else 1)
            if best_distance is None or key < best_distance:
                best_distance = key
                best = node.variable
        return best

    def fill(nodes: tuple[EventNode, ...], fallback: Optional[str]) -> tuple[EventNode, ...]:
        out = []
        for j, node in enumerate(nodes):
            if node.variable:
                out.append(node)
                continue
            donor = nearest(nodes, j) or fallback
            if donor is None:
                raise CompletionError(
                    f"{s.requirement_id}: no referent for {node.role.value} {node.ordinal}"
                )
            out.append(
                EventNode(
                    role=node.role,
                    ordinal=node.ordinal,
                    variable=donor,
                    condition=node.condition,
                    negated=node.negated,
                    variable_inherited=True,
                )
            )
        return tuple(out)

    effect1_variable = next((e.variable for e in s.effects if e.variable), None)
    causes = fill(s.causes, effect1_variable)
    cause1_variable = causes[0].variable if causes else None
    effects = fill(s.effects, cause1_variable)
    return ConditionalStructure(
        requirement_id=s.requirement_id,
        causes=causes,
        cause_links=s.cause_links,
        effects=effects,
        effect_links=s.effect_links,
    )


def build(s: ConditionalStructure) -> CauseEffectGraph:
    """Compile a validated structure into its combinatorial network."""
    report = validate_structure(s)
    if not report.ok:
        raise GraphError(
            f"{s.requirement_id}: invalid structure: {'; '.join(report.violations)}"
        )

    cause_nodes = tuple(
        GraphNode(
            id=f"c{i + 1}",
            role=Role.CAUSE,
            variable=c.variable,
            condition=c.condition,
            variable_inherited=c.variable_inherited,
        )
        for i, c in enumerate(s.causes)
    )
    effect_nodes = tuple(
        GraphNode(
            id=f"e{i + 1}",
            role=Role.EFFECT,
            variable=e.variable,
            condition=e.condition,
            variable_inherited=e.variable_inherited,
        )
        for i, e in enumerate(s.effects)
    )

    # group causes into maximal conjunctive runs; runs are OR-ed together
    groups: list[list[int]] = [[0]]
    for i, link in enumerate(s.cause_links):
        if link is Connective.AND:
            groups[-1].append(i + 1)
        else:
            groups.append([i + 1])

    intermediates: list[Aggregator] = []
    edges: list[Edge] = []
    terms: list[str] = []  # top-level sources of every effect's input
    if len(groups) == 1:
        members = groups[0]
        terms = [cause_nodes[i].id for i in members]
        operator = "single" if len(members) == 1 else "and"
    else:
        operator = "or"
        for members in groups:
            if len(members) == 1:
                terms.append(cause_nodes[members[0]].id)
            else:
                agg = Aggregator(
                    id=f"i{len(intermediates) + 1}",
                    children=tuple(cause_nodes[i].id for i in members),
                )
                intermediates.append(agg)
                for i in members:
                    edges.append(
                        Edge(
                            source=cause_nodes[i].id,
                            target=agg.id,
                            negated=s.causes[i].negated,
                        )
                    )
                terms.append(agg.id)

    cause_negated = {cause_nodes[i].id: s.causes[i].negated for i in range(len(s.causes))}
    effect_inputs: dict[str, EffectInput] = {}
    for j, effect in enumerate(s.effects):
        eid = effect_nodes[j].id
        single = len(terms) == 1
        for term in terms:
            negated = cause_negated.get(term, False)
            if single:
                negated ^= effect.negated  # parity: node negations fold into the edge
            edges.append(Edge(source=term, target=eid, negated=negated))
        effect_inputs[eid] = EffectInput(
            operator=operator,
            sources=tuple(terms),
            negated=effect.negated if not single else False,
        )

    return CauseEffectGraph(
        requirement_id=s.requirement_id,
        causes=cause_nodes,
        intermediates=tuple(intermediates),
        effects=effect_nodes,
        edges=tuple(edges),
        effect_inputs=effect_inputs,
    )


def evaluate(g: CauseEffectGraph, assignment: Mapping[str, bool]) -> dict[str, bool]:
    """Boolean bottom-up evaluation under a total cause assignment."""
    if set(assignment) != set(g.cause_ids):
        raise EvaluationError(
            f"{g.requirement_id}: assignment must cover causes "
            f"{sorted(g.cause_ids)}, got {sorted(assignment)}"
        )
    negation = {(e.source, e.target): e.negated for e in g.edges}
    values: dict[str, bool] = dict(assignment)
    for agg in g.intermediates:
        values[agg.id] = all(
            values[child] ^ negation[(child, agg.id)] for child in agg.children
        )
    result: dict[str, bool] = {}
    for eid in g.effect_ids:
        inp = g.effect_inputs[eid]
        contributions = [values[src] ^ negation[(src, eid)] for src in inp.sources]
        if inp.operator == "single":
            value = contributions[0]
        elif inp.operator == "and":
            value = all(contributions)
        else:
            value = any(contributions)
        result[eid] = value ^ inp.negated
    return result


def to_dot(g: CauseEffectGraph) -> str:
    """Deterministic DOT rendering; negated arcs carry the label of a logical
    not, multi-source effects are annotated with their aggregation operator."""
    symbols = {"and": "∧", "or": "∨"}
    lines = [f'digraph "{g.requirement_id}" {{', "  rankdir=LR;"]
    for node in g.causes:
        lines.append(
            f'  "{node.id}" [shape=box label="{_dot_escape(node.variable)}\\n'
            f'{_dot_escape(node.condition)}"];'
        )
    for agg in g.intermediates:
        lines.append(f'  "{agg.id}" [shape=circle label="{symbols["and"]}"];')
    for node in g.effects:
        inp = g.effect_inputs[node.id]
        suffix = f'\\n[{symbols[inp.operator]}]' if inp.operator != "single" else ""
        negation_mark = "¬" if inp.negated else ""
        lines.append(
            f'  "{node.id}" [shape=box label="{negation_mark}{_dot_escape(node.variable)}'
            f'\\n{_dot_escape(node.condition)}{suffix}"];'
        )
    for edge in g.edges:
        attr = ' [label="¬"]' if edge.negated else ""
        lines.append(f'  "{edge.source}" -> "{edge.target}"{attr};')
    lines.append("}")
    return "\n".join(lines) + "\n"


def _dot_escape(text: str) -> str:
    return text.replace("\\", "\\\\").replace('"', '\\"')
