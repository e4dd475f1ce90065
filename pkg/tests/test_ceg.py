import itertools
import random

import pytest

import helpers
from condtest.ceg import (
    CompletionError,
    EvaluationError,
    GraphError,
    build,
    complete_nodes,
    evaluate,
    to_dot,
)
from condtest.extract import assemble
from condtest.model import (
    ConditionalStructure,
    Connective,
    EventNode,
    Role,
)


def _structure(rid):
    return assemble(helpers.gold_sentence(rid))


class TestBuild:
    def test_fig2_two_causes_and(self):
        g = build(_structure("ABC"))
        assert g.cause_ids == ("c1", "c2")
        assert g.effect_ids == ("e1",)
        assert g.intermediates == ()
        inp = g.effect_inputs["e1"]
        assert inp.operator == "and" and inp.sources == ("c1", "c2")
        assert not any(e.negated for e in g.edges)

    def test_req_b_or_into_both_effects(self):
        g = build(complete_nodes(_structure("REQ B")))
        for eid in ("e1", "e2"):
            inp = g.effect_inputs[eid]
            assert inp.operator == "or" and inp.sources == ("c1", "c2")
        assert len(g.edges) == 4

    def test_mixed_connectives_intermediate(self):
        s = ConditionalStructure(
            requirement_id="X",
            causes=(
                EventNode(Role.CAUSE, 1, "x1", "holds"),
                EventNode(Role.CAUSE, 2, "x2", "holds"),
                EventNode(Role.CAUSE, 3, "x3", "holds"),
            ),
            cause_links=(Connective.OR, Connective.AND),
            effects=(EventNode(Role.EFFECT, 1, "y", "fires"),),
            effect_links=(),
        )
        g = build(s)
        assert len(g.intermediates) == 1
        agg = g.intermediates[0]
        assert agg.id == "i1" and agg.children == ("c2", "c3")
        inp = g.effect_inputs["e1"]
        assert inp.operator == "or" and inp.sources == ("c1", "i1")
        # exhaustive agreement with the precedence-parsed formula
        for bits in itertools.product([False, True], repeat=3):
            assignment = dict(zip(("c1", "c2", "c3"), bits))
            expected = bits[0] or (bits[1] and bits[2])
            assert evaluate(g, assignment)["e1"] == expected

    def test_negated_cause_becomes_negated_edge(self):
        g = build(complete_nodes(_structure("REQ D")))
        assert [e for e in g.edges if e.negated] == [g.edges[0]]
        assert evaluate(g, {"c1": True}) == {"e1": False}
        assert evaluate(g, {"c1": False}) == {"e1": True}

    def test_negated_effect_becomes_negated_edge(self):
        g = build(complete_nodes(_structure("REQ F")))
        assert sum(1 for e in g.edges if e.negated) == 1
        assert evaluate(g, {"c1": True}) == {"e1": False}

    def test_double_negation_parity(self):
        s = ConditionalStructure(
            requirement_id="X",
            causes=(EventNode(Role.CAUSE, 1, "x", "holds", negated=True),),
            cause_links=(),
            effects=(EventNode(Role.EFFECT, 1, "y", "fires", negated=True),),
            effect_links=(),
        )
        g = build(s)
        assert not g.edges[0].negated
        assert evaluate(g, {"c1": True}) == {"e1": True}

    def test_invalid_structure_rejected(self):
        s = ConditionalStructure(
            requirement_id="X",
            causes=(),
            cause_links=(),
            effects=(EventNode(Role.EFFECT, 1, "y", "fires"),),
            effect_links=(),
        )
        with pytest.raises(GraphError):
            build(s)

    def test_never_produces_or_intermediates(self):
        rng = random.Random(11)
        for _ in range(200):
            g = build(helpers.random_structure(rng))
            for agg in g.intermediates:
                assert len(agg.children) >= 2  # aggregators are AND by type


class TestSemanticsPreservation:
    def test_random_structures_match_formula(self):
        rng = random.Random(23)
        for _ in range(300):
            s = helpers.random_structure(rng)
            g = build(s)
            n = len(s.causes)
            for bits in itertools.product([False, True], repeat=n):
                assignment = {f"c{i + 1}": bits[i] for i in range(n)}
                got = evaluate(g, assignment)
                for j in range(len(s.effects)):
                    assert got[f"e{j + 1}"] == helpers.formula_value(s, bits, j)

    def test_all_effects_extensionally_equal(self):
        rng = random.Random(29)
        for _ in range(100):
            s = helpers.random_structure(rng, allow_negation=False)
            g = build(s)
            n = len(s.causes)
            for bits in itertools.product([False, True], repeat=n):
                values = set(
                    evaluate(g, {f"c{i + 1}": bits[i] for i in range(n)}).values()
                )
                assert len(values) == 1


class TestCompleteNodes:
    def test_req_a_effect2_inherits_from_effect1(self):
        s = complete_nodes(_structure("REQ A"))
        assert s.effects[1].variable == "the determine heating/cooling mode process"
        assert s.effects[1].variable_inherited
        assert not s.effects[0].variable_inherited

    def test_req_d_effect_inherits_from_cause1(self):
        s = complete_nodes(_structure("REQ D"))
        assert s.effects[0].variable == "Temperatures"
        assert s.effects[0].variable_inherited

    def test_fully_specified_unchanged(self):
        s = _structure("ABC")
        assert complete_nodes(s) == s

    def test_idempotent(self):
        rng = random.Random(31)
        for _ in range(50):
            s = helpers.random_structure(rng)
            once = complete_nodes(s)
            assert complete_nodes(once) == once

    def test_conditions_never_altered(self):
        for rid in helpers.GOLD_LABEL_ROWS:
            before = _structure(rid)
            after = complete_nodes(before)
            assert [n.condition for n in after.causes + after.effects] == [
                n.condition for n in before.causes + before.effects
            ]

    def test_no_variable_anywhere_rejected(self):
        s = ConditionalStructure(
            requirement_id="X",
            causes=(EventNode(Role.CAUSE, 1, "", "holds"),),
            cause_links=(),
            effects=(EventNode(Role.EFFECT, 1, "", "fires"),),
            effect_links=(),
        )
        with pytest.raises(CompletionError):
            complete_nodes(s)

    def test_cause_borrows_from_nearest_cause(self):
        s = ConditionalStructure(
            requirement_id="X",
            causes=(
                EventNode(Role.CAUSE, 1, "", "is armed"),
                EventNode(Role.CAUSE, 2, "the breaker", "is closed"),
            ),
            cause_links=(Connective.AND,),
            effects=(EventNode(Role.EFFECT, 1, "the light", "turns on"),),
            effect_links=(),
        )
        out = complete_nodes(s)
        assert out.causes[0].variable == "the breaker"
        assert out.causes[0].variable_inherited


class TestEvaluate:
    def test_fig2_truth_rows(self):
        g = build(_structure("ABC"))
        assert evaluate(g, {"c1": True, "c2": True}) == {"e1": True}
        assert evaluate(g, {"c1": False, "c2": False}) == {"e1": False}

    def test_partial_assignment_rejected(self):
        g = build(_structure("ABC"))
        with pytest.raises(EvaluationError):
            evaluate(g, {"c1": True})

    def test_extra_keys_rejected(self):
        g = build(_structure("ABC"))
        with pytest.raises(EvaluationError):
            evaluate(g, {"c1": True, "c2": True, "c9": False})


class TestToDot:
    def test_fig2_counts(self):
        text = to_dot(build(_structure("ABC")))
        assert text.count("->") == 2
        assert text.count("shape=box") == 3

    def test_req_b_counts_and_aggregation_mark(self):
        g = build(complete_nodes(_structure("REQ B")))
        text = to_dot(g)
        assert text.count("->") == 4
        assert text.count("shape=box") == 4
        assert "∨" in text  # disjunction annotation on the effects

    def test_negated_edge_rendered(self):
        g = build(complete_nodes(_structure("REQ D")))
        assert '[label="¬"]' in to_dot(g)

    def test_deterministic(self):
        g = build(complete_nodes(_structure("REQ B")))
        assert to_dot(g) == to_dot(g)
