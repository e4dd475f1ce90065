import random

import pytest

import helpers
from condtest.ceg import build, complete_nodes, evaluate
from condtest.derive import DerivationError, derive, force, suite_stats
from condtest.extract import assemble
from condtest.model import (
    CauseEffectGraph,
    Edge,
    EffectInput,
    GraphNode,
    InterpretationMode,
    Polarity,
    Role,
)


def _graph(rid):
    return build(complete_nodes(assemble(helpers.gold_sentence(rid))))


class TestForce:
    def test_and_true_single_assignment(self):
        got = force(_graph("ABC"), "e1", True)
        assert got.assignments == ({"c1": True, "c2": True},)

    def test_and_false_one_per_child(self):
        got = force(_graph("ABC"), "e1", False)
        assert got.assignments == (
            {"c1": False, "c2": True},
            {"c1": True, "c2": False},
        )

    def test_or_true_one_per_child(self):
        got = force(_graph("REQ B"), "e1", True)
        assert got.assignments == (
            {"c1": True, "c2": False},
            {"c1": False, "c2": True},
        )

    def test_negated_edge_flips_forced_value(self):
        got = force(_graph("REQ D"), "e1", True)
        assert got.assignments == ({"c1": False},)

    def test_assignments_force_the_stated_value(self):
        rng = random.Random(41)
        for _ in range(100):
            g = build(helpers.random_structure(rng))
            for eid in g.effect_ids:
                for value in (True, False):
                    result = force(g, eid, value)
                    for partial in result.assignments:
                        total = {c: partial.get(c, False) for c in g.cause_ids}
                        assert evaluate(g, total)[eid] == value

    def test_negated_or_branch(self):
        g = CauseEffectGraph(
            requirement_id="SHARED",
            causes=(
                GraphNode(id="c1", role=Role.CAUSE, variable="x1", condition="holds"),
                GraphNode(id="c2", role=Role.CAUSE, variable="x2", condition="holds"),
            ),
            intermediates=(),
            effects=(GraphNode(id="e1", role=Role.EFFECT, variable="y", condition="fires"),),
            edges=(Edge("c1", "e1"), Edge("c2", "e1", negated=True)),
            effect_inputs={"e1": EffectInput(operator="or", sources=("c1", "c2"))},
        )
        # e1 = c1 OR NOT c2; forcing false requires c1=F, c2=T
        got = force(g, "e1", False)
        assert got.assignments == ({"c1": False, "c2": True},)

    @staticmethod
    def _shared_cause_graph():
        """e1 = c1 AND i1 with i1 = (NOT c1) AND c2: c1 appears on two paths
        with opposite polarity, so forcing e1 true is contradictory."""
        from condtest.model import Aggregator

        return CauseEffectGraph(
            requirement_id="SHARED2",
            causes=(
                GraphNode(id="c1", role=Role.CAUSE, variable="x1", condition="holds"),
                GraphNode(id="c2", role=Role.CAUSE, variable="x2", condition="holds"),
            ),
            intermediates=(Aggregator(id="i1", children=("c1", "c2")),),
            effects=(GraphNode(id="e1", role=Role.EFFECT, variable="y", condition="fires"),),
            edges=(
                Edge("c1", "i1", negated=True),
                Edge("c2", "i1"),
                Edge("c1", "e1"),
                Edge("i1", "e1"),
            ),
            effect_inputs={"e1": EffectInput(operator="and", sources=("c1", "i1"))},
        )

    def test_contradictory_merges_dropped(self):
        # e1 is constant false here; of the three raw sensitization branches
        # one contradicts itself on c1 and must be dropped silently
        got = force(self._shared_cause_graph(), "e1", False)
        assert {tuple(sorted(a.items())) for a in got.assignments} == {
            (("c1", False), ("c2", True)),
            (("c1", True), ("c2", True)),
        }

    def test_unsatisfiable_target(self):
        with pytest.raises(DerivationError, match="unsatisfiable"):
            force(self._shared_cause_graph(), "e1", True)


class TestDerive:
    def test_fig2_equivalence(self):
        spec = derive(_graph("ABC"), InterpretationMode.EQUIVALENCE)
        rows = [
            (tc.inputs["c1"], tc.inputs["c2"], tc.expected["e1"], tc.polarity)
            for tc in spec.test_cases
        ]
        assert rows == [
            (True, True, True, Polarity.POSITIVE),
            (False, True, False, Polarity.NEGATIVE),
            (True, False, False, Polarity.NEGATIVE),
        ]

    def test_req_b_equivalence(self):
        spec = derive(_graph("REQ B"), InterpretationMode.EQUIVALENCE)
        assert suite_stats(spec) == (3, 4)
        rows = [
            (tc.inputs["c1"], tc.inputs["c2"], tc.expected["e1"], tc.expected["e2"])
            for tc in spec.test_cases
        ]
        assert rows == [
            (True, False, True, True),
            (False, True, True, True),
            (False, False, False, False),
        ]

    def test_single_cause_implication(self):
        g = helpers.single_aggregator_graph(1, "and")
        spec = derive(g, InterpretationMode.IMPLICATION)
        assert suite_stats(spec) == (1, 2)
        tc = spec.test_cases[0]
        assert tc.inputs == {"c1": True} and tc.expected == {"e1": True}

    def test_parameters_ordered_causes_then_effects(self):
        spec = derive(_graph("REQ B"), InterpretationMode.EQUIVALENCE)
        assert [p.id for p in spec.parameters] == ["c1", "c2", "e1", "e2"]
        assert [p.role for p in spec.parameters] == [
            Role.CAUSE,
            Role.CAUSE,
            Role.EFFECT,
            Role.EFFECT,
        ]

    def test_determinism_byte_identical(self):
        from condtest.model import canonical_json

        g = _graph("REQ B")
        a = canonical_json(derive(g, InterpretationMode.EQUIVALENCE))
        b = canonical_json(derive(g, InterpretationMode.EQUIVALENCE))
        assert a == b


class TestSizeLaws:
    @pytest.mark.parametrize("n", [1, 2, 3, 4])
    @pytest.mark.parametrize("operator", ["and", "or"])
    def test_single_aggregator_suite_size(self, n, operator):
        g = helpers.single_aggregator_graph(n, operator)
        spec = derive(g, InterpretationMode.EQUIVALENCE)
        assert len(spec.test_cases) == n + 1
        table = helpers.graph_truth_table(g.to_dict())
        for tc in spec.test_cases:
            bits = tuple(tc.inputs[f"c{i + 1}"] for i in range(n))
            assert dict(tc.expected) == table[bits]

    @pytest.mark.parametrize("n", [2, 3, 4])
    @pytest.mark.parametrize("operator", ["and", "or"])
    def test_strictly_below_exponential(self, n, operator):
        g = helpers.single_aggregator_graph(n, operator)
        spec = derive(g, InterpretationMode.EQUIVALENCE)
        assert len(spec.test_cases) < 2**n

    def test_mixed_graph_agrees_with_formula(self):
        g = helpers.mixed_or_and_graph()
        spec = derive(g, InterpretationMode.EQUIVALENCE)
        assert len(spec.test_cases) == 5
        covered = set()
        for tc in spec.test_cases:
            bits = (tc.inputs["c1"], tc.inputs["c2"], tc.inputs["c3"])
            covered.add(bits)
            assert tc.expected["e1"] == (bits[0] or (bits[1] and bits[2]))
        assert len(covered) == 5


class TestModeFilter:
    def test_implication_is_positive_subset(self):
        rng = random.Random(59)
        for _ in range(100):
            g = build(complete_nodes(helpers.random_structure(rng)))
            equivalence = derive(g, InterpretationMode.EQUIVALENCE)
            implication = derive(g, InterpretationMode.IMPLICATION)
            positives = [
                tc for tc in equivalence.test_cases if tc.polarity is Polarity.POSITIVE
            ]
            assert [tc.inputs for tc in implication.test_cases] == [
                tc.inputs for tc in positives
            ]
            assert [tc.expected for tc in implication.test_cases] == [
                tc.expected for tc in positives
            ]


class TestSoundness:
    def test_expected_matches_brute_force(self):
        rng = random.Random(61)
        for _ in range(150):
            g = build(complete_nodes(helpers.random_structure(rng)))
            table = helpers.graph_truth_table(g.to_dict())
            for mode in InterpretationMode:
                for tc in derive(g, mode).test_cases:
                    bits = tuple(tc.inputs[c] for c in g.cause_ids)
                    assert dict(tc.expected) == table[bits]

    def test_suite_stats_examples(self):
        assert suite_stats(derive(_graph("ABC"), InterpretationMode.EQUIVALENCE)) == (3, 3)
        assert suite_stats(derive(_graph("REQ A"), InterpretationMode.EQUIVALENCE)) == (2, 3)
