"""Compile natural-language conditional requirements into minimal
acceptance-test suites.

Pipeline: detect conditionals, label their fine-grained structure, assemble a
conditional structure, compile it into a cause-effect graph, and derive the
minimal test suite by basic path sensitization. Evaluation helpers score
predictions against gold corpora and compare derived suites against manually
written ones.
"""

from .ceg import build, complete_nodes, evaluate, to_dot
from .derive import SensitizationSet, derive, force, suite_stats
from .detect import (
    CausalityLabel,
    CausalityVerdict,
    VerdictMethod,
    classify_heuristic,
    filter_causal,
    ingest_verdicts,
)
from .evaluation import (
    LabelMetrics,
    SuiteMatchReport,
    average_pairwise_f1,
    match_suites,
    pairwise_f1,
    parse_brat,
    token_metrics,
)
from .extract import (
    ExternalTokenLabels,
    assemble,
    ingest_labels,
    label_heuristic,
    tokenize,
)
from .model import (
    AcceptanceTestSpec,
    CauseEffectGraph,
    ConditionalStructure,
    Connective,
    EventNode,
    InterpretationMode,
    LabeledSentence,
    LowerLabel,
    Polarity,
    Requirement,
    Role,
    TestCase,
    Token,
    TopLabel,
    canonical_json,
    validate_structure,
)
from .report import render, render_bundle

__version__ = "0.1.0"

__all__ = [
    "AcceptanceTestSpec",
    "CausalityLabel",
    "CausalityVerdict",
    "CauseEffectGraph",
    "ConditionalStructure",
    "Connective",
    "EventNode",
    "ExternalTokenLabels",
    "InterpretationMode",
    "LabelMetrics",
    "LabeledSentence",
    "LowerLabel",
    "Polarity",
    "Requirement",
    "Role",
    "SensitizationSet",
    "SuiteMatchReport",
    "TestCase",
    "Token",
    "TopLabel",
    "VerdictMethod",
    "assemble",
    "average_pairwise_f1",
    "build",
    "canonical_json",
    "classify_heuristic",
    "complete_nodes",
    "derive",
    "evaluate",
    "filter_causal",
    "force",
    "ingest_labels",
    "ingest_verdicts",
    "label_heuristic",
    "match_suites",
    "pairwise_f1",
    "parse_brat",
    "render",
    "render_bundle",
    "suite_stats",
    "to_dot",
    "token_metrics",
    "tokenize",
    "validate_structure",
]
