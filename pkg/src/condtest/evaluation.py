"""Evaluate predicted labels against gold corpora and compare test suites.

Gold corpora arrive as brat standoff (.txt with one sentence per line, .ann
with typed character spans, entities from the twelve-label set, top and lower
layers overlapping). Metrics are per-label precision/recall/F1 with macro and
micro aggregates; the macro average covers only labels occurring in gold or
prediction. Suite comparison matches parameters by normalized text (plus an
optional synonym map) and buckets test cases into identical pairs, one-to-many
groups, and the two leftover sets.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping, Optional, Sequence, Union

from .extract import tokenize
from .model import (
    AcceptanceTestSpec,
    LabeledSentence,
    LowerLabel,
    Requirement,
    Role,
    TopLabel,
)


class BratError(ValueError):
    """A standoff annotation cannot be mapped onto the sentences."""


class AlignmentError(ValueError):
    """Prediction and gold do not describe the same sentences."""


@dataclass(frozen=True)
class LabelScore:
    precision: float
    recall: float
    f1: float
    tp: int
    fp: int
    fn: int


@dataclass(frozen=True)
class LabelMetrics:
    per_label: Mapping[str, LabelScore]
    macro_precision: float
    macro_recall: float
    macro_f1: float
    micro_precision: float
    micro_recall: float
    micro_f1: float

    def to_dict(self) -> dict:
        return {
            "per_label": {
                name: {
                    "precision": s.precision,
                    "recall": s.recall,
                    "f1": s.f1,
                    "tp": s.tp,
                    "fp": s.fp,
                    "fn": s.fn,
                }
                for name, s in sorted(self.per_label.items())
            },
            "macro": {
                "precision": self.macro_precision,
                "recall": self.macro_recall,
                "f1": self.macro_f1,
            },
            "micro": {
                "precision": self.micro_precision,
                "recall": self.micro_recall,
                "f1": self.micro_f1,
            },
        }


_ENTITY_RE = re.compile(r"^T\S+\t(\S+) ([0-9 ;]+)\t(.*)$")
_LABEL_ALIASES = {
    re.sub(r"[\s_]+", "", label.value).lower(): label
    for label in list(TopLabel) + list(LowerLabel)
}


def _canonical_label(name: str) -> Union[TopLabel, LowerLabel]:
    key = re.sub(r"[\s_]+", "", name).lower()
    if key not in _LABEL_ALIASES:
        raise BratError(f"unknown label {name!r}")
    return _LABEL_ALIASES[key]


def parse_brat(txt_path: Path, ann_path: Path) -> list[LabeledSentence]:
    """Reconstruct gold labeled sentences from a brat file pair.

    Each non-empty line of the .txt is one sentence with requirement id
    "<stem>:<line-number>". Tokens outside any top-layer entity default to
    NotRelevant.
    """
    txt_path, ann_path = Path(txt_path), Path(ann_path)
    text = txt_path.read_text(encoding="utf-8")

    sentences: list[tuple[int, int, Requirement, list]] = []
    offset = 0
    lineno = 0
    for line in text.split("\n"):
        lineno += 1
        if line.strip():
            req = Requirement(id=f"{txt_path.stem}:{lineno}", text=line)
            sentences.append((offset, offset + len(line), req, tokenize(req)))
        offset += len(line) + 1

    tops: list[list[Optional[TopLabel]]] = [
        [None] * len(toks) for (_, _, _, toks) in sentences
    ]
    lowers: list[list[Optional[LowerLabel]]] = [
        [None] * len(toks) for (_, _, _, toks) in sentences
    ]

    for raw in ann_path.read_text(encoding="utf-8").splitlines():
        if not raw.startswith("T"):
            continue  # relations, attributes and notes are not entities
        m = _ENTITY_RE.match(raw)
        if m is None:
            raise BratError(f"unparseable entity line: {raw!r}")
        name, offsets, surface = m.groups()
        if ";" in offsets:
            raise BratError(f"discontinuous span not supported: {raw!r}")
        try:
            start, end = (int(x) for x in offsets.split())
        except ValueError as exc:
            raise BratError(f"unparseable entity offsets: {raw!r}") from exc
        # the standoff format flattens newlines inside the surface to spaces
        if text[start:end].replace("\n", " ") != surface:
            raise BratError(
                f"span mismatch at {start}..{end}: {surface!r} != {text[start:end]!r}"
            )
        label = _canonical_label(name)

        holder = next(
            (
                (i, s_start)
                for i, (s_start, s_end, _, _) in enumerate(sentences)
                if s_start <= start and end <= s_end
            ),
            None,
        )
        if holder is None:
            raise BratError(f"cross-sentence span at {start}..{end}")
        sent_index, sent_start = holder
        tokens = sentences[sent_index][3]
        covered = [
            t.index
            for t in tokens
            if sent_start + t.start >= start and sent_start + t.end <= end
        ]
        if not covered or sent_start + tokens[covered[0]].start != start or (
            sent_start + tokens[covered[-1]].end != end
        ):
            raise BratError(
                f"span mismatch: {start}..{end} does not align with token boundaries"
            )
        layer = tops[sent_index] if isinstance(label, TopLabel) else lowers[sent_index]
        for ti in covered:
            if layer[ti] is not None:
                raise BratError(
                    f"overlapping same-layer entities on token {tokens[ti].text!r}"
                )
            layer[ti] = label

    out = []
    for i, (_, _, req, tokens) in enumerate(sentences):
        top = tuple(t if t is not None else TopLabel.NOT_RELEVANT for t in tops[i])
        out.append(
            LabeledSentence(
                requirement=req,
                tokens=tuple(tokens),
                top=top,
                lower=tuple(lowers[i]),
            )
        )
    return out


def _aligned_pairs(
    pred: Sequence[LabeledSentence], gold: Sequence[LabeledSentence]
) -> list[tuple[LabeledSentence, LabeledSentence]]:
    pred_by_id = {s.requirement.id: s for s in pred}
    gold_by_id = {s.requirement.id: s for s in gold}
    if set(pred_by_id) != set(gold_by_id):
        raise AlignmentError(
            f"id mismatch: pred-only {sorted(set(pred_by_id) - set(gold_by_id))}, "
            f"gold-only {sorted(set(gold_by_id) - set(pred_by_id))}"
        )
    pairs = []
    for rid in sorted(pred_by_id):
        p, g = pred_by_id[rid], gold_by_id[rid]
        if [t.text for t in p.tokens] != [t.text for t in g.tokens]:
            raise AlignmentError(f"tokenization mismatch for {rid}")
        pairs.append((p, g))
    return pairs


def _count_layers(
    pairs: Sequence[tuple[LabeledSentence, LabeledSentence]]
) -> dict[str, list[int]]:
    counts: dict[str, list[int]] = {}  # label -> [tp, fp, fn]

    def bump(label: str, slot: int) -> None:
        counts.setdefault(label, [0, 0, 0])[slot] += 1

    for p, g in pairs:
        for i in range(len(p.tokens)):
            pt, gt = p.top[i].value, g.top[i].value
            if pt == gt:
                bump(gt, 0)
            else:
                bump(pt, 1)
                bump(gt, 2)
            pl = p.lower[i].value if p.lower[i] is not None else None
            gl = g.lower[i].value if g.lower[i] is not None else None
            if pl == gl:
                if gl is not None:
                    bump(gl, 0)
            else:
                if pl is not None:
                    bump(pl, 1)
                if gl is not None:
                    bump(gl, 2)
    return counts


def _prf(tp: int, fp: int, fn: int) -> tuple[float, float, float]:
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f1


def token_metrics(
    pred: Sequence[LabeledSentence], gold: Sequence[LabeledSentence]
) -> LabelMetrics:
    """Per-token label comparison over both layers, aligned by requirement id."""
    counts = _count_layers(_aligned_pairs(pred, gold))
    per_label = {}
    for label, (tp, fp, fn) in counts.items():
        precision, recall, f1 = _prf(tp, fp, fn)
        per_label[label] = LabelScore(
            precision=precision, recall=recall, f1=f1, tp=tp, fp=fp, fn=fn
        )
    names = sorted(per_label)
    k = len(names)
    macro_p = sum(per_label[n].precision for n in names) / k if k else 0.0
    macro_r = sum(per_label[n].recall for n in names) / k if k else 0.0
    macro_f = sum(per_label[n].f1 for n in names) / k if k else 0.0
    total_tp = sum(per_label[n].tp for n in names)
    total_fp = sum(per_label[n].fp for n in names)
    total_fn = sum(per_label[n].fn for n in names)
    micro_p, micro_r, micro_f = _prf(total_tp, total_fp, total_fn)
    return LabelMetrics(
        per_label=per_label,
        macro_precision=macro_p,
        macro_recall=macro_r,
        macro_f1=macro_f,
        micro_precision=micro_p,
        micro_recall=micro_r,
        micro_f1=micro_f,
    )


def _spans(sentence: LabeledSentence) -> list[tuple[str, int, int]]:
    """Maximal same-label runs per layer as (label, first token, last token)."""
    out = []
    for labels in (sentence.top, sentence.lower):
        run_label: Optional[str] = None
        run_start = 0
        for i, lab in enumerate(list(labels) + [None]):
            value = getattr(lab, "value", None)
            if value != run_label:
                if run_label is not None:
                    out.append((run_label, run_start, i - 1))
                run_label = value
                run_start = i
    return out


def pairwise_f1(
    annotator_a: Sequence[LabeledSentence],
    annotator_b: Sequence[LabeledSentence],
    *,
    level: str = "token",
    span_match: str = "exact",
) -> dict[str, float]:
    """Agreement between two annotators: per-label F1 with one side treated as
    gold. Computed in a form that is exactly symmetric in the two arguments.

    level="token" compares the label of every token (the default); level="span"
    compares maximal same-label runs, either with exact boundaries or, with
    span_match="overlap", crediting any same-label overlap.
    """
    pairs = _aligned_pairs(annotator_a, annotator_b)
    if level == "token":
        counts = _count_layers(pairs)
        return {
            label: (2 * tp / (2 * tp + fp + fn) if 2 * tp + fp + fn else 0.0)
            for label, (tp, fp, fn) in sorted(counts.items())
        }
    if level != "span":
        raise ValueError(f"unknown level {level!r}")
    if span_match not in ("exact", "overlap"):
        raise ValueError(f"unknown span_match {span_match!r}")

    per_label_a: dict[str, list[tuple[int, int, int]]] = {}
    per_label_b: dict[str, list[tuple[int, int, int]]] = {}
    for si, (a, b) in enumerate(pairs):
        for label, s, e in _spans(a):
            per_label_a.setdefault(label, []).append((si, s, e))
        for label, s, e in _spans(b):
            per_label_b.setdefault(label, []).append((si, s, e))

    result = {}
    for label in sorted(set(per_label_a) | set(per_label_b)):
        spans_a = per_label_a.get(label, [])
        spans_b = per_label_b.get(label, [])
        if span_match == "exact":
            matched = len(set(spans_a) & set(spans_b))
            hits = 2 * matched
        else:
            overlap = lambda x, y: x[0] == y[0] and x[1] <= y[2] and y[1] <= x[2]
            hits = sum(1 for x in spans_a if any(overlap(x, y) for y in spans_b))
            hits += sum(1 for y in spans_b if any(overlap(y, x) for x in spans_a))
        denom = len(spans_a) + len(spans_b)
        result[label] = hits / denom if denom else 0.0
    return result


def average_pairwise_f1(
    annotators: Sequence[Sequence[LabeledSentence]], **kwargs
) -> dict[str, float]:
    """Mean per-label agreement across all annotator pairs."""
    if len(annotators) < 2:
        raise ValueError("need at least two annotators")
    sums: dict[str, float] = {}
    hits: dict[str, int] = {}
    pair_count = 0
    for i in range(len(annotators)):
        for j in range(i + 1, len(annotators)):
            pair_count += 1
            for label, score in pairwise_f1(annotators[i], annotators[j], **kwargs).items():
                sums[label] = sums.get(label, 0.0) + score
                hits[label] = hits.get(label, 0) + 1
    return {label: sums[label] / hits[label] for label in sorted(sums)}


@dataclass(frozen=True)
class SuiteMatchReport:
    """Partition of both suites' cases: every case lands in exactly one bucket.
    Cases are referenced by position in their suite."""

    identical: tuple[tuple[int, int], ...]  # (auto index, manual index)
    one_to_many: tuple[tuple[int, tuple[int, ...]], ...]  # (manual, autos)
    auto_only: tuple[int, ...]
    manual_only: tuple[int, ...]

    def to_dict(self) -> dict:
        return {
            "identical": [list(p) for p in self.identical],
            "one_to_many": [[m, list(autos)] for m, autos in self.one_to_many],
            "auto_only": list(self.auto_only),
            "manual_only": list(self.manual_only),
        }


def _normalizer(synonyms: Optional[Mapping[str, Sequence[str]]]):
    alias_map = {}
    if synonyms:
        for term, aliases in synonyms.items():
            canonical = re.sub(r"\s+", " ", term.strip().lower())
            for alias in aliases:
                alias_map[re.sub(r"\s+", " ", alias.strip().lower())] = canonical

    def normalize(text: str) -> str:
        collapsed = re.sub(r"\s+", " ", text.strip().lower())
        return alias_map.get(collapsed, collapsed)

    return normalize


Suite = Union[AcceptanceTestSpec, Mapping[str, Any]]


def _suite_cases(suite: Suite, normalize) -> list[dict[tuple, bool]]:
    """Each case as one map from normalized parameter key to value. Plain-dict
    suites may inspect only a subset of parameters per case; derived specs
    always cover all of them."""
    if isinstance(suite, AcceptanceTestSpec):
        data = suite.to_dict()
    else:
        data = suite
    params = {
        p["id"]: (
            Role(p["role"]).value,
            normalize(p["variable"]),
            normalize(p["condition"]),
        )
        for p in data["parameters"]
    }
    cases = []
    for tc in data["test_cases"]:
        case: dict[tuple, bool] = {}
        for mapping in (tc.get("inputs", {}), tc.get("expected", {})):
            for pid, value in mapping.items():
                if pid not in params:
                    raise ValueError(f"test case references unknown parameter {pid!r}")
                case[params[pid]] = bool(value)
        cases.append(case)
    return cases


def match_suites(
    auto: Suite,
    manual: Suite,
    synonyms: Optional[Mapping[str, Sequence[str]]] = None,
) -> SuiteMatchReport:
    """Compare an automatically derived suite with a manually written one.

    Two cases are identical when their parameter maps coincide. A manual case
    whose parameters are exactly the union of two or more automatic cases'
    parameters, with agreeing values, forms a one-to-many group. Everything
    else is suite-exclusive. Normalization is lowercase plus whitespace
    collapse plus the synonym map; this approximates semantic identity and the
    report is decision support, not a verdict.
    """
    normalize = _normalizer(synonyms)
    auto_cases = _suite_cases(auto, normalize)
    manual_cases = _suite_cases(manual, normalize)

    unmatched_auto = set(range(len(auto_cases)))
    unmatched_manual = set(range(len(manual_cases)))

    identical: list[tuple[int, int]] = []
    for ai in range(len(auto_cases)):
        partner = next(
            (
                mi
                for mi in sorted(unmatched_manual)
                if manual_cases[mi] == auto_cases[ai]
            ),
            None,
        )
        if partner is not None:
            identical.append((ai, partner))
            unmatched_auto.discard(ai)
            unmatched_manual.discard(partner)

    one_to_many: list[tuple[int, tuple[int, ...]]] = []
    for mi in sorted(unmatched_manual):
        manual_case = manual_cases[mi]
        covering = [
            ai
            for ai in sorted(unmatched_auto)
            if auto_cases[ai]
            and all(manual_case.get(k) == v for k, v in auto_cases[ai].items())
        ]
        covered_keys = set().union(*(auto_cases[ai].keys() for ai in covering)) if covering else set()
        if len(covering) >= 2 and covered_keys == set(manual_case):
            one_to_many.append((mi, tuple(covering)))
            unmatched_auto.difference_update(covering)
            unmatched_manual.discard(mi)

    return SuiteMatchReport(
        identical=tuple(identical),
        one_to_many=tuple(one_to_many),
        auto_only=tuple(sorted(unmatched_auto)),
        manual_only=tuple(sorted(unmatched_manual)),
    )


def load_synonym_map(path: Path) -> dict[str, list[str]]:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(data, dict) or not all(
        isinstance(v, list) for v in data.values()
    ):
        raise ValueError('synonym map must be {"term": ["alias", ...]}')
    return data


def render_metrics(metrics: LabelMetrics, format: str = "json") -> str:
    """Metrics as canonical JSON or a Markdown table."""
    from .model import canonical_json

    if format == "json":
        return canonical_json(metrics.to_dict())
    if format == "md":
        lines = [
            "| label | precision | recall | f1 | tp | fp | fn |",
            "| --- | --- | --- | --- | --- | --- | --- |",
        ]
        for name in sorted(metrics.per_label):
            s = metrics.per_label[name]
            lines.append(
                f"| {name} | {s.precision:.4f} | {s.recall:.4f} | {s.f1:.4f} "
                f"| {s.tp} | {s.fp} | {s.fn} |"
            )
        lines.append(
            f"| macro | {metrics.macro_precision:.4f} | {metrics.macro_recall:.4f} "
            f"| {metrics.macro_f1:.4f} | | | |"
        )
        lines.append(
            f"| micro | {metrics.micro_precision:.4f} | {metrics.micro_recall:.4f} "
            f"| {metrics.micro_f1:.4f} | | | |"
        )
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown format {format!r}")
