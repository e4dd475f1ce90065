"""Token labeling of causal sentences and assembly into conditional structures.

A sentence gets two label layers: the top layer marks which cause/effect each
token belongs to (or that it links two of them, or is not relevant), the lower
layer splits cause/effect spans into variable, condition and negation tokens.
Labels come either from the built-in pattern heuristic or from an external
labeler via the interchange format; both feed the same assembly step.

The heuristic works on surface patterns only. It handles cue-introduced
antecedents (sentence-initial and sentence-medial), coordinations with and/or,
trailing cue phrases opening further antecedents, and the relative-clause
negation pattern ("X that do not ... shall ..."). Anything else raises
:class:`ExtractionError`; supplying gold labels through the interchange format
is the supported path for such sentences.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Any, Iterable, Mapping, Optional, Sequence

from .detect import load_cue_lexicon, load_negation_lexicon, parse_interchange_stream
from .model import (
    Connective,
    ConditionalStructure,
    EventNode,
    LabeledSentence,
    LowerLabel,
    Requirement,
    Role,
    Token,
    TopLabel,
    validate_structure,
)


class ExtractionError(ValueError):
    """The sentence does not expose a cause and an effect the heuristic can label."""


class LabelIngestError(ValueError):
    """An external token-label record is malformed or misaligned."""


# Words with internal -/'/. stay single tokens (heating/cooling, real-time,
# don't); every other punctuation character is its own token.
_TOKEN_RE = re.compile(r"\w+(?:[-/'.]\w+)*|[^\w\s]")

_AUX_VERBS = frozenset(
    """is are was were be been being am has have had do does did
    shall should will would can could may might must""".split()
)
_DETERMINERS = frozenset(
    """the a an this that these those each every all any some no
    its his her their our your my such""".split()
)


def tokenize(r: Requirement) -> list[Token]:
    """Whitespace-and-punctuation tokenization with exact character offsets."""
    return [
        Token(index=i, text=m.group(), start=m.start(), end=m.end())
        for i, m in enumerate(_TOKEN_RE.finditer(r.text))
    ]


def _is_word(text: str) -> bool:
    return any(ch.isalnum() for ch in text)


def _match_phrase_at(words: Sequence[str], pos: int, phrase: str) -> int:
    """Length in tokens of `phrase` matching at `pos`, or 0."""
    parts = phrase.split()
    if pos + len(parts) > len(words):
        return 0
    if all(words[pos + k] == parts[k] for k in range(len(parts))):
        return len(parts)
    return 0


def _find_phrases(
    words: Sequence[str], phrases: Sequence[str], start: int, stop: int
) -> list[tuple[int, int]]:
    """Longest-match, non-overlapping phrase occurrences as half-open (start,
    end) token ranges, scanned left to right within [start, stop)."""
    ordered = sorted(phrases, key=lambda p: -len(p.split()))
    out: list[tuple[int, int]] = []
    i = start
    while i < stop:
        for phrase in ordered:
            n = _match_phrase_at(words, i, phrase)
            if n and i + n <= stop:
                out.append((i, i + n))
                i += n
                break
        else:
            i += 1
    return out


def _trim(tokens: Sequence[Token], indices: list[int]) -> list[int]:
    """Drop punctuation-only tokens from both ends of a region."""
    out = list(indices)
    while out and not _is_word(tokens[out[0]].text):
        out.pop(0)
    while out and not _is_word(tokens[out[-1]].text):
        out.pop()
    return out


def _strip_leading_cues(
    tokens: Sequence[Token], segment: list[int], cues: Sequence[str]
) -> list[int]:
    words = [tokens[i].text.lower() for i in segment]
    ordered = sorted(cues, key=lambda p: -len(p.split()))
    pos = 0
    while pos < len(words):
        n = 0
        for phrase in ordered:
            n = _match_phrase_at(words, pos, phrase)
            if n:
                break
        if not n:
            break
        pos += n
    return segment[pos:]


def _variable_boundary(words: Sequence[str]) -> int:
    """Position where the condition starts; the determiner and noun run before
    it is the variable. Returns len(words) when no finite verb, modal or
    symbol is found."""
    lowered = [w.lower() for w in words]
    for k, word in enumerate(words):
        low = lowered[k]
        if not _is_word(word):
            return k
        if low in _AUX_VERBS:
            return k
        if (
            k == 0
            and low not in _DETERMINERS
            and len(words) > 1
            and lowered[1] in _DETERMINERS
        ):
            # bare verb opening a subject-less clause ("makes a request")
            return k
        if (
            k > 0
            and word.islower()
            and len(word) >= 3
            and word.endswith("s")
            and not word.endswith(("ss", "us", "is"))
            and lowered[k - 1] not in _DETERMINERS
        ):
            # third-person -s form ("occurs"), excluding plurals after a determiner
            return k
    return len(words)


def _label_segment(
    tokens: Sequence[Token],
    segment: Sequence[int],
    label: TopLabel,
    top: list[Optional[TopLabel]],
    lower: list[Optional[LowerLabel]],
    negations: Sequence[str],
) -> None:
    words = [tokens[i].text for i in segment]
    boundary = _variable_boundary(words)
    if boundary == len(segment):
        boundary = 0  # no verb found: treat the whole segment as condition
    for pos, tok_index in enumerate(segment):
        top[tok_index] = label
        lower[tok_index] = (
            LowerLabel.VARIABLE if pos < boundary else LowerLabel.CONDITION
        )
    tail = list(segment[boundary:])
    tail_words = [tokens[i].text.lower() for i in tail]
    for start, end in _find_phrases(tail_words, negations, 0, len(tail_words)):
        for k in range(start, end):
            lower[tail[k]] = LowerLabel.NEGATION


def _split_segments(
    tokens: Sequence[Token], region: Sequence[int]
) -> tuple[list[list[int]], list[tuple[int, Connective]]]:
    """Split a region at and/or tokens. Returns the non-empty segments and the
    connective tokens sitting between two kept segments."""
    segments: list[list[int]] = []
    connectives: list[tuple[int, Connective]] = []
    current: list[int] = []
    pending: Optional[tuple[int, Connective]] = None

    def close(next_pending: Optional[tuple[int, Connective]]) -> None:
        nonlocal current, pending
        trimmed = _trim(tokens, current)
        if trimmed:
            if segments and pending is not None:
                connectives.append(pending)
            segments.append(trimmed)
            pending = next_pending
        current = []

    for idx in region:
        word = tokens[idx].text.lower()
        if word == "and":
            close((idx, Connective.AND))
        elif word == "or":
            close((idx, Connective.OR))
        else:
            current.append(idx)
    close(None)
    return segments, connectives


@dataclass
class _Regions:
    causes: list[list[int]]
    effects: list[list[int]]


def _main_clause_start(words: Sequence[str], search_from: int) -> Optional[int]:
    """Fallback boundary when neither comma nor "then" separates the clauses:
    the first determiner after the antecedent's verb starts the main clause."""
    seen_verb = False
    for i in range(search_from, len(words)):
        if words[i] in _AUX_VERBS:
            seen_verb = True
            continue
        if seen_verb and words[i] in _DETERMINERS:
            return i
    return None


def _find_regions(
    tokens: Sequence[Token], cause_cues: Sequence[str]
) -> Optional[_Regions]:
    words = [t.text.lower() for t in tokens]
    n = len(tokens)
    cues = _find_phrases(words, cause_cues, 0, n)
    if not cues:
        return None

    regions = _Regions(causes=[], effects=[])
    initial = next((c for c in cues if c[0] == 0), None)
    if initial is not None:
        boundary = next(
            (i for i in range(initial[1], n) if words[i] in (",", "then")), None
        )
        if boundary is not None:
            consequent_start = boundary + 1
            if consequent_start < n and words[consequent_start] == "then":
                consequent_start += 1
        else:
            start = _main_clause_start(words, initial[1])
            if start is None:
                return None
            boundary = consequent_start = start
        cause = _trim(tokens, list(range(initial[1], boundary)))
        if cause:
            regions.causes.append(cause)
        rest_start = consequent_start
    else:
        rest_start = 0

    # the main region may be interrupted by further cues, each opening
    # another antecedent that runs to the next cue or the sentence end
    later = [c for c in cues if c[0] >= rest_start]
    stops = [c[0] for c in later] + [n]
    main = _trim(tokens, list(range(rest_start, stops[0])))
    if main:
        regions.effects.append(main)
    for k, (_, cue_end) in enumerate(later):
        region = _trim(tokens, list(range(cue_end, stops[k + 1])))
        if region:
            regions.causes.append(region)
    if not regions.causes or not regions.effects:
        return None
    return regions


def _relative_clause_regions(
    tokens: Sequence[Token], negations: Sequence[str]
) -> Optional[_Regions]:
    """Cue-less pattern "SUBJECT that do not VERB ... MODAL ...": the relative
    clause is a negated cause, the modal clause the effect. The relative
    pronoun stays outside the cause span."""
    words = [t.text.lower() for t in tokens]
    rel = next((i for i, w in enumerate(words) if w in ("that", "which")), None)
    if rel is None or rel == 0:
        return None
    if not _find_phrases(words, negations, rel + 1, min(rel + 4, len(words))):
        return None
    modal = next(
        (
            i
            for i in range(rel + 1, len(words))
            if words[i] in ("shall", "must", "will", "should")
        ),
        None,
    )
    if modal is None:
        return None
    subject = _trim(tokens, list(range(0, rel)))
    clause = _trim(tokens, list(range(rel + 1, modal)))
    effect = _trim(tokens, list(range(modal, len(tokens))))
    if not subject or not clause or not effect:
        return None
    return _Regions(causes=[subject + clause], effects=[effect])


def label_heuristic(
    r: Requirement,
    cues: Optional[Sequence[str]] = None,
    negations: Optional[Sequence[str]] = None,
) -> LabeledSentence:
    """Label a causal sentence with both layers using surface patterns."""
    tokens = tokenize(r)
    if not tokens:
        raise ExtractionError(f"{r.id}: no tokens")
    cue_lexicon = tuple(cues) if cues is not None else load_cue_lexicon()
    cause_cues = tuple(p for p in cue_lexicon if p != "then")
    negation_lexicon = (
        tuple(negations) if negations is not None else load_negation_lexicon()
    )

    regions = _find_regions(tokens, cause_cues)
    if regions is None:
        regions = _relative_clause_regions(tokens, negation_lexicon)
    if regions is None:
        raise ExtractionError(f"{r.id}: no antecedent/consequent pattern found")

    top: list[Optional[TopLabel]] = [None] * len(tokens)
    lower: list[Optional[LowerLabel]] = [None] * len(tokens)

    for role, region_list in (
        (Role.CAUSE, regions.causes),
        (Role.EFFECT, regions.effects),
    ):
        ordinal = 0
        for region in region_list:
            segments, connectives = _split_segments(tokens, region)
            for segment in segments:
                if role is Role.CAUSE:
                    segment = _strip_leading_cues(tokens, segment, cause_cues)
                    if not segment:
                        continue
                ordinal += 1
                if ordinal > 3:
                    raise ExtractionError(f"{r.id}: more than 3 {role.value}s found")
                _label_segment(
                    tokens,
                    segment,
                    TopLabel.event(role, ordinal),
                    top,
                    lower,
                    negation_lexicon,
                )
            for idx, conn in connectives:
                top[idx] = TopLabel.AND if conn is Connective.AND else TopLabel.OR

    for i in range(len(tokens)):
        if top[i] is None:
            top[i] = TopLabel.NOT_RELEVANT
            lower[i] = None

    sentence = LabeledSentence(
        requirement=r, tokens=tuple(tokens), top=tuple(top), lower=tuple(lower)
    )
    if not any(t.is_cause for t in sentence.top) or not any(
        t.is_effect for t in sentence.top
    ):
        raise ExtractionError(f"{r.id}: no cause or no effect region found")
    return sentence


@dataclass(frozen=True)
class LabelRecord:
    text: str
    start: int
    end: int
    top: TopLabel
    lower: Optional[LowerLabel]


@dataclass(frozen=True)
class ExternalTokenLabels:
    """Token labels produced outside the pipeline, aligned by character span."""

    requirement_id: str
    records: tuple[LabelRecord, ...]

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "ExternalTokenLabels":
        try:
            rid = d["id"]
            raw = d["tokens"]
        except KeyError as exc:
            raise LabelIngestError(f"label record missing field {exc}") from exc
        records = []
        for item in raw:
            try:
                top = TopLabel(item["top"])
            except ValueError as exc:
                raise LabelIngestError(
                    f"{rid}: unknown label {item.get('top')!r}"
                ) from exc
            raw_lower = item.get("lower")
            if raw_lower is None:
                low = None
            else:
                try:
                    low = LowerLabel(raw_lower)
                except ValueError as exc:
                    raise LabelIngestError(f"{rid}: unknown label {raw_lower!r}") from exc
            if low is not None and not top.is_event:
                raise LabelIngestError(
                    f"{rid}: layer rule: {top.value} token cannot carry {low.value}"
                )
            records.append(
                LabelRecord(
                    text=item["text"],
                    start=item["start"],
                    end=item["end"],
                    top=top,
                    lower=low,
                )
            )
        return cls(requirement_id=rid, records=tuple(records))

    def to_dict(self) -> dict:
        return {
            "id": self.requirement_id,
            "tokens": [
                {
                    "text": rec.text,
                    "start": rec.start,
                    "end": rec.end,
                    "top": rec.top.value,
                    "lower": rec.lower.value if rec.lower else None,
                }
                for rec in self.records
            ],
        }


def _majority(votes: Iterable):
    counts: dict = {}
    order: list = []
    for v in votes:
        if v not in counts:
            counts[v] = 0
            order.append(v)
        counts[v] += 1
    return max(order, key=lambda v: (counts[v], -order.index(v)))


def ingest_labels(r: Requirement, x: ExternalTokenLabels) -> LabeledSentence:
    """Map externally labeled spans onto this pipeline's tokenization.

    External tokenizers may emit subword pieces; the pieces overlapping one of
    our tokens vote for its labels (majority, ties resolved by the first piece)."""
    if x.requirement_id != r.id:
        raise LabelIngestError(
            f"labels for {x.requirement_id} applied to requirement {r.id}"
        )
    text = r.text
    prev_end = 0
    for rec in x.records:
        if not (0 <= rec.start < rec.end <= len(text)):
            raise LabelIngestError(f"{r.id}: span {rec.start}..{rec.end} out of bounds")
        if rec.start < prev_end:
            raise LabelIngestError(f"{r.id}: overlapping spans at {rec.start}..{rec.end}")
        if text[rec.start : rec.end] != rec.text:
            raise LabelIngestError(
                f"{r.id}: span text mismatch at {rec.start}: "
                f"{rec.text!r} != {text[rec.start:rec.end]!r}"
            )
        prev_end = rec.end

    tokens = tokenize(r)
    top: list[TopLabel] = []
    lower: list[Optional[LowerLabel]] = []
    for tok in tokens:
        pieces = [rec for rec in x.records if rec.start < tok.end and rec.end > tok.start]
        if not pieces:
            raise LabelIngestError(
                f"{r.id}: token {tok.text!r} at {tok.start} has no label span"
            )
        winner = _majority(rec.top for rec in pieces)
        top.append(winner)
        low = _majority(rec.lower for rec in pieces)
        lower.append(low if winner.is_event else None)
    return LabeledSentence(
        requirement=r, tokens=tuple(tokens), top=tuple(top), lower=tuple(lower)
    )


def parse_label_stream(text: str) -> list[ExternalTokenLabels]:
    """Parse the token-label interchange format (array or newline-delimited)."""
    try:
        records = parse_interchange_stream(text)
    except ValueError as exc:
        raise LabelIngestError(str(exc)) from exc
    return [ExternalTokenLabels.from_dict(d) for d in records]


def assemble(ls: LabeledSentence) -> ConditionalStructure:
    """Merge labeled tokens into one event node per label ordinal, derive the
    connectives between adjacent nodes, and validate the result.

    Assembly keys on label ordinals, not adjacency, so causes and effects may
    interleave in the sentence. A node is negated iff a negation token lies in
    its span; missing connectives are filled from the closest subsequent
    explicit one (preceding as fallback, conjunction as default)."""
    groups: dict[TopLabel, list[int]] = {}
    for i, label in enumerate(ls.top):
        if label.is_event:
            groups.setdefault(label, []).append(i)
    if not any(k.is_cause for k in groups) or not any(k.is_effect for k in groups):
        raise ExtractionError(
            f"{ls.requirement.id}: at least one cause and one effect required"
        )

    def build_nodes(role: Role) -> list[EventNode]:
        labels = sorted(
            (k for k in groups if (k.is_cause if role is Role.CAUSE else k.is_effect)),
            key=lambda k: k.ordinal,
        )
        ordinals = [k.ordinal for k in labels]
        if ordinals != list(range(1, len(labels) + 1)):
            raise ExtractionError(
                f"{ls.requirement.id}: {role.value} ordinals not contiguous: {ordinals}"
            )
        nodes = []
        for k in labels:
            span = groups[k]
            variable = " ".join(
                ls.tokens[i].text for i in span if ls.lower[i] is LowerLabel.VARIABLE
            )
            condition = " ".join(
                ls.tokens[i].text for i in span if ls.lower[i] is LowerLabel.CONDITION
            )
            negated = any(ls.lower[i] is LowerLabel.NEGATION for i in span)
            if not condition:
                raise ExtractionError(
                    f"{ls.requirement.id}: {k.value} has no condition tokens"
                )
            nodes.append(
                EventNode(
                    role=role,
                    ordinal=k.ordinal,
                    variable=variable,
                    condition=condition,
                    negated=negated,
                )
            )
        return nodes

    causes = build_nodes(Role.CAUSE)
    effects = build_nodes(Role.EFFECT)

    # a connective belongs to the role of the labeled spans around it
    explicit: dict[tuple[Role, int], Connective] = {}
    for i, label in enumerate(ls.top):
        if label not in (TopLabel.AND, TopLabel.OR):
            continue
        left = next((ls.top[j] for j in range(i - 1, -1, -1) if ls.top[j].is_event), None)
        right = next(
            (ls.top[j] for j in range(i + 1, len(ls.top)) if ls.top[j].is_event), None
        )
        if left is None or right is None:
            continue
        conn = Connective.AND if label is TopLabel.AND else Connective.OR
        if left.is_cause and right.is_cause:
            explicit.setdefault((Role.CAUSE, min(left.ordinal, right.ordinal)), conn)
        elif left.is_effect and right.is_effect:
            explicit.setdefault((Role.EFFECT, min(left.ordinal, right.ordinal)), conn)

    def links_for(role: Role, count: int) -> tuple[Connective, ...]:
        raw = [explicit.get((role, i)) for i in range(1, count)]
        filled: list[Connective] = []
        for i, link in enumerate(raw):
            if link is None:
                link = next((c for c in raw[i + 1 :] if c is not None), None)
            if link is None:
                link = next((c for c in reversed(raw[:i]) if c is not None), None)
            filled.append(link if link is not None else Connective.AND)
        return tuple(filled)

    structure = ConditionalStructure(
        requirement_id=ls.requirement.id,
        causes=tuple(causes),
        cause_links=links_for(Role.CAUSE, len(causes)),
        effects=tuple(effects),
        effect_links=links_for(Role.EFFECT, len(effects)),
    )
    report = validate_structure(structure)
    if not report.ok:
        raise ExtractionError(
            f"{ls.requirement.id}: invalid structure: {'; '.join(report.violations)}"
        )
    return structure
