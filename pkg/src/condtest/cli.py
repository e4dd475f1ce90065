"""Command-line frontend.

Subcommands expose the pipeline end to end (``pipeline``) and each stage in
isolation (``detect``, ``extract``, ``ceg``, ``testgen``, ``eval``,
``compare``). Input is JSON-lines of requirement objects or plain text with
one sentence per line (ids auto-assigned R1, R2, ...). Detection and
extraction each run from the built-in heuristic, an interchange file
(``file:PATH``) or an adapter subprocess (``cmd:"..."``); the adapter command
is executed with the path of a normalized requirements JSON-lines file as its
last argument and must print interchange JSON on stdout. When a stage flag is
omitted and CIRA_ADAPTER_CMD is set, that command (plus ``--task detect`` or
``--task extract``) is used.

Exit codes: 0 success (per-sentence failures become index entries and
warnings), 1 per-sentence failures under --strict, 2 unusable input,
3 adapter subprocess failure.
"""

from __future__ import annotations

import argparse
import json
import os
import shlex
import subprocess
import sys
import tempfile
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional, Sequence

from .ceg import CompletionError, GraphError, build, complete_nodes, to_dot
from .derive import DerivationError, derive
from .detect import (
    CausalityVerdict,
    VerdictError,
    classify_heuristic,
    filter_causal,
    ingest_verdicts,
    load_cue_lexicon,
    load_negation_lexicon,
)
from .evaluation import (
    AlignmentError,
    BratError,
    load_synonym_map,
    match_suites,
    pairwise_f1,
    parse_brat,
    render_metrics,
    token_metrics,
)
from .extract import (
    ExternalTokenLabels,
    ExtractionError,
    LabelIngestError,
    assemble,
    ingest_labels,
    label_heuristic,
    parse_label_stream,
)
from .model import (
    CauseEffectGraph,
    InterpretationMode,
    ModelError,
    Requirement,
    canonical_json,
)
from .report import RENDER_FORMATS, RequirementOutcome, render, render_bundle

ADAPTER_ENV = "CIRA_ADAPTER_CMD"

EXIT_OK = 0
EXIT_STRICT = 1
EXIT_INPUT = 2
EXIT_ADAPTER = 3


class InputError(Exception):
    pass


class AdapterError(Exception):
    pass


@dataclass(frozen=True)
class PipelineConfig:
    """Resolved run configuration; exactly one source per stage."""

    mode: InterpretationMode = InterpretationMode.EQUIVALENCE
    detector: str = "heuristic"  # "heuristic" | "file:PATH" | "cmd:COMMAND"
    extractor: str = "heuristic"
    format: str = "json"
    out_dir: Optional[Path] = None
    cues_path: Optional[Path] = None
    negations_path: Optional[Path] = None
    synonyms_path: Optional[Path] = None
    strict: bool = False
    stamp: bool = False


def read_requirements(path: Path) -> list[Requirement]:
    """JSON-lines of requirement objects, or plain text one sentence per line."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    lines = [line for line in text.splitlines() if line.strip()]
    requirements: list[Requirement] = []
    jsonl = bool(lines) and lines[0].lstrip().startswith("{")
    try:
        if jsonl:
            for line in lines:
                requirements.append(Requirement.from_dict(json.loads(line)))
        else:
            for i, line in enumerate(lines, start=1):
                requirements.append(Requirement(id=f"R{i}", text=line.strip()))
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise InputError(f"unparseable requirement input: {exc}") from exc
    except ModelError as exc:
        raise InputError(str(exc)) from exc
    seen: set[str] = set()
    for r in requirements:
        if r.id in seen:
            raise InputError(f"id collision: {r.id}")
        seen.add(r.id)
    return requirements


def _source(value: str, env_task: Optional[str]) -> str:
    if value:
        if value == "heuristic" or value.startswith(("file:", "cmd:")):
            return value
        raise InputError(f"unknown stage source {value!r}")
    adapter = os.environ.get(ADAPTER_ENV)
    if adapter and env_task:
        return f"cmd:{adapter} --task {env_task}"
    return "heuristic"


def _run_adapter(command: str, requirements: Sequence[Requirement]) -> str:
    with tempfile.NamedTemporaryFile(
        "w", suffix=".jsonl", delete=False, encoding="utf-8"
    ) as handle:
        for r in requirements:
            handle.write(json.dumps(r.to_dict()) + "\n")
        input_path = handle.name
    argv = shlex.split(command) + [input_path]
    try:
        proc = subprocess.run(argv, capture_output=True, text=True, timeout=600)
    except (OSError, subprocess.TimeoutExpired) as exc:
        raise AdapterError(f"adapter {command!r} failed to run: {exc}") from exc
    if proc.returncode != 0:
        raise AdapterError(
            f"adapter {command!r} exited {proc.returncode}: {proc.stderr.strip()}"
        )
    return proc.stdout


def obtain_verdicts(
    config: PipelineConfig, requirements: Sequence[Requirement]
) -> tuple[list[CausalityVerdict], list[str]]:
    """Run the configured detector; returns verdicts plus warnings about
    verdict records that match no input requirement."""
    source = _source(config.detector, "detect")
    warnings: list[str] = []
    if source == "heuristic":
        cues = load_cue_lexicon(config.cues_path)
        return [classify_heuristic(r, cues) for r in requirements], warnings
    if source.startswith("file:"):
        stream = Path(source[5:]).read_text(encoding="utf-8")
    else:
        stream = _run_adapter(source[4:], requirements)
    try:
        verdicts = ingest_verdicts(stream)
    except VerdictError as exc:
        if source.startswith("cmd:"):
            raise AdapterError(f"adapter verdicts rejected: {exc}") from exc
        raise InputError(f"verdict file rejected: {exc}") from exc
    known = {r.id for r in requirements}
    extra = [v.requirement_id for v in verdicts if v.requirement_id not in known]
    if extra:
        warnings.append(f"verdicts for unknown requirement ids: {', '.join(extra)}")
    return verdicts, warnings


def obtain_labels(
    config: PipelineConfig, causal: Sequence[Requirement]
) -> dict[str, ExternalTokenLabels]:
    """External label records by requirement id (empty for heuristic source)."""
    source = _source(config.extractor, "extract")
    if source == "heuristic":
        return {}
    if source.startswith("file:"):
        stream = Path(source[5:]).read_text(encoding="utf-8")
        try:
            records = parse_label_stream(stream)
        except LabelIngestError as exc:
            raise InputError(f"label file rejected: {exc}") from exc
    else:
        stream = _run_adapter(source[4:], causal)
        try:
            records = parse_label_stream(stream)
        except LabelIngestError as exc:
            raise AdapterError(f"adapter labels rejected: {exc}") from exc
    return {x.requirement_id: x for x in records}


def labeled_sentence(
    config: PipelineConfig,
    requirement: Requirement,
    external: dict[str, ExternalTokenLabels],
):
    source = _source(config.extractor, "extract")
    if source == "heuristic":
        cues = load_cue_lexicon(config.cues_path)
        negations = load_negation_lexicon(config.negations_path)
        return label_heuristic(requirement, cues, negations)
    if requirement.id not in external:
        raise LabelIngestError(
            f"{requirement.id}: no token labels supplied"
        )
    return ingest_labels(requirement, external[requirement.id])


def graph_for(
    config: PipelineConfig,
    requirement: Requirement,
    external: dict[str, ExternalTokenLabels],
) -> CauseEffectGraph:
    sentence = labeled_sentence(config, requirement, external)
    structure = assemble(sentence)
    structure = complete_nodes(structure)
    return build(structure)


def run_pipeline(config: PipelineConfig, input_path: Path) -> int:
    """detection -> extraction -> graph -> derivation -> bundle."""
    if config.out_dir is None:
        raise InputError("--out DIR is required")
    try:
        requirements = read_requirements(input_path)
        verdicts, warnings = obtain_verdicts(config, requirements)
        causal, _ = filter_causal(requirements, verdicts)
        external = obtain_labels(config, causal)
    except InputError:
        raise
    except VerdictError as exc:
        raise InputError(str(exc)) from exc
    by_id = {v.requirement_id: v for v in verdicts}

    outcomes = []
    failures = 0
    for requirement in requirements:
        verdict = by_id[requirement.id]
        spec = graph = error = None
        if verdict.causal:
            try:
                graph = graph_for(config, requirement, external)
                spec = derive(graph, config.mode)
            except (
                ExtractionError,
                LabelIngestError,
                GraphError,
                CompletionError,
                DerivationError,
                ModelError,
            ) as exc:
                error = str(exc)
                failures += 1
                warnings.append(f"{requirement.id}: {error}")
        outcomes.append(
            RequirementOutcome(
                requirement=requirement,
                verdict=verdict,
                spec=spec,
                graph=graph,
                error=error,
            )
        )

    stamp = (
        datetime.now(timezone.utc).isoformat(timespec="seconds")
        if config.stamp
        else None
    )
    render_bundle(
        outcomes,
        config.out_dir,
        format=config.format,
        warnings=warnings,
        stamp=stamp,
    )
    if failures and config.strict:
        return EXIT_STRICT
    return EXIT_OK


def _write_or_print(text: str, out: Optional[Path]) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def cmd_detect(config: PipelineConfig, input_path: Path, out: Optional[Path]) -> int:
    requirements = read_requirements(input_path)
    verdicts, _ = obtain_verdicts(config, requirements)
    by_id = {v.requirement_id: v for v in verdicts}
    records = [
        {
            "id": r.id,
            "causal": by_id[r.id].causal,
            "confidence": by_id[r.id].confidence,
        }
        for r in requirements
        if r.id in by_id
    ]
    _write_or_print(json.dumps(records, indent=2) + "\n", out)
    return EXIT_OK


def cmd_extract(config: PipelineConfig, input_path: Path, out: Optional[Path]) -> int:
    requirements = read_requirements(input_path)
    verdicts, _ = obtain_verdicts(config, requirements)
    causal, _ = filter_causal(requirements, verdicts)
    external = obtain_labels(config, causal)
    records = []
    for requirement in causal:
        sentence = labeled_sentence(config, requirement, external)
        records.append(
            {
                "id": requirement.id,
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
        )
    _write_or_print(json.dumps(records, indent=2) + "\n", out)
    return EXIT_OK


def cmd_ceg(config: PipelineConfig, input_path: Path) -> int:
    if config.out_dir is None:
        raise InputError("--out DIR is required")
    requirements = read_requirements(input_path)
    verdicts, warnings = obtain_verdicts(config, requirements)
    causal, _ = filter_causal(requirements, verdicts)
    external = obtain_labels(config, causal)
    outcomes = []
    by_id = {v.requirement_id: v for v in verdicts}
    for requirement in requirements:
        verdict = by_id[requirement.id]
        graph = error = None
        if verdict.causal:
            try:
                graph = graph_for(config, requirement, external)
            except (ValueError, ModelError) as exc:
                error = str(exc)
                warnings.append(f"{requirement.id}: {error}")
        outcomes.append(
            RequirementOutcome(
                requirement=requirement, verdict=verdict, graph=graph, error=error
            )
        )
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    fmt = config.format if config.format in ("dot", "json") else "dot"
    for outcome in outcomes:
        if outcome.graph is None:
            continue
        name = outcome.requirement.id.replace(" ", "_")
        if fmt == "dot":
            (out_dir / f"{name}.dot").write_text(
                to_dot(outcome.graph), encoding="utf-8"
            )
        else:
            (out_dir / f"{name}.json").write_text(
                canonical_json(outcome.graph), encoding="utf-8"
            )
    return EXIT_OK


def cmd_testgen(config: PipelineConfig, graphs: Sequence[Path], out: Optional[Path]) -> int:
    """Derive suites from serialized graphs."""
    for path in graphs:
        graph = CauseEffectGraph.from_dict(
            json.loads(Path(path).read_text(encoding="utf-8"))
        )
        spec = derive(graph, config.mode)
        fmt = config.format if config.format in RENDER_FORMATS else "json"
        text = render(spec, fmt)
        if out is None:
            sys.stdout.write(text)
        else:
            out_dir = Path(out)
            out_dir.mkdir(parents=True, exist_ok=True)
            name = graph.requirement_id.replace(" ", "_")
            (out_dir / f"{name}.{fmt}").write_text(text, encoding="utf-8")
    return EXIT_OK


def cmd_eval(args) -> int:
    gold = parse_brat(Path(args.gold_txt), Path(args.gold_ann))
    if args.second_ann:
        other = parse_brat(Path(args.gold_txt), Path(args.second_ann))
        scores = pairwise_f1(
            gold,
            other,
            level="span" if args.spans else "token",
            span_match="overlap" if args.overlap else "exact",
        )
        sys.stdout.write(json.dumps(scores, indent=2, sort_keys=True) + "\n")
        return EXIT_OK
    if not args.pred:
        raise InputError("either --pred or --second-ann is required")
    requirements = {s.requirement.id: s.requirement for s in gold}
    records = parse_label_stream(
        Path(args.pred).read_text(encoding="utf-8")
    )
    pred = []
    for record in records:
        if record.requirement_id not in requirements:
            raise InputError(f"prediction for unknown sentence {record.requirement_id}")
        pred.append(
            ingest_labels(requirements[record.requirement_id], record)
        )
    metrics = token_metrics(pred, gold)
    sys.stdout.write(render_metrics(metrics, args.format or "json"))
    return EXIT_OK


def cmd_compare(args) -> int:
    auto = json.loads(Path(args.auto).read_text(encoding="utf-8"))
    manual = json.loads(Path(args.manual).read_text(encoding="utf-8"))
    synonyms = load_synonym_map(args.synonyms) if args.synonyms else None
    report = match_suites(auto, manual, synonyms)
    sys.stdout.write(canonical_json(report.to_dict()))
    return EXIT_OK


def _add_stage_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--mode",
        choices=[m.value for m in InterpretationMode],
        default=InterpretationMode.EQUIVALENCE.value,
        help="interpret conditionals as implication or equivalence",
    )
    parser.add_argument("--format", choices=["md", "csv", "json", "dot"], default="json")
    parser.add_argument(
        "--detector",
        default="",
        help='"heuristic", "file:PATH" or cmd:"COMMAND" (default heuristic, '
        f"or the {ADAPTER_ENV} adapter when set)",
    )
    parser.add_argument("--extractor", default="", help="like --detector")
    parser.add_argument("--out", type=Path, default=None, help="output directory")
    parser.add_argument("--cues", type=Path, default=None, help="cue lexicon file")
    parser.add_argument(
        "--negations", type=Path, default=None, help="negation lexicon file"
    )
    parser.add_argument(
        "--synonyms", type=Path, default=None, help="synonym map JSON"
    )
    parser.add_argument(
        "--strict", action="store_true", help="per-sentence failures exit 1"
    )
    parser.add_argument(
        "--stamp", action="store_true", help="record a timestamp in the index"
    )


def _config(args) -> PipelineConfig:
    return PipelineConfig(
        mode=InterpretationMode(args.mode),
        detector=args.detector,
        extractor=args.extractor,
        format=args.format,
        out_dir=args.out,
        cues_path=args.cues,
        negations_path=args.negations,
        synonyms_path=args.synonyms,
        strict=args.strict,
        stamp=args.stamp,
    )


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="condtest",
        description="Derive minimal acceptance-test suites from conditional requirements",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_pipeline = sub.add_parser("pipeline", help="run the full pipeline into a bundle")
    p_pipeline.add_argument("input", type=Path)
    _add_stage_flags(p_pipeline)

    p_detect = sub.add_parser("detect", help="classify sentences causal/non-causal")
    p_detect.add_argument("input", type=Path)
    p_detect.add_argument("-o", "--output", type=Path, default=None)
    _add_stage_flags(p_detect)

    p_extract = sub.add_parser("extract", help="token-label causal sentences")
    p_extract.add_argument("input", type=Path)
    p_extract.add_argument("-o", "--output", type=Path, default=None)
    _add_stage_flags(p_extract)

    p_ceg = sub.add_parser("ceg", help="write cause-effect graphs")
    p_ceg.add_argument("input", type=Path)
    _add_stage_flags(p_ceg)

    p_testgen = sub.add_parser("testgen", help="derive suites from graph JSON files")
    p_testgen.add_argument("graphs", type=Path, nargs="+")
    p_testgen.add_argument("-o", "--output", type=Path, default=None)
    _add_stage_flags(p_testgen)

    p_eval = sub.add_parser("eval", help="score predictions against a brat corpus")
    p_eval.add_argument("--gold-txt", required=True)
    p_eval.add_argument("--gold-ann", required=True)
    p_eval.add_argument("--pred", default=None, help="token-label interchange JSON")
    p_eval.add_argument(
        "--second-ann", default=None, help="second annotator's .ann for agreement"
    )
    p_eval.add_argument("--spans", action="store_true", help="span-level agreement")
    p_eval.add_argument(
        "--overlap", action="store_true", help="credit overlapping spans"
    )
    p_eval.add_argument("--format", choices=["json", "md"], default="json")

    p_compare = sub.add_parser("compare", help="match an auto suite against a manual one")
    p_compare.add_argument("--auto", required=True)
    p_compare.add_argument("--manual", required=True)
    p_compare.add_argument("--synonyms", type=Path, default=None)

    args = parser.parse_args(argv)
    try:
        if args.command == "pipeline":
            return run_pipeline(_config(args), args.input)
        if args.command == "detect":
            return cmd_detect(_config(args), args.input, args.output)
        if args.command == "extract":
            return cmd_extract(_config(args), args.input, args.output)
        if args.command == "ceg":
            return cmd_ceg(_config(args), args.input)
        if args.command == "testgen":
            return cmd_testgen(_config(args), args.graphs, args.output)
        if args.command == "eval":
            return cmd_eval(args)
        if args.command == "compare":
            return cmd_compare(args)
        parser.error(f"unknown command {args.command}")
    except AdapterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ADAPTER
    except (InputError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (
        VerdictError,
        LabelIngestError,
        BratError,
        AlignmentError,
        ModelError,
        ValueError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
