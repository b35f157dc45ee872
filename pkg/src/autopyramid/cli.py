"""Command-line surface: extract, score, intrinsic, metaeval, stats.

Exit codes are stable: 0 on success, 2 for input or usage problems, 3 when
an external service fails. Every output file is written atomically and
accompanied by a ``.manifest.json`` sidecar; given the same inputs, seed,
and service replies, reruns are byte-identical except for the manifest
timestamp.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import __version__
from .amr import load_penman_file, parse_penman
from .data import (
    VALID_STRATEGIES,
    UnitFileRow,
    atomic_write_text,
    load_dataset,
    load_units,
)
from .data import save_units as write_unit_file
from .errors import (
    AutoPyramidError,
    DegenerateInput,
    EmptyDataset,
    EmptyReference,
    FileUnreadable,
    InputError,
    LengthMismatch,
    MalformedPenman,
    MalformedServiceReply,
    NoGoldUnits,
    NoUnits,
    RemoteError,
    SchemaViolation,
    ServiceUnavailable,
)
from .extract import (
    ContentUnit,
    ExtractionConfig,
    extract_ngram_units,
    extract_sentence_units,
    extract_sgu_units_many,
    extract_smu_units,
    import_units,
)
from .manifest import write_manifest
from .presence import lexical_scorer, remote_scorer, score_summary
from .services import ParseServiceClient
from .smu import SPLIT_MODES
from .stats import corpus_stats, easiness, summary_level, system_level
from .text import split_sentences, tokenize

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_SERVICE = 3

STRATEGY_NAMES = {
    "sent": "sentence_split",
    "ngram": "ngram",
    "smu": "smu",
    "sgu": "sgu",
    "import": "imported_stu",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="autopyramid",
        description="Automated Pyramid scoring: unit extraction, presence "
        "scoring, and metric meta-evaluation.",
    )
    parser.add_argument(
        "--version", action="version", version=f"%(prog)s {__version__}"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    extract = sub.add_parser(
        "extract", help="extract content units from reference summaries"
    )
    extract.add_argument("--input", required=True, help="dataset JSONL file")
    extract.add_argument("--out", required=True, help="unit JSONL file to write")
    extract.add_argument(
        "--strategy", required=True, choices=sorted(STRATEGY_NAMES)
    )
    extract.add_argument("--seed", type=int, default=42)
    extract.add_argument(
        "--ngram-sizes", default="3,4,5", help="comma-separated window sizes"
    )
    extract.add_argument("--ngram-fraction", type=float, default=0.05)
    extract.add_argument("--split-mode", choices=SPLIT_MODES, default="one-cr")
    extract.add_argument(
        "--graphs",
        help="pre-parsed PENMAN file; blocks follow dataset order, one per "
        "reference sentence",
    )
    extract.add_argument("--parse-endpoint", help="sentence-to-graph service URL")
    extract.add_argument(
        "--gen-endpoint",
        help="graph-to-text service URL (template realizer when omitted)",
    )
    extract.add_argument("--llm-endpoint", help="chat-completions service URL")
    extract.add_argument("--llm-model", help="model identifier for sgu extraction")
    extract.add_argument("--temperature", type=float, default=0.0)
    extract.add_argument("--import-path", help="unit file to import")
    extract.add_argument(
        "--import-tag", default="imported_stu", choices=sorted(VALID_STRATEGIES)
    )
    extract.add_argument("--batch-size", type=int, default=32)
    extract.add_argument("--concurrency", type=int, default=4)
    extract.set_defaults(func=cmd_extract)

    score = sub.add_parser("score", help="presence-score system summaries")
    score.add_argument("--input", required=True, help="dataset JSONL file")
    score.add_argument("--units", required=True, help="unit JSONL file")
    score.add_argument("--out", required=True, help="score JSONL file to write")
    score.add_argument("--scorer", choices=("lexical", "remote"), default="lexical")
    score.add_argument("--nli-endpoint", help="presence service URL")
    score.add_argument("--batch-size", type=int, default=32)
    score.add_argument("--concurrency", type=int, default=4)
    score.set_defaults(func=cmd_score)

    intrinsic = sub.add_parser(
        "intrinsic", help="easiness of an approximation against gold units"
    )
    intrinsic.add_argument("--input", required=True, help="dataset JSONL file")
    intrinsic.add_argument("--units", required=True, help="unit JSONL file")
    intrinsic.add_argument("--out", help="also write the report as JSONL")
    intrinsic.set_defaults(func=cmd_intrinsic)

    metaeval = sub.add_parser(
        "metaeval", help="correlate metric scores with human judgments"
    )
    metaeval.add_argument("--input", required=True, help="dataset JSONL file")
    metaeval.add_argument("--scores", required=True, help="score JSONL file")
    metaeval.add_argument(
        "--level", choices=("system", "summary", "both"), default="both"
    )
    metaeval.add_argument(
        "--corr", choices=("pearson", "spearman", "both"), default="both"
    )
    metaeval.add_argument("--out", help="also write the table as JSONL")
    metaeval.set_defaults(func=cmd_metaeval)

    stats = sub.add_parser("stats", help="reference-summary statistics")
    stats.add_argument("--input", required=True, help="dataset JSONL file")
    stats.add_argument("--out", help="also write the statistics as JSONL")
    stats.set_defaults(func=cmd_stats)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_INPUT
    try:
        return args.func(args)
    except RemoteError as exc:
        print(f"autopyramid: {exc}", file=sys.stderr)
        return EXIT_SERVICE
    except AutoPyramidError as exc:
        print(f"autopyramid: {exc}", file=sys.stderr)
        return EXIT_INPUT


# ---------------------------------------------------------------------------
# extract


def _extraction_config(args) -> ExtractionConfig:
    try:
        sizes = tuple(int(part) for part in args.ngram_sizes.split(",") if part.strip())
    except ValueError as exc:
        raise InputError(f"bad --ngram-sizes {args.ngram_sizes!r}") from exc
    try:
        return ExtractionConfig(
            strategy=STRATEGY_NAMES[args.strategy],
            ngram_sizes=sizes,
            ngram_fraction=args.ngram_fraction,
            seed=args.seed,
            split_mode=args.split_mode,
            llm_endpoint=args.llm_endpoint,
            llm_model=args.llm_model,
            temperature=args.temperature,
            generator_endpoint=args.gen_endpoint,
            batch_size=args.batch_size,
            concurrency=args.concurrency,
        )
    except ValueError as exc:
        raise InputError(str(exc)) from exc


def _each_reference(entries):
    for entry in entries:
        for index, reference in enumerate(entry.references):
            yield entry, index, reference


def _smu_graph_map(args, entries) -> dict:
    """Graphs per (example_id, reference_index), from a file or the parser
    service. File blocks are consumed positionally: dataset order, one block
    per reference sentence."""
    wanted = [
        (entry.example_id, index, [s.text for s in split_sentences(reference.text)])
        for entry, index, reference in _each_reference(entries)
    ]
    graphs = {}
    if args.graphs:
        blocks = load_penman_file(args.graphs)
        cursor = 0
        for example_id, index, sentences in wanted:
            take = blocks[cursor : cursor + len(sentences)]
            if len(take) < len(sentences):
                raise InputError(
                    f"graphs file ended early: example {example_id} reference "
                    f"{index} needs {len(sentences)} graphs"
                )
            cursor += len(sentences)
            graphs[(example_id, index)] = [block.graph for block in take]
        if cursor != len(blocks):
            raise InputError(
                f"graphs file has {len(blocks)} blocks but the dataset uses {cursor}"
            )
        return graphs
    if args.parse_endpoint:
        client = ParseServiceClient(
            args.parse_endpoint,
            batch_size=args.batch_size,
            concurrency=args.concurrency,
        )
        flat = [s for _, _, sentences in wanted for s in sentences]
        penman_texts = client.parse_sentences(flat)
        cursor = 0
        for example_id, index, sentences in wanted:
            parsed = []
            for text in penman_texts[cursor : cursor + len(sentences)]:
                try:
                    parsed.append(parse_penman(text))
                except MalformedPenman as exc:
                    raise MalformedServiceReply(
                        f"parse service returned an unparseable graph: {exc}"
                    ) from exc
            cursor += len(sentences)
            graphs[(example_id, index)] = parsed
        return graphs
    raise InputError("--strategy smu needs --graphs or --parse-endpoint")


def _import_rows(path, tag: str) -> list[UnitFileRow]:
    """Unit rows from an external file: unit-schema JSONL keeps its example
    ids and reference indices, plain lines become bare rows."""
    try:
        with open(path, "r", encoding="utf-8") as handle:
            first = next((line for line in handle if line.strip()), "")
    except OSError as exc:
        raise FileUnreadable(f"cannot read {path}: {exc}") from exc
    if first.lstrip().startswith("{"):
        return [
            UnitFileRow(r.example_id, r.reference_index, tag, r.text)
            for r in load_units(path)
        ]
    return [
        UnitFileRow(u.reference_id, 0, u.strategy, u.text)
        for u in import_units(path, tag)
    ]


def cmd_extract(args) -> int:
    entries = load_dataset(args.input)
    config = _extraction_config(args)
    rows: list[UnitFileRow] = []
    extra: dict = {}
    inputs = [args.input]

    if args.strategy == "sent":
        for entry, index, reference in _each_reference(entries):
            try:
                units = extract_sentence_units(reference.text)
            except EmptyReference as exc:
                raise EmptyReference(
                    f"example {entry.example_id} reference {index}: {exc}"
                ) from exc
            rows.extend(
                UnitFileRow(entry.example_id, index, u.strategy, u.text) for u in units
            )
    elif args.strategy == "ngram":
        for entry, index, reference in _each_reference(entries):
            try:
                units = extract_ngram_units(reference.text, config)
            except EmptyReference as exc:
                raise EmptyReference(
                    f"example {entry.example_id} reference {index}: {exc}"
                ) from exc
            rows.extend(
                UnitFileRow(entry.example_id, index, u.strategy, u.text) for u in units
            )
    elif args.strategy == "smu":
        graph_map = _smu_graph_map(args, entries)
        if args.graphs:
            inputs.append(args.graphs)
        for entry, index, _ in _each_reference(entries):
            units = extract_smu_units(graph_map[(entry.example_id, index)], config)
            rows.extend(
                UnitFileRow(entry.example_id, index, u.strategy, u.text) for u in units
            )
        extra["split_mode"] = args.split_mode
        extra["realizer"] = "remote" if args.gen_endpoint else "template"
    elif args.strategy == "sgu":
        spots = [(entry, index) for entry, index, _ in _each_reference(entries)]
        texts = [ref.text for _, _, ref in _each_reference(entries)]
        batches = extract_sgu_units_many(texts, config)
        for (entry, index), units in zip(spots, batches):
            rows.extend(
                UnitFileRow(entry.example_id, index, u.strategy, u.text) for u in units
            )
        extra["sgu_prompt_framing"] = (
            "system,example-user,example-assistant,reference-user"
        )
        extra["llm_model"] = args.llm_model
        extra["temperature"] = args.temperature
    else:  # import
        if not args.import_path:
            raise InputError("--strategy import needs --import-path")
        inputs.append(args.import_path)
        rows.extend(_import_rows(args.import_path, args.import_tag))

    write_unit_file(args.out, rows)
    write_manifest(
        args.out,
        command="extract",
        config={
            "strategy": args.strategy,
            "seed": args.seed,
            "ngram_sizes": args.ngram_sizes,
            "ngram_fraction": args.ngram_fraction,
            "split_mode": args.split_mode,
            "graphs": args.graphs,
            "parse_endpoint": args.parse_endpoint,
            "gen_endpoint": args.gen_endpoint,
            "llm_endpoint": args.llm_endpoint,
            "llm_model": args.llm_model,
            "temperature": args.temperature,
            "import_path": args.import_path,
            "import_tag": args.import_tag,
            "batch_size": args.batch_size,
            "concurrency": args.concurrency,
        },
        inputs=inputs,
        extra=extra or None,
    )
    return EXIT_OK


# ---------------------------------------------------------------------------
# score


def _units_by_example(rows) -> dict[str, list[UnitFileRow]]:
    grouped: dict[str, list[UnitFileRow]] = {}
    for row in rows:
        grouped.setdefault(row.example_id, []).append(row)
    return grouped


def cmd_score(args) -> int:
    entries = load_dataset(args.input)
    unit_rows = load_units(args.units)
    grouped = _units_by_example(unit_rows)

    missing = [e.example_id for e in entries if not grouped.get(e.example_id)]
    if missing:
        raise NoUnits(f"no units for examples: {', '.join(sorted(missing))}")

    if args.scorer == "remote":
        if not args.nli_endpoint:
            raise ServiceUnavailable("--scorer remote needs --nli-endpoint")
        scorer = remote_scorer(
            args.nli_endpoint,
            batch_size=args.batch_size,
            concurrency=args.concurrency,
        )
    else:
        scorer = lexical_scorer

    lines = []
    token_counts = {}
    for entry in sorted(entries, key=lambda e: e.example_id):
        units = [
            ContentUnit(r.text, r.strategy, reference_id=r.example_id)
            for r in grouped[entry.example_id]
        ]
        for system in sorted(entry.systems, key=lambda s: s.system_id):
            result = score_summary(units, system.summary, scorer)
            lines.append(
                json.dumps(
                    {
                        "example_id": entry.example_id,
                        "system_id": system.system_id,
                        "score": result.pyramid_score,
                        "units": len(units),
                    },
                    ensure_ascii=False,
                    separators=(",", ":"),
                )
            )
            token_counts[f"{entry.example_id}/{system.system_id}"] = len(
                tokenize(system.summary)
            )

    atomic_write_text(args.out, "".join(line + "\n" for line in lines))
    write_manifest(
        args.out,
        command="score",
        config={
            "scorer": args.scorer,
            "nli_endpoint": args.nli_endpoint,
            "batch_size": args.batch_size,
            "concurrency": args.concurrency,
        },
        inputs=[args.input, args.units],
        extra={"summary_token_counts": token_counts},
    )
    return EXIT_OK


# ---------------------------------------------------------------------------
# intrinsic


def cmd_intrinsic(args) -> int:
    entries = load_dataset(args.input)
    grouped = _units_by_example(load_units(args.units))

    reports = []
    for entry in entries:
        pooled = entry.pooled_scus()
        if not pooled:
            raise NoGoldUnits(f"example {entry.example_id} has no gold units")
        gold = [ContentUnit(text, "gold_scu") for text in pooled]
        approx = [
            ContentUnit(r.text, r.strategy) for r in grouped.get(entry.example_id, [])
        ]
        reports.append(easiness(gold, approx))

    mean_r = sum(r.easiness_r for r in reports) / len(reports)
    mean_p = sum(r.easiness_p for r in reports) / len(reports)
    degenerate = sum(1 for r in reports if r.degenerate)

    header = f"{'examples':>8}  {'easiness_r':>10}  {'easiness_p':>10}  {'empty_approx':>12}"
    line = f"{len(reports):>8}  {mean_r:>10.4f}  {mean_p:>10.4f}  {degenerate:>12}"
    print(header)
    print(line)

    if args.out:
        row = {
            "examples": len(reports),
            "easiness_r": mean_r,
            "easiness_p": mean_p,
            "empty_approx": degenerate,
            "aggregation": "per-example-mean",
        }
        atomic_write_text(
            args.out, json.dumps(row, ensure_ascii=False, separators=(",", ":")) + "\n"
        )
        write_manifest(
            args.out,
            command="intrinsic",
            config={"aggregation": "per-example-mean"},
            inputs=[args.input, args.units],
        )
    return EXIT_OK


# ---------------------------------------------------------------------------
# metaeval


def _load_scores(path) -> dict[tuple[str, str], float]:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            lines = handle.read().splitlines()
    except OSError as exc:
        raise FileUnreadable(f"cannot read {path}: {exc}") from exc
    scores = {}
    for number, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            raw = json.loads(line)
        except ValueError as exc:
            raise SchemaViolation("not valid JSON", line=number) from exc
        if not isinstance(raw, dict):
            raise SchemaViolation("row must be an object", line=number)
        example_id = raw.get("example_id")
        system_id = raw.get("system_id")
        value = raw.get("score")
        if not isinstance(example_id, str) or not isinstance(system_id, str):
            raise SchemaViolation(
                "rows need string 'example_id' and 'system_id'", line=number
            )
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise SchemaViolation("'score' must be a number", line=number, field="score")
        scores[(example_id, system_id)] = float(value)
    return scores


def cmd_metaeval(args) -> int:
    entries = load_dataset(args.input)
    scores = _load_scores(args.scores)
    if not entries:
        raise EmptyDataset("dataset has no entries")

    system_ids = sorted(s.system_id for s in entries[0].systems)
    if len(system_ids) < 2:
        raise LengthMismatch("meta-evaluation needs at least two systems")

    metric_matrix = []
    human_matrix = []
    for entry in entries:
        ids = sorted(s.system_id for s in entry.systems)
        if ids != system_ids:
            raise LengthMismatch(
                f"example {entry.example_id} has systems {ids}, expected {system_ids}"
            )
        by_id = {s.system_id: s for s in entry.systems}
        metric_row = []
        human_row = []
        for system_id in system_ids:
            if (entry.example_id, system_id) not in scores:
                raise LengthMismatch(
                    f"score file has no row for {entry.example_id}/{system_id}"
                )
            human = by_id[system_id].human_score
            if human is None:
                raise LengthMismatch(
                    f"example {entry.example_id} system {system_id} has no human score"
                )
            metric_row.append(scores[(entry.example_id, system_id)])
            human_row.append(human)
        metric_matrix.append(metric_row)
        human_matrix.append(human_row)

    levels = ["system", "summary"] if args.level == "both" else [args.level]
    kinds = ["pearson", "spearman"] if args.corr == "both" else [args.corr]

    cells = []
    for level in levels:
        for kind in kinds:
            compute = system_level if level == "system" else summary_level
            try:
                report = compute(metric_matrix, human_matrix, kind)
                cells.append(
                    {
                        "level": level,
                        "corr": kind,
                        "value": report.value,
                        "examples": report.examples,
                        "systems": report.systems,
                        "skipped": report.skipped if level == "summary" else None,
                    }
                )
            except DegenerateInput as exc:
                cells.append(
                    {
                        "level": level,
                        "corr": kind,
                        "value": None,
                        "examples": len(metric_matrix),
                        "systems": len(system_ids),
                        "skipped": None,
                        "note": str(exc),
                    }
                )

    print(f"{'level':<8} {'corr':<9} {'value':>8} {'examples':>8} {'systems':>8} {'skipped':>8}")
    for cell in cells:
        value = "n/a" if cell["value"] is None else f"{cell['value']:.4f}"
        skipped = "-" if cell["skipped"] is None else str(cell["skipped"])
        print(
            f"{cell['level']:<8} {cell['corr']:<9} {value:>8} "
            f"{cell['examples']:>8} {cell['systems']:>8} {skipped:>8}"
        )

    if args.out:
        atomic_write_text(
            args.out,
            "".join(
                json.dumps(cell, ensure_ascii=False, separators=(",", ":")) + "\n"
                for cell in cells
            ),
        )
        write_manifest(
            args.out,
            command="metaeval",
            config={"level": args.level, "corr": args.corr},
            inputs=[args.input, args.scores],
        )
    return EXIT_OK


# ---------------------------------------------------------------------------
# stats


def cmd_stats(args) -> int:
    entries = load_dataset(args.input)
    stats = corpus_stats(entries)

    rows = [
        ("examples", f"{stats.examples}"),
        ("avg sentences/reference", f"{stats.avg_sentences:.2f}"),
        ("avg words/reference", f"{stats.avg_words:.2f}"),
        ("avg words/sentence", f"{stats.avg_words_per_sentence:.2f}"),
        ("references/example", f"{stats.refs_per_example:.2f}"),
        ("avg gold units/example", f"{stats.avg_scus:.2f}"),
    ]
    width = max(len(name) for name, _ in rows)
    for name, value in rows:
        print(f"{name:<{width}}  {value}")

    if args.out:
        row = {
            "examples": stats.examples,
            "avg_sentences": stats.avg_sentences,
            "avg_words": stats.avg_words,
            "avg_words_per_sentence": stats.avg_words_per_sentence,
            "refs_per_example": stats.refs_per_example,
            "avg_scus": stats.avg_scus,
        }
        atomic_write_text(
            args.out, json.dumps(row, ensure_ascii=False, separators=(",", ":")) + "\n"
        )
        write_manifest(
            args.out, command="stats", config={}, inputs=[args.input]
        )
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
