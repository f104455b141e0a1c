"""Command-line interface.

Subcommands cover the whole pipeline: ``clean`` raw documents,
``generate`` labeled pair shards, ``stats`` for corpora, datasets and
shard directories, ``eval`` for scored answer-ranking files, and
``extract-candidates`` for building candidate lists from raw sentences.

Exit codes: 0 on success, 2 for usage or configuration problems, 3 for
missing or unreadable inputs, 4 for malformed data. Subcommands that
write into an output directory also leave a ``run.json`` there with the
exact configuration, so a run can be reproduced from its outputs.
"""

from __future__ import annotations

import argparse
import json
import sys
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .corpus import (
    CleaningConfig,
    CorpusStats,
    Document,
    EncodingError,
    RecordError,
    clean_document,
    corpus_stats,
    read_clean_documents,
    read_raw_documents,
    write_clean_documents,
)
from .evaluation import (
    EvaluationError,
    Question,
    clean_filter,
    dataset_stats,
    extract_candidates,
    per_question_metrics,
    read_qaset,
    score_qaset_tfidf,
    summarize_metrics,
    write_qaset,
    write_report,
)
from .sampler import (
    DEFAULT_POOL_CAPACITY,
    Hardness,
    ObjectiveKind,
    SamplingConfig,
    generate_examples,
)
from .shardio import (
    DEFAULT_SHARD_SIZE,
    ShardError,
    iter_manifest_examples,
    read_manifest,
    write_shards,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INPUT = 3
EXIT_DATA = 4

_CONFIG_FLAGS = (
    "ssp_a_sentences",
    "ssp_b_sentences",
    "sp_a_sentences",
    "max_hard_negatives",
    "total_negatives",
    "positives_per_unit",
    "token_budget_ssp",
    "token_budget_sp_psd",
    "ssp_hard_negative_source",
)


class UsageError(ValueError):
    """Bad flag combinations or invalid configuration values."""


def _add_cleaning_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("cleaning")
    group.add_argument("--min-paragraph-chars", type=int, default=None, metavar="N")
    group.add_argument("--min-document-chars", type=int, default=None, metavar="N")
    group.add_argument(
        "--keep-markup",
        action="store_true",
        help="skip markup stripping (tags, header-like and table-like lines)",
    )


def _add_sampling_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("sampling", "override config-file keys of the same name")
    group.add_argument("--config", type=Path, default=None, metavar="FILE",
                       help="JSON file with sampling settings")
    group.add_argument("--seed", type=int, default=None, help="run seed (config key global_seed)")
    for name in ("ssp-a-sentences", "ssp-b-sentences", "sp-a-sentences"):
        group.add_argument(f"--{name}", nargs=2, type=int, default=None, metavar=("LO", "HI"))
    group.add_argument("--max-hard-negatives", type=int, default=None, metavar="N")
    group.add_argument("--total-negatives", type=int, default=None, metavar="N")
    group.add_argument("--positives-per-unit", type=int, default=None, metavar="N")
    group.add_argument("--token-budget-ssp", type=int, default=None, metavar="N")
    group.add_argument("--token-budget-sp-psd", type=int, default=None, metavar="N")
    group.add_argument(
        "--ssp-hard-negative-source",
        choices=["other-paragraphs", "same-paragraph"],
        default=None,
    )


def _cleaning_config(args: argparse.Namespace) -> CleaningConfig:
    kwargs = {}
    if args.min_paragraph_chars is not None:
        kwargs["min_paragraph_chars"] = args.min_paragraph_chars
    if args.min_document_chars is not None:
        kwargs["min_document_chars"] = args.min_document_chars
    if args.keep_markup:
        kwargs["strip_markup"] = False
    return CleaningConfig(**kwargs)


def _sampling_config(args: argparse.Namespace) -> SamplingConfig:
    settings: dict = {}
    if args.config is not None:
        try:
            loaded = json.loads(Path(args.config).read_text("utf-8"))
        except json.JSONDecodeError as exc:
            raise UsageError(f"{args.config}: not valid JSON ({exc})") from exc
        if not isinstance(loaded, dict):
            raise UsageError(f"{args.config}: config must be a JSON object")
        unknown = set(loaded) - set(_CONFIG_FLAGS) - {"global_seed"}
        if unknown:
            raise UsageError(f"{args.config}: unknown config keys {sorted(unknown)}")
        settings.update(loaded)
    for name in _CONFIG_FLAGS:
        value = getattr(args, name)
        if value is not None:
            settings[name] = value
    if args.seed is not None:
        settings["global_seed"] = args.seed
    try:
        return SamplingConfig.from_dict(settings)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"invalid sampling configuration: {exc}") from exc


def _is_cleaned_file(path: Path) -> bool:
    with open(path, "r", encoding="utf-8") as handle:
        for line in handle:
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError:
                return False
            return isinstance(record, dict) and "paragraphs" in record
    return False


def _load_documents(args: argparse.Namespace) -> list[Document]:
    """Load cleaned documents, cleaning raw input on the fly when needed."""
    path = Path(args.input)
    if path.is_file() and _is_cleaned_file(path):
        return list(read_clean_documents(path))
    cleaning = _cleaning_config(args)
    docs = []
    for raw in read_raw_documents(path, source=getattr(args, "source", "unknown")):
        doc = clean_document(raw, cleaning)
        if doc is not None:
            docs.append(doc)
    return docs


def _write_run_log(out_dir: Path, payload: dict) -> None:
    payload = {
        "tool": "parapair",
        "version": __version__,
        "created": datetime.now(timezone.utc).isoformat(),
        **payload,
    }
    with open(out_dir / "run.json", "w", encoding="utf-8") as handle:
        json.dump(payload, handle, ensure_ascii=False, indent=2)
        handle.write("\n")


def _print_stats_lines(lines: list[tuple[str, object]], out_path: Path | None) -> None:
    text = "".join(f"{key}\t{value}\n" for key, value in lines)
    sys.stdout.write(text)
    if out_path is not None:
        out_path.write_text(text, encoding="utf-8")


def _cmd_clean(args: argparse.Namespace) -> int:
    cleaning = _cleaning_config(args)
    kept: list[Document] = []
    dropped = 0
    for raw in read_raw_documents(Path(args.input), source=args.source):
        doc = clean_document(raw, cleaning)
        if doc is None:
            dropped += 1
        else:
            kept.append(doc)
    write_clean_documents(kept, args.output)
    stats = corpus_stats(kept)
    _print_stats_lines(
        [
            ("documents", stats.documents),
            ("documents_dropped", dropped),
            ("paragraphs", stats.paragraphs),
            ("sentences", stats.sentences),
            ("total_chars", stats.total_chars),
        ],
        None,
    )
    return EXIT_OK


def _cmd_generate(args: argparse.Namespace) -> int:
    config = _sampling_config(args)
    if args.workers < 1:
        raise UsageError("--workers must be >= 1")
    docs = _load_documents(args)
    objectives = (
        list(ObjectiveKind) if args.objective == "all" else [ObjectiveKind(args.objective)]
    )
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    outputs = []
    for objective in objectives:
        examples = generate_examples(
            docs,
            objective,
            config,
            pool_capacity=args.pool_capacity,
            workers=args.workers,
        )
        target = out_dir / objective.value
        manifest = write_shards(
            examples,
            target,
            config,
            shard_size=args.shard_size,
            compress=args.compress,
        )
        outputs.append(str(target))
        print(
            f"{objective.value}: {len(examples)} examples "
            f"in {len(manifest.shards)} shards -> {target}"
        )
    _write_run_log(
        out_dir,
        {
            "command": "generate",
            "objectives": [o.value for o in objectives],
            "input": str(args.input),
            "outputs": outputs,
            "seed": config.global_seed,
            "sampling_config": config.as_dict(),
            "shard_size": args.shard_size,
            "compress": args.compress,
            "pool_capacity": args.pool_capacity,
            "workers": args.workers,
        },
    )
    return EXIT_OK


def _corpus_stat_lines(stats: CorpusStats) -> list[tuple[str, object]]:
    lines: list[tuple[str, object]] = [
        ("documents", stats.documents),
        ("paragraphs", stats.paragraphs),
        ("sentences", stats.sentences),
        ("total_chars", stats.total_chars),
    ]
    for source, chars in sorted(stats.chars_by_source.items()):
        lines.append((f"chars:{source}", chars))
    return lines


def _cmd_stats(args: argparse.Namespace) -> int:
    out_dir = Path(args.out_dir) if args.out_dir else None
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
    if args.corpus:
        args.input = args.corpus
        stats = corpus_stats(_load_documents(args))
        _print_stats_lines(_corpus_stat_lines(stats), out_dir / "stats.tsv" if out_dir else None)
        if out_dir is not None:
            from .report import render_corpus_figures

            render_corpus_figures(out_dir, stats)
            _write_run_log(out_dir, {"command": "stats", "corpus": str(args.corpus)})
    elif args.dataset:
        stats = dataset_stats(read_qaset(args.dataset))
        lines = [
            ("questions", stats.questions),
            ("candidates", stats.candidates),
            ("avg_candidates_per_question", f"{stats.avg_candidates_per_question:.6f}"),
        ]
        _print_stats_lines(lines, out_dir / "stats.tsv" if out_dir else None)
        if out_dir is not None:
            _write_run_log(out_dir, {"command": "stats", "dataset": str(args.dataset)})
    else:
        directory = Path(args.shards)
        manifest = read_manifest(directory)
        counted: dict[str, dict[str, int]] = {
            kind.value: {h.value: 0 for h in Hardness} | {"total": 0} for kind in ObjectiveKind
        }
        total = 0
        for record in iter_manifest_examples(manifest, directory):
            bucket = counted[record.example.objective.value]
            bucket[record.example.hardness.value] += 1
            bucket["total"] += 1
            total += 1
        if total != manifest.counts.get("total") or any(
            counted[kind] != manifest.counts.get("by_objective", {}).get(kind)
            for kind in counted
        ):
            raise ShardError(f"{directory}: shard contents do not match manifest counts")
        lines = [("total", total)]
        for kind, bucket in counted.items():
            for hardness in ("positive", "hard", "easy", "total"):
                lines.append((f"{kind}:{hardness}", bucket[hardness]))
        _print_stats_lines(lines, out_dir / "stats.tsv" if out_dir else None)
        if out_dir is not None:
            from .report import render_shard_count_figure

            render_shard_count_figure(out_dir, manifest.counts)
            _write_run_log(out_dir, {"command": "stats", "shards": str(args.shards)})
    return EXIT_OK


def _cmd_eval(args: argparse.Namespace) -> int:
    scored_path = args.scored or args.tfidf
    qaset = read_qaset(scored_path)
    if args.tfidf:
        qaset = score_qaset_tfidf(qaset)
    if not args.no_clean_filter:
        qaset = clean_filter(qaset)
    rows = per_question_metrics(qaset)
    report = summarize_metrics(rows)
    sys.stdout.write(
        f"question_count\t{report.question_count}\n"
        f"p_at_1\t{report.p_at_1:.6f}\n"
        f"map\t{report.map:.6f}\n"
        f"mrr\t{report.mrr:.6f}\n"
    )
    if args.out_dir:
        out_dir = Path(args.out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        write_report(report, out_dir / "report.tsv", rows)
        if args.tfidf:
            write_qaset(qaset, out_dir / "scored.tsv", scored=True)
        from .report import render_eval_figures

        render_eval_figures(out_dir, report, rows)
        _write_run_log(
            out_dir,
            {
                "command": "eval",
                "input": str(scored_path),
                "scorer": "tfidf" if args.tfidf else "precomputed",
                "clean_filter": not args.no_clean_filter,
                "report": report.as_dict(),
            },
        )
    return EXIT_OK


def _read_questions(path: Path) -> list[Question]:
    questions = []
    seen = set()
    with open(path, "r", encoding="utf-8") as handle:
        for line_number, line in enumerate(handle, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise RecordError(str(path), line_number, f"expected 2 columns, found {len(parts)}")
            qid, text = parts
            if qid in seen:
                raise RecordError(str(path), line_number, f"duplicate question id {qid!r}")
            seen.add(qid)
            questions.append(Question(id=qid, text=text))
    return questions


def _cmd_extract(args: argparse.Namespace) -> int:
    questions = _read_questions(Path(args.questions))
    sentences = [
        line.strip()
        for line in Path(args.sentences).read_text("utf-8").splitlines()
        if line.strip()
    ]
    stopwords = None
    if args.stopwords:
        words = {
            line.strip().lower()
            for line in Path(args.stopwords).read_text("utf-8").splitlines()
            if line.strip() and not line.startswith("#")
        }
        stopwords = frozenset(words)
    qaset = []
    total = 0
    for question in questions:
        candidates = extract_candidates(question, sentences, stopwords)
        total += len(candidates)
        if candidates:
            qaset.append((question, candidates))
    write_qaset(qaset, args.output)
    print(f"{total} candidates for {len(qaset)} of {len(questions)} questions -> {args.output}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="parapair",
        description="Sentence-pair training data pipeline and ranking evaluation.",
    )
    parser.add_argument("--version", action="version", version=f"parapair {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    clean = sub.add_parser("clean", help="clean raw documents into structured records")
    clean.add_argument("--input", required=True, metavar="PATH",
                       help="JSONL file with id/source/text records, or a directory of .txt files")
    clean.add_argument("--output", required=True, metavar="FILE")
    clean.add_argument("--source", default="unknown", help="source label for plain-text input")
    _add_cleaning_flags(clean)
    clean.set_defaults(func=_cmd_clean)

    generate = sub.add_parser("generate", help="sample labeled pairs and write shards")
    generate.add_argument("--input", required=True, metavar="FILE",
                          help="raw or cleaned document JSONL (detected automatically)")
    generate.add_argument("--out-dir", required=True, metavar="DIR",
                          help="shards land in DIR/<objective>/")
    generate.add_argument("--objective", required=True, choices=["ssp", "sp", "psd", "all"])
    generate.add_argument("--shard-size", type=int, default=DEFAULT_SHARD_SIZE, metavar="N")
    generate.add_argument("--compress", action="store_true", help="gzip shard files")
    generate.add_argument("--workers", type=int, default=1, metavar="N",
                          help="sampling processes; the output does not depend on this")
    generate.add_argument("--pool-capacity", type=int, default=DEFAULT_POOL_CAPACITY, metavar="N")
    generate.add_argument("--source", default="unknown", help=argparse.SUPPRESS)
    _add_cleaning_flags(generate)
    _add_sampling_flags(generate)
    generate.set_defaults(func=_cmd_generate)

    stats = sub.add_parser("stats", help="counts for a corpus, a dataset, or a shard directory")
    which = stats.add_mutually_exclusive_group(required=True)
    which.add_argument("--corpus", metavar="PATH")
    which.add_argument("--dataset", metavar="FILE")
    which.add_argument("--shards", metavar="DIR")
    stats.add_argument("--out-dir", default=None, metavar="DIR",
                       help="also write stats.tsv and figures here")
    stats.add_argument("--source", default="unknown", help=argparse.SUPPRESS)
    _add_cleaning_flags(stats)
    stats.set_defaults(func=_cmd_stats)

    evaluate_ = sub.add_parser("eval", help="evaluate a scored answer-ranking file")
    which = evaluate_.add_mutually_exclusive_group(required=True)
    which.add_argument("--scored", metavar="FILE",
                       help="TSV with question_id, question_text, candidate_text, label, score")
    which.add_argument("--tfidf", metavar="FILE",
                       help="labeled TSV to score with the tf-idf baseline first")
    evaluate_.add_argument("--no-clean-filter", action="store_true",
                           help="keep questions whose candidates are all positive or all negative")
    evaluate_.add_argument("--out-dir", default=None, metavar="DIR",
                           help="write report.tsv, per_question.tsv and figures here")
    evaluate_.set_defaults(func=_cmd_eval)

    extract = sub.add_parser("extract-candidates",
                             help="pair questions with sentences sharing a non-stopword")
    extract.add_argument("--questions", required=True, metavar="FILE",
                         help="TSV with question_id and question_text")
    extract.add_argument("--sentences", required=True, metavar="FILE",
                         help="one candidate sentence per line")
    extract.add_argument("--stopwords", default=None, metavar="FILE",
                         help="override the bundled stopword list")
    extract.add_argument("--output", required=True, metavar="FILE")
    extract.set_defaults(func=_cmd_extract)
    return parser


def run(argv: list[str] | None = None) -> int:
    """Parse ``argv`` and execute one subcommand; returns the exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except EncodingError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (FileNotFoundError, IsADirectoryError, NotADirectoryError, PermissionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (RecordError, ShardError, EvaluationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
