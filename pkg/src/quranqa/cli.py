"""Command-line front end.

Every subcommand is a pure function of its input files and flags; outputs
are sorted by ``pq_id`` so repeated runs are byte-identical.

Exit codes: 0 success, 2 validation error, 3 I/O error.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .dataset_io import dumps_run, read_qrcd, read_run, read_squad_family, write_qrcd
from .errors import EmptyField, ValidationError
from .metrics import evaluate_run
from .pipeline import (
    decode_stage,
    fuse_stage,
    postprocess_stage,
    predictions_to_run,
    recommend_stage,
    run_to_predictions,
)
from .question_typing import PUBLISHED_STATS, TypeStatsTable, compute_type_stats
from .recommender import read_embeddings
from .span_decoder import DEFAULT_MAX_SPAN_LEN, DEFAULT_N, read_logits_file
from .textnorm import (
    NormalizationConfig,
    block_from_record,
    split_corpus,
    write_corpus,
)

logger = logging.getLogger("quranqa")

EXIT_OK, EXIT_VALIDATION, EXIT_IO = 0, 2, 3

DEFAULTS = {
    "n": DEFAULT_N,
    "max_span_len": DEFAULT_MAX_SPAN_LEN,
    "cap": 5,
    "seed": 0,
    "train_fraction": 0.8,
    "stats": None,
    "embeddings": None,
}


def _resolve(args, key):
    """CLI flag beats config file beats built-in default."""
    value = getattr(args, key, None)
    if value is not None:
        return value
    if key in args.config_values:
        return args.config_values[key]
    return DEFAULTS.get(key)


def _emit(text: str, out) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _load_stats(args) -> TypeStatsTable:
    path = _resolve(args, "stats")
    return TypeStatsTable.load(path) if path else PUBLISHED_STATS


def _load_questions(args):
    if not getattr(args, "dataset", None):
        return None
    return {r.pq_id: r.question for r in read_qrcd(args.dataset)}


def _contexts(path):
    return {pq_id: ctx for pq_id, (ctx, _) in read_logits_file(path).items()}


def cmd_decode(args) -> int:
    items = list(read_logits_file(args.logits).values())
    preds = decode_stage(items, int(_resolve(args, "n")), int(_resolve(args, "max_span_len")))
    _emit(dumps_run(predictions_to_run(preds)), args.out)
    return EXIT_OK


def cmd_postprocess(args) -> int:
    preds = run_to_predictions(read_run(args.run))
    preds = postprocess_stage(
        preds, _contexts(args.logits), _load_stats(args), int(_resolve(args, "cap")),
        _load_questions(args),
    )
    _emit(dumps_run(predictions_to_run(preds)), args.out)
    return EXIT_OK


def cmd_recommend(args) -> int:
    emb_path = _resolve(args, "embeddings")
    if not emb_path:
        raise ValidationError("recommend needs --embeddings")
    preds = run_to_predictions(read_run(args.run))
    preds = recommend_stage(
        preds, _contexts(args.logits), read_embeddings(emb_path), int(_resolve(args, "cap"))
    )
    _emit(dumps_run(predictions_to_run(preds)), args.out)
    return EXIT_OK


def cmd_fuse(args) -> int:
    preds = fuse_stage(
        run_to_predictions(read_run(args.run_a)),
        run_to_predictions(read_run(args.run_b)),
        _contexts(args.logits),
        int(_resolve(args, "cap")),
    )
    _emit(dumps_run(predictions_to_run(preds)), args.out)
    return EXIT_OK


def cmd_run_all(args) -> int:
    logits = read_logits_file(args.logits)
    contexts = {k: ctx for k, (ctx, _) in logits.items()}
    preds = decode_stage(
        list(logits.values()), int(_resolve(args, "n")), int(_resolve(args, "max_span_len"))
    )
    cap = int(_resolve(args, "cap"))
    preds = postprocess_stage(preds, contexts, _load_stats(args), cap, _load_questions(args))
    emb_path = _resolve(args, "embeddings")
    if emb_path:
        preds = recommend_stage(preds, contexts, read_embeddings(emb_path), cap)
    run = predictions_to_run(preds)
    _emit(dumps_run(run), args.out)
    if args.gold:
        report = evaluate_run(run, read_qrcd(args.gold))
        if args.report:
            Path(args.report).write_text(report.dumps(), encoding="utf-8")
        sys.stderr.write(report.csv_row(Path(args.logits).stem))
    return EXIT_OK


def _read_dataset(path, fmt):
    if fmt == "qrcd":
        return read_qrcd(path)
    records, dropped = read_squad_family(path, fmt)
    if dropped:
        sys.stderr.write(f"dropped {dropped} unanswerable questions\n")
    return records


def cmd_stats(args) -> int:
    stats = compute_type_stats(_read_dataset(args.dataset, args.format))
    if args.out:
        stats.save(args.out)
    sys.stdout.write(stats.format_table() + "\n")
    return EXIT_OK


def cmd_convert(args) -> int:
    records = _read_dataset(args.input, args.format)
    if args.out:
        write_qrcd(records, args.out)
    else:
        for rec in records:
            sys.stdout.write(json.dumps(rec.to_json(), ensure_ascii=False) + "\n")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    report = evaluate_run(read_run(args.run), read_qrcd(args.gold))
    if args.out:
        Path(args.out).write_text(report.dumps(), encoding="utf-8")
    if report.missing:
        sys.stderr.write(f"{len(report.missing)} gold questions missing from run, scored 0\n")
    if args.csv:
        sys.stdout.write(report.csv_row(Path(args.run).stem))
    elif not args.out:
        sys.stdout.write(report.dumps())
    else:
        agg = report.aggregate
        sys.stdout.write(
            f"pRR={agg['prr']:.3f} EM={agg['em']:.3f} F1@1={agg['f1_at_1']:.3f} "
            f"n={report.n_questions}\n"
        )
    return EXIT_OK


def cmd_corpus(args) -> int:
    cfg = NormalizationConfig(
        strip_diacritics=not args.keep_diacritics,
        strip_punctuation=not args.keep_punctuation,
        strip_non_arabic=not args.keep_non_arabic,
        collapse_whitespace=True,
    )
    blocks, skipped = [], 0
    with open(args.input, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                blocks.append(block_from_record(json.loads(line), cfg))
            except EmptyField as exc:
                skipped += 1
                logger.debug("line %d skipped: %s", lineno, exc)
            except json.JSONDecodeError as exc:
                raise ValidationError(f"line {lineno}: invalid JSON ({exc.msg})") from exc
    train, valid = split_corpus(
        blocks, float(_resolve(args, "train_fraction")), int(_resolve(args, "seed"))
    )
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_corpus(train, out / "train.txt", out / "train.manifest.jsonl")
    write_corpus(valid, out / "valid.txt", out / "valid.manifest.jsonl")
    sys.stdout.write(f"train={len(train)} valid={len(valid)} skipped={skipped}\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="quranqa", description="Answer-span decoding and evaluation for Qur'anic QA."
    )
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("--config", help="JSON file with default flag values")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        p = sub.add_parser(name, help=help_)
        p.set_defaults(func=func)
        return p

    def decode_flags(p):
        p.add_argument("--n", type=int, help="candidates per question (default 5)")
        p.add_argument("--max-span-len", dest="max_span_len", type=int,
                       help="longest span in tokens (default 64)")

    def cap_flag(p):
        p.add_argument("--cap", type=int, help="maximum answers per question (default 5)")

    p = add("decode", cmd_decode, "decode a logits file into a raw run")
    p.add_argument("--logits", required=True)
    p.add_argument("--out")
    decode_flags(p)

    p = add("postprocess", cmd_postprocess, "length-extend and merge a run")
    p.add_argument("--run", required=True)
    p.add_argument("--logits", required=True)
    p.add_argument("--stats", help="stats JSON (default: published table)")
    p.add_argument("--dataset", help="QRCD file supplying question text")
    p.add_argument("--out")
    cap_flag(p)

    p = add("recommend", cmd_recommend, "append the most similar verse")
    p.add_argument("--run", required=True)
    p.add_argument("--logits", required=True)
    p.add_argument("--embeddings")
    p.add_argument("--out")
    cap_flag(p)

    p = add("fuse", cmd_fuse, "fuse two runs over the same questions")
    p.add_argument("--run-a", dest="run_a", required=True)
    p.add_argument("--run-b", dest="run_b", required=True)
    p.add_argument("--logits", required=True)
    p.add_argument("--out")
    cap_flag(p)

    p = add("run-all", cmd_run_all, "decode, postprocess and recommend in one go")
    p.add_argument("--logits", required=True)
    p.add_argument("--stats")
    p.add_argument("--dataset")
    p.add_argument("--embeddings")
    p.add_argument("--gold", help="QRCD file to score the run against")
    p.add_argument("--report", help="where to write the evaluation report")
    p.add_argument("--out")
    decode_flags(p)
    cap_flag(p)

    p = add("stats", cmd_stats, "question-type answer-length statistics")
    p.add_argument("--dataset", required=True)
    p.add_argument("--format", default="qrcd", choices=["qrcd", "squad", "mlqa", "xquad"])
    p.add_argument("--out")

    p = add("convert", cmd_convert, "harmonize a SQuAD-family file into QRCD records")
    p.add_argument("--input", required=True)
    p.add_argument("--format", default="squad", choices=["qrcd", "squad", "mlqa", "xquad"])
    p.add_argument("--out")

    p = add("evaluate", cmd_evaluate, "score a run with pRR, EM and F1@1")
    p.add_argument("--run", required=True)
    p.add_argument("--gold", required=True)
    p.add_argument("--out")
    p.add_argument("--csv", action="store_true", help="print a one-row CSV summary")

    p = add("corpus", cmd_corpus, "clean raw records into a pretraining corpus")
    p.add_argument("--input", required=True, help="JSON lines with a 'kind' key")
    p.add_argument("--out-dir", dest="out_dir", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--train-fraction", dest="train_fraction", type=float)
    p.add_argument("--keep-diacritics", action="store_true")
    p.add_argument("--keep-punctuation", action="store_true")
    p.add_argument("--keep-non-arabic", action="store_true")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        args.config_values = {}
        if args.config:
            args.config_values = json.loads(Path(args.config).read_text(encoding="utf-8"))
            if not isinstance(args.config_values, dict):
                raise ValidationError("config file must hold a JSON object")
        return args.func(args)
    except (ValidationError, json.JSONDecodeError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_VALIDATION
    except OSError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
