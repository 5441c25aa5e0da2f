"""Per-question pipeline stages shared by the estimator and the CLI.

Each stage maps ``{pq_id: [SpanPrediction]}`` to the same shape so stages
chain identically whether run in one process or through run files.
"""
from __future__ import annotations

from typing import Mapping, Sequence

from .dataset_io import RunAnswer, RunEntry
from .errors import RunValidationError, SchemaError
from .postprocessor import DEFAULT_CAP, fuse_runs, postprocess
from .question_typing import TypeStatsTable, classify_question, lookup_avg_length
from .recommender import recommend_for_context
from .span_decoder import (
    DEFAULT_MAX_SPAN_LEN,
    DEFAULT_N,
    LogitBundle,
    SpanPrediction,
    TokenizedContext,
    decode_topn,
)

Contexts = Mapping[str, TokenizedContext]
Predictions = dict[str, list[SpanPrediction]]


def spans_to_entry(pq_id: str, spans: Sequence[SpanPrediction]) -> RunEntry:
    return RunEntry(
        pq_id,
        tuple(
            RunAnswer(sp.text, sp.rank, sp.score, sp.start_tok, sp.end_tok, sp.recommended)
            for sp in spans
        ),
    )


def entry_to_spans(entry: RunEntry) -> list[SpanPrediction]:
    spans = []
    for ans in entry.answers:
        if ans.start_tok is None or ans.end_tok is None:
            raise RunValidationError(
                f"{entry.pq_id}: run answers need start_tok/end_tok for this stage"
            )
        spans.append(
            SpanPrediction(
                int(ans.start_tok), int(ans.end_tok), ans.score, ans.text, ans.rank, ans.recommended
            )
        )
    return spans


def run_to_predictions(entries: Sequence[RunEntry]) -> Predictions:
    return {e.pq_id: entry_to_spans(e) for e in entries}


def predictions_to_run(preds: Mapping[str, Sequence[SpanPrediction]]) -> list[RunEntry]:
    return [spans_to_entry(pq_id, preds[pq_id]) for pq_id in sorted(preds)]


def _context(contexts: Contexts, pq_id: str) -> TokenizedContext:
    try:
        return contexts[pq_id]
    except KeyError:
        raise SchemaError(f"no tokenized context for {pq_id!r}") from None


def decode_stage(
    items: Sequence[tuple[TokenizedContext, LogitBundle]],
    n: int = DEFAULT_N,
    max_span_len: int = DEFAULT_MAX_SPAN_LEN,
) -> Predictions:
    return {ctx.pq_id: decode_topn(ctx, bundle, n, max_span_len) for ctx, bundle in items}


def expected_length(ctx: TokenizedContext, stats: TypeStatsTable, questions=None) -> int:
    question = ctx.question
    if question is None and questions is not None:
        question = questions.get(ctx.pq_id)
    qtype = classify_question(question) if question is not None else None
    return lookup_avg_length(qtype, stats)


def postprocess_stage(
    preds: Predictions,
    contexts: Contexts,
    stats: TypeStatsTable,
    cap: int = DEFAULT_CAP,
    questions: Mapping[str, str] | None = None,
) -> Predictions:
    out = {}
    for pq_id in sorted(preds):
        ctx = _context(contexts, pq_id)
        out[pq_id] = postprocess(preds[pq_id], ctx, expected_length(ctx, stats, questions), cap)
    return out


def recommend_stage(
    preds: Predictions, contexts: Contexts, store, cap: int = DEFAULT_CAP
) -> Predictions:
    return {
        pq_id: recommend_for_context(preds[pq_id], _context(contexts, pq_id), store, cap)
        for pq_id in sorted(preds)
    }


def fuse_stage(
    preds_a: Predictions, preds_b: Predictions, contexts: Contexts, cap: int = DEFAULT_CAP
) -> Predictions:
    out = {}
    for pq_id in sorted(set(preds_a) | set(preds_b)):
        ctx = _context(contexts, pq_id)
        out[pq_id] = fuse_runs(preds_a.get(pq_id, []), preds_b.get(pq_id, []), ctx, cap)
    return out
