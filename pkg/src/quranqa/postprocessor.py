"""Length extension by question type, overlap merging and run fusion."""
from __future__ import annotations

from dataclasses import replace
from typing import Sequence

import numpy as np

from .span_decoder import VERSE_STOPS, SpanPrediction, TokenizedContext, rerank, span_to_text

DEFAULT_CAP = 5


def answer_text(ctx: TokenizedContext, start: int, end: int) -> str:
    """Passage text of a span, minus the verse stop when it ends on one."""
    text = span_to_text(ctx, start, end)
    if end in ctx.verse_end_tokens:
        text = text.rstrip().rstrip(VERSE_STOPS).rstrip()
    return text


def _next_verse_end(ctx: TokenizedContext, tok: int) -> int | None:
    idx = int(np.searchsorted(ctx.verse_end_tokens, tok, side="left"))
    if idx < len(ctx.verse_end_tokens):
        return ctx.verse_end_tokens[idx]
    return None


def extend_answer(span: SpanPrediction, ctx: TokenizedContext, avg_len: int) -> SpanPrediction:
    """Grow a short span forward to ``avg_len`` tokens or the next verse end.

    Whichever bound comes first wins; the span never passes the last real
    token and never moves its start.
    """
    if avg_len < 1:
        raise ValueError("avg_len must be >= 1")
    if span.length >= avg_len:
        return span
    bound = span.start_tok + avg_len - 1
    verse_end = _next_verse_end(ctx, span.end_tok)
    if verse_end is not None:
        bound = min(bound, verse_end)
    real = ctx.real_indices
    # land on the last real token inside the bound
    candidates = real[(real >= span.end_tok) & (real <= bound)]
    new_end = int(candidates[-1]) if len(candidates) else span.end_tok
    if new_end == span.end_tok:
        return span
    return replace(span, end_tok=new_end, text=answer_text(ctx, span.start_tok, new_end))


def merge_overlaps(spans: Sequence[SpanPrediction], ctx: TokenizedContext) -> list[SpanPrediction]:
    """Union spans sharing at least one token into (min start, max end).

    A merged span keeps the best constituent score, and is only flagged
    ``recommended`` if every constituent was. Adjacent spans stay separate.
    """
    if not spans:
        return []
    ordered = sorted(spans, key=lambda sp: (sp.start_tok, sp.end_tok))
    groups: list[list[SpanPrediction]] = [[ordered[0]]]
    group_end = ordered[0].end_tok
    for sp in ordered[1:]:
        if sp.start_tok <= group_end:
            groups[-1].append(sp)
            group_end = max(group_end, sp.end_tok)
        else:
            groups.append([sp])
            group_end = sp.end_tok

    merged = []
    for group in groups:
        if len(group) == 1:
            merged.append(group[0])
            continue
        start = group[0].start_tok
        end = max(sp.end_tok for sp in group)
        merged.append(
            SpanPrediction(
                start,
                end,
                max(sp.score for sp in group),
                answer_text(ctx, start, end),
                recommended=all(sp.recommended for sp in group),
            )
        )
    return rerank(merged)


def fuse_runs(
    run_a: Sequence[SpanPrediction],
    run_b: Sequence[SpanPrediction],
    ctx: TokenizedContext,
    cap: int = DEFAULT_CAP,
) -> list[SpanPrediction]:
    """Pool two runs for the same question, merge overlaps, keep the best ``cap``."""
    return rerank(merge_overlaps(list(run_a) + list(run_b), ctx)[:cap])


def postprocess(
    spans: Sequence[SpanPrediction],
    ctx: TokenizedContext,
    avg_len: int,
    cap: int = DEFAULT_CAP,
) -> list[SpanPrediction]:
    """Extend every span, merge the overlaps this creates, truncate to ``cap``."""
    extended = [extend_answer(sp, ctx, avg_len) for sp in spans]
    return rerank(merge_overlaps(extended, ctx)[:cap])
