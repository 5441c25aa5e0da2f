"""Append the verse most similar to the question as a low-priority answer.

Embeddings are produced upstream and read from JSON lines::

    {"id": "<pq_id>", "vector": [...]}        question
    {"id": "<pq_id>#v<k>", "vector": [...]}   k-th verse of the passage, k from 1
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import DimensionMismatch, ParseError, SchemaError, ZeroVector
from .postprocessor import DEFAULT_CAP, answer_text
from .span_decoder import SpanPrediction, TokenizedContext


@dataclass(frozen=True)
class EmbeddingVector:
    id: str
    values: np.ndarray


def _as_array(v) -> np.ndarray:
    if isinstance(v, EmbeddingVector):
        v = v.values
    return np.asarray(v, dtype=np.float64)


def cosine_similarity(u, v) -> float:
    u, v = _as_array(u), _as_array(v)
    if u.shape != v.shape:
        raise DimensionMismatch(f"dimensions differ: {u.shape} vs {v.shape}")
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0 or nv == 0:
        raise ZeroVector("cosine similarity is undefined for a zero vector")
    return float(np.clip(np.dot(u, v) / (nu * nv), -1.0, 1.0))


def most_similar_verse(question_vec, verse_vecs: Sequence) -> int:
    """Index of the verse with the highest cosine similarity; lowest index on ties."""
    if not verse_vecs:
        raise ValueError("need at least one verse vector")
    sims = [cosine_similarity(question_vec, v) for v in verse_vecs]
    return int(np.argmax(sims))


def verse_spans(ctx: TokenizedContext) -> list[tuple[int, int]]:
    """Token span of each verse, bounded by the verse-stop tokens.

    A stop that is a bare punctuation token is excluded from its verse; a
    stop fused onto the last word keeps that word. Verses with no real
    tokens are skipped.
    """
    real = ctx.real_indices
    spans = []
    prev = -1
    bounds = list(ctx.verse_end_tokens)
    if len(real) and (not bounds or bounds[-1] < real[-1]):
        bounds.append(int(real[-1]) + 1)  # trailing verse without a stop
    for end in bounds:
        last = end
        if end < len(ctx) and ctx.tokens[end].strip(". ۔") == "":
            last = end - 1
        elif end >= len(ctx):
            last = end - 1
        inside = real[(real > prev) & (real <= last)]
        if len(inside):
            spans.append((int(inside[0]), int(inside[-1])))
        prev = end
    return spans


def append_recommendation(
    answers: Sequence[SpanPrediction],
    verse_span: SpanPrediction,
    cap: int = DEFAULT_CAP,
) -> list[SpanPrediction]:
    """Append ``verse_span`` last with score 0 unless the list is full or it overlaps."""
    answers = list(answers)
    if len(answers) >= cap:
        return answers
    if any(verse_span.overlaps(a) for a in answers):
        return answers
    return answers + [
        SpanPrediction(
            verse_span.start_tok,
            verse_span.end_tok,
            0.0,
            verse_span.text,
            rank=len(answers) + 1,
            recommended=True,
        )
    ]


def recommend_for_context(
    answers: Sequence[SpanPrediction],
    ctx: TokenizedContext,
    store: Mapping[str, np.ndarray],
    cap: int = DEFAULT_CAP,
) -> list[SpanPrediction]:
    """Look up the question and verse embeddings of ``ctx`` and apply the recommendation.

    Questions without a question vector or verse vectors are returned unchanged.
    """
    qvec = store.get(ctx.pq_id)
    spans = verse_spans(ctx)
    verse_vecs = [store.get(f"{ctx.pq_id}#v{k}") for k in range(1, len(spans) + 1)]
    if qvec is None or not spans or any(v is None for v in verse_vecs):
        return list(answers)
    best = most_similar_verse(qvec, verse_vecs)
    start, end = spans[best]
    candidate = SpanPrediction(start, end, 0.0, answer_text(ctx, start, end))
    return append_recommendation(answers, candidate, cap)


def read_embeddings(path) -> dict[str, np.ndarray]:
    store: dict[str, np.ndarray] = {}
    dim = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                key, vec = str(obj["id"]), np.asarray(obj["vector"], dtype=np.float64)
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise ParseError(f"malformed embedding record: {exc}", lineno) from exc
            if vec.ndim != 1 or not np.all(np.isfinite(vec)):
                raise SchemaError(f"line {lineno}: vector must be 1-d and finite")
            if dim is None:
                dim = vec.shape[0]
            elif vec.shape[0] != dim:
                raise DimensionMismatch(f"line {lineno}: dimension {vec.shape[0]} != {dim}")
            if key in store:
                raise SchemaError(f"line {lineno}: duplicate id {key!r}")
            store[key] = vec
    return store
