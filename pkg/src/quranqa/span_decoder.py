"""Turn start/end logit vectors into a ranked list of candidate answer spans.

The model boundary is a JSON-lines logits file, one question per line::

    {"pq_id": str, "tokens": [str], "offsets": [[s, e]], "special_mask": [bool],
     "verse_end_tokens": [int], "start_logits": [float], "end_logits": [float]}

Optional keys ``passage`` and ``question`` carry the raw passage (span text
is sliced from it) and the question (used to pick an expected answer length).
When ``passage`` is absent it is rebuilt by laying tokens at their offsets.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, replace
from typing import Iterator, Sequence

import numpy as np

from .errors import (
    AllMasked,
    LengthMismatch,
    NoValidSpan,
    OutOfRange,
    ParseError,
    SchemaError,
    ValidationError,
)

DEFAULT_N = 5
DEFAULT_MAX_SPAN_LEN = 64
VERSE_STOPS = ".۔"

_TOKEN_RE = re.compile(r"[^\s.۔]+|[.۔]")


@dataclass(frozen=True)
class TokenizedContext:
    pq_id: str
    tokens: tuple[str, ...]
    char_offsets: tuple[tuple[int, int], ...]
    special_mask: tuple[bool, ...]
    verse_end_tokens: tuple[int, ...]
    passage: str = ""
    question: str | None = None

    def __post_init__(self):
        n = len(self.tokens)
        if len(self.char_offsets) != n or len(self.special_mask) != n:
            raise LengthMismatch(
                f"{self.pq_id}: tokens, offsets and special_mask must share length"
            )
        last_end = -1
        for (start, end), special in zip(self.char_offsets, self.special_mask):
            if special:
                continue
            if start < last_end or end < start:
                raise SchemaError(f"{self.pq_id}: offsets must be increasing and non-overlapping")
            last_end = end
        if list(self.verse_end_tokens) != sorted(set(self.verse_end_tokens)):
            raise SchemaError(f"{self.pq_id}: verse_end_tokens must be sorted and unique")
        if self.verse_end_tokens and not 0 <= self.verse_end_tokens[0] <= self.verse_end_tokens[-1] < n:
            raise SchemaError(f"{self.pq_id}: verse_end_tokens out of range")

    def __len__(self):
        return len(self.tokens)

    @property
    def real_indices(self) -> np.ndarray:
        return np.flatnonzero(~np.asarray(self.special_mask, dtype=bool))


@dataclass(frozen=True)
class LogitBundle:
    pq_id: str
    start_logits: np.ndarray
    end_logits: np.ndarray


@dataclass(frozen=True)
class SpanPrediction:
    start_tok: int
    end_tok: int
    score: float
    text: str
    rank: int = 0
    recommended: bool = False

    @property
    def length(self) -> int:
        return self.end_tok - self.start_tok + 1

    def overlaps(self, other: "SpanPrediction") -> bool:
        return self.start_tok <= other.end_tok and other.start_tok <= self.end_tok


def tokenize_passage(
    passage: str,
    pq_id: str = "",
    question: str | None = None,
    special_prefix: Sequence[str] = (),
) -> TokenizedContext:
    """Whitespace tokenization with verse stops split into their own tokens.

    ``special_prefix`` tokens (e.g. ``"[CLS]"``) are prepended, masked, and
    given empty ``(0, 0)`` offsets.
    """
    tokens, offsets, mask, verse_ends = [], [], [], []
    for tok in special_prefix:
        tokens.append(tok)
        offsets.append((0, 0))
        mask.append(True)
    for m in _TOKEN_RE.finditer(passage):
        if m.group() in VERSE_STOPS:
            verse_ends.append(len(tokens))
        tokens.append(m.group())
        offsets.append((m.start(), m.end()))
        mask.append(False)
    return TokenizedContext(
        pq_id, tuple(tokens), tuple(offsets), tuple(mask), tuple(verse_ends), passage, question
    )


def masked_softmax(logits, mask) -> np.ndarray:
    """Softmax over positions where ``mask`` is False; masked positions get 0."""
    logits = np.asarray(logits, dtype=np.float64)
    mask = np.asarray(mask, dtype=bool)
    if logits.shape != mask.shape:
        raise LengthMismatch(f"logits {logits.shape} and mask {mask.shape} differ")
    keep = ~mask
    if not keep.any():
        raise AllMasked("every position is masked")
    probs = np.zeros_like(logits)
    shifted = logits[keep] - logits[keep].max()
    exp = np.exp(shifted)
    probs[keep] = exp / exp.sum()
    return probs


def _clamped(ctx: TokenizedContext, logits) -> np.ndarray:
    vec = np.asarray(logits, dtype=np.float64)
    if vec.ndim != 1 or len(vec) < len(ctx):
        raise LengthMismatch(
            f"{ctx.pq_id}: logits of length {vec.shape} do not cover {len(ctx)} tokens"
        )
    # models padded past the context are clamped to its token count
    return vec[: len(ctx)]


def span_to_text(ctx: TokenizedContext, start: int, end: int) -> str:
    if not 0 <= start <= end < len(ctx):
        raise OutOfRange(f"{ctx.pq_id}: span ({start}, {end}) outside {len(ctx)} tokens")
    return ctx.passage[ctx.char_offsets[start][0] : ctx.char_offsets[end][1]]


def decode_topn(
    ctx: TokenizedContext,
    logits: LogitBundle,
    n: int = DEFAULT_N,
    max_span_len: int = DEFAULT_MAX_SPAN_LEN,
) -> list[SpanPrediction]:
    """Return the ``n`` best spans scored by ``P_start(s) * P_end(e)``.

    Candidates satisfy ``s <= e``, ``e - s + 1 <= max_span_len`` and have no
    special token at either end. Ties resolve to the earlier start, then the
    shorter span.
    """
    if n < 1 or max_span_len < 1:
        raise ValidationError("n and max_span_len must be >= 1")
    if logits.pq_id != ctx.pq_id:
        raise SchemaError(f"logits for {logits.pq_id!r} paired with context {ctx.pq_id!r}")
    mask = np.asarray(ctx.special_mask, dtype=bool)
    if mask.all():
        raise NoValidSpan(f"{ctx.pq_id}: every token is special")
    p_start = masked_softmax(_clamped(ctx, logits.start_logits), mask)
    p_end = masked_softmax(_clamped(ctx, logits.end_logits), mask)

    real = ctx.real_indices
    s_idx, e_idx = np.meshgrid(real, real, indexing="ij")
    width = e_idx - s_idx
    valid = (width >= 0) & (width < max_span_len)
    s_idx, e_idx = s_idx[valid], e_idx[valid]
    scores = p_start[s_idx] * p_end[e_idx]

    order = np.lexsort((e_idx, s_idx, -scores))[:n]
    return [
        SpanPrediction(
            int(s_idx[i]),
            int(e_idx[i]),
            float(scores[i]),
            span_to_text(ctx, int(s_idx[i]), int(e_idx[i])),
            rank,
        )
        for rank, i in enumerate(order, start=1)
    ]


def rerank(spans: Sequence[SpanPrediction]) -> list[SpanPrediction]:
    """Sort by score desc, start asc, end asc and renumber ranks from 1."""
    ordered = sorted(spans, key=lambda sp: (-sp.score, sp.start_tok, sp.end_tok))
    return [replace(sp, rank=rank) for rank, sp in enumerate(ordered, start=1)]


def _rebuild_passage(tokens, offsets, mask) -> str:
    chars: list[str] = []
    for tok, (start, end), special in zip(tokens, offsets, mask):
        if special:
            continue
        if len(chars) < start:
            chars.extend(" " * (start - len(chars)))
        if len(tok) != end - start:
            tok = tok.removeprefix("##")
        chars[start:end] = list(tok[: end - start].ljust(end - start))
    return "".join(chars)


def context_from_json(obj: dict, lineno=None) -> tuple[TokenizedContext, LogitBundle]:
    try:
        tokens = tuple(str(t) for t in obj["tokens"])
        offsets = tuple((int(s), int(e)) for s, e in obj["offsets"])
        mask = tuple(bool(b) for b in obj["special_mask"])
        passage = obj.get("passage")
        if passage is None:
            passage = _rebuild_passage(tokens, offsets, mask)
        ctx = TokenizedContext(
            pq_id=str(obj["pq_id"]),
            tokens=tokens,
            char_offsets=offsets,
            special_mask=mask,
            verse_end_tokens=tuple(int(i) for i in obj.get("verse_end_tokens", ())),
            passage=passage,
            question=obj.get("question"),
        )
        bundle = LogitBundle(
            ctx.pq_id,
            np.asarray(obj["start_logits"], dtype=np.float64),
            np.asarray(obj["end_logits"], dtype=np.float64),
        )
    except ValidationError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed logits record: {exc!r}", lineno) from exc
    _clamped(ctx, bundle.start_logits)
    _clamped(ctx, bundle.end_logits)
    return ctx, bundle


def context_to_json(ctx: TokenizedContext, bundle: LogitBundle) -> dict:
    obj = {
        "pq_id": ctx.pq_id,
        "tokens": list(ctx.tokens),
        "offsets": [list(o) for o in ctx.char_offsets],
        "special_mask": list(ctx.special_mask),
        "verse_end_tokens": list(ctx.verse_end_tokens),
        "start_logits": [float(x) for x in bundle.start_logits],
        "end_logits": [float(x) for x in bundle.end_logits],
        "passage": ctx.passage,
    }
    if ctx.question is not None:
        obj["question"] = ctx.question
    return obj


def iter_logits_file(path) -> Iterator[tuple[TokenizedContext, LogitBundle]]:
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"invalid JSON ({exc.msg})", lineno) from exc
            yield context_from_json(obj, lineno)


def read_logits_file(path) -> dict[str, tuple[TokenizedContext, LogitBundle]]:
    out = {}
    for ctx, bundle in iter_logits_file(path):
        if ctx.pq_id in out:
            raise SchemaError(f"duplicate pq_id {ctx.pq_id!r} in logits file")
        out[ctx.pq_id] = (ctx, bundle)
    return out


def write_logits_file(items, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for ctx, bundle in items:
            fh.write(json.dumps(context_to_json(ctx, bundle), ensure_ascii=False) + "\n")
