"""scikit-learn style front end over the decoding pipeline.

``fit`` learns answer-length statistics per question type from gold records;
``predict`` turns ``(TokenizedContext, LogitBundle)`` pairs into ranked runs.
"""
from __future__ import annotations

from typing import Mapping, Sequence

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .dataset_io import QuestionRecord, RunEntry
from .errors import LengthMismatch, SchemaError
from .metrics import evaluate_run
from .pipeline import (
    decode_stage,
    postprocess_stage,
    predictions_to_run,
    recommend_stage,
)
from .question_typing import PUBLISHED_STATS, TypeStatsTable, compute_type_stats
from .span_decoder import LogitBundle, TokenizedContext


def check_logit_pairs(X) -> list[tuple[TokenizedContext, LogitBundle]]:
    """Validate an iterable of ``(context, logits)`` pairs."""
    pairs = list(X)
    seen = set()
    for item in pairs:
        if not (isinstance(item, tuple) and len(item) == 2):
            raise TypeError("X must contain (TokenizedContext, LogitBundle) pairs")
        ctx, bundle = item
        if not isinstance(ctx, TokenizedContext) or not isinstance(bundle, LogitBundle):
            raise TypeError("X must contain (TokenizedContext, LogitBundle) pairs")
        if ctx.pq_id != bundle.pq_id:
            raise SchemaError(f"context {ctx.pq_id!r} paired with logits {bundle.pq_id!r}")
        for name in ("start_logits", "end_logits"):
            vec = np.asarray(getattr(bundle, name))
            if vec.ndim != 1 or len(vec) < len(ctx):
                raise LengthMismatch(f"{ctx.pq_id}: {name} shorter than the context")
            if not np.all(np.isfinite(vec[: len(ctx)])):
                raise SchemaError(f"{ctx.pq_id}: {name} contains NaN or Inf")
        if ctx.pq_id in seen:
            raise SchemaError(f"duplicate pq_id {ctx.pq_id!r}")
        seen.add(ctx.pq_id)
    return pairs


def check_records(records) -> list[QuestionRecord]:
    records = list(records)
    for rec in records:
        if not isinstance(rec, QuestionRecord):
            raise TypeError("expected QuestionRecord instances")
        rec.validate()
    return records


class AnswerSpanExtractor(BaseEstimator):
    """Decode, length-extend, merge and optionally recommend answer spans.

    Parameters
    ----------
    n_best : int
        Candidates kept from the raw decode.
    max_span_len : int
        Longest span (in tokens) the decoder considers.
    postprocess : bool
        Apply length extension and overlap merging.
    cap : int
        Maximum answers per question after post-processing.
    length_stats : TypeStatsTable or None
        Used by ``fit`` when no records are given. ``None`` means the
        published table.
    """

    def __init__(
        self,
        n_best=5,
        max_span_len=64,
        postprocess=True,
        cap=5,
        length_stats=None,
    ):
        self.n_best = n_best
        self.max_span_len = max_span_len
        self.postprocess = postprocess
        self.cap = cap
        self.length_stats = length_stats

    def fit(self, X=None, y=None):
        if X is None:
            stats = self.length_stats if self.length_stats is not None else PUBLISHED_STATS
            if not isinstance(stats, TypeStatsTable):
                raise TypeError("length_stats must be a TypeStatsTable")
            self.type_stats_ = stats
        else:
            records = check_records(X)
            self.type_stats_ = compute_type_stats(records)
            self.questions_ = {r.pq_id: r.question for r in records}
        return self

    def _predict_spans(self, X, embeddings=None, questions=None):
        check_is_fitted(self, "type_stats_")
        pairs = check_logit_pairs(X)
        contexts = {ctx.pq_id: ctx for ctx, _ in pairs}
        preds = decode_stage(pairs, self.n_best, self.max_span_len)
        if self.postprocess:
            if questions is None:
                questions = getattr(self, "questions_", None)
            preds = postprocess_stage(preds, contexts, self.type_stats_, self.cap, questions)
        if embeddings is not None:
            preds = recommend_stage(preds, contexts, embeddings, self.cap)
        return preds

    def predict(
        self,
        X: Sequence[tuple[TokenizedContext, LogitBundle]],
        embeddings: Mapping[str, np.ndarray] | None = None,
        questions: Mapping[str, str] | None = None,
    ) -> list[RunEntry]:
        """Ranked run entries sorted by ``pq_id``.

        ``embeddings`` enables the similar-verse recommendation. ``questions``
        maps ``pq_id`` to question text for contexts that carry none.
        """
        return predictions_to_run(self._predict_spans(X, embeddings, questions))

    def predict_spans(self, X, embeddings=None, questions=None):
        return self._predict_spans(X, embeddings, questions)

    def score(self, X, y, embeddings=None) -> float:
        """Mean pRR of the predicted run against gold records ``y``."""
        gold = check_records(y)
        questions = {r.pq_id: r.question for r in gold}
        run = self.predict(X, embeddings, questions)
        return evaluate_run(run, gold).aggregate["prr"]
