"""Answer-span decoding, post-processing and evaluation for Qur'anic extractive QA."""

__version__ = "0.1.0"

from .dataset_io import (
    GoldAnswer,
    QuestionRecord,
    RunAnswer,
    RunEntry,
    read_qrcd,
    read_run,
    read_squad_family,
    write_run,
)
from .estimator import AnswerSpanExtractor
from .metrics import EvalReport, evaluate_run, exact_match, f1_at_1, prr, token_f1
from .postprocessor import extend_answer, fuse_runs, merge_overlaps
from .question_typing import (
    PUBLISHED_STATS,
    QuestionType,
    TypeStats,
    TypeStatsTable,
    classify_question,
    compute_type_stats,
    lookup_avg_length,
)
from .recommender import append_recommendation, cosine_similarity, most_similar_verse
from .span_decoder import (
    LogitBundle,
    SpanPrediction,
    TokenizedContext,
    decode_topn,
    masked_softmax,
    span_to_text,
    tokenize_passage,
)
from .textnorm import NormalizationConfig, normalize_text

__all__ = [
    "AnswerSpanExtractor",
    "EvalReport",
    "GoldAnswer",
    "LogitBundle",
    "NormalizationConfig",
    "PUBLISHED_STATS",
    "QuestionRecord",
    "QuestionType",
    "RunAnswer",
    "RunEntry",
    "SpanPrediction",
    "TokenizedContext",
    "TypeStats",
    "TypeStatsTable",
    "append_recommendation",
    "classify_question",
    "compute_type_stats",
    "cosine_similarity",
    "decode_topn",
    "evaluate_run",
    "exact_match",
    "extend_answer",
    "f1_at_1",
    "fuse_runs",
    "lookup_avg_length",
    "masked_softmax",
    "merge_overlaps",
    "most_similar_verse",
    "normalize_text",
    "prr",
    "read_qrcd",
    "read_run",
    "read_squad_family",
    "span_to_text",
    "token_f1",
    "tokenize_passage",
    "write_run",
]
