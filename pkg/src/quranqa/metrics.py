"""Token F1, Exact Match, F1@1 and partial Reciprocal Rank over ranked answer runs."""
from __future__ import annotations

import csv
import io
import json
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .dataset_io import MAX_ANSWERS, QuestionRecord, RunEntry
from .errors import UnknownId
from .textnorm import NormalizationConfig, normalize_text

# Latin tokens survive so scoring works on any script.
METRIC_NORMALIZATION = NormalizationConfig(strip_non_arabic=False)


def normalize_answer(text: str) -> str:
    return normalize_text(text, METRIC_NORMALIZATION)


def default_tokenizer(text: str) -> list[str]:
    return normalize_answer(text).split()


def token_f1(pred: str, gold: str, tokenizer: Callable[[str], list[str]] = default_tokenizer) -> float:
    pred_toks, gold_toks = tokenizer(pred), tokenizer(gold)
    if not pred_toks or not gold_toks:
        return 0.0
    common = Counter(pred_toks) & Counter(gold_toks)
    same = sum(common.values())
    if same == 0:
        return 0.0
    precision = same / len(pred_toks)
    recall = same / len(gold_toks)
    return 2 * precision * recall / (precision + recall)


def best_f1(pred: str, golds: Sequence[str], tokenizer=default_tokenizer) -> float:
    return max((token_f1(pred, g, tokenizer) for g in golds), default=0.0)


def exact_match(pred: str, golds: Sequence[str]) -> int:
    norm = normalize_answer(pred)
    if not norm:
        return 0
    return int(any(norm == normalize_answer(g) for g in golds))


def f1_at_1(ranked: Sequence[str], golds: Sequence[str], tokenizer=default_tokenizer) -> float:
    if not ranked:
        return 0.0
    return best_f1(ranked[0], golds, tokenizer)


def prr(ranked: Sequence[str], golds: Sequence[str], tokenizer=default_tokenizer) -> float:
    """F1 of the first answer with any token overlap, divided by its rank.

    Only the first five answers are considered.
    """
    for rank, answer in enumerate(ranked[:MAX_ANSWERS], start=1):
        score = best_f1(answer, golds, tokenizer)
        if score > 0:
            return score / rank
    return 0.0


@dataclass
class EvalReport:
    per_question: dict[str, dict[str, float]]
    aggregate: dict[str, float]
    n_questions: int
    missing: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "aggregate": self.aggregate,
            "n_questions": self.n_questions,
            "missing": self.missing,
            "per_question": self.per_question,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), ensure_ascii=False, indent=2, sort_keys=True) + "\n"

    def csv_row(self, label: str = "run") -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["run", "pRR", "Exact Match", "F1@1"])
        agg = self.aggregate
        writer.writerow([label, f"{agg['prr']:.3f}", f"{agg['em']:.3f}", f"{agg['f1_at_1']:.3f}"])
        return buf.getvalue()


def score_question(ranked: Sequence[str], golds: Sequence[str]) -> dict[str, float]:
    top = ranked[0] if ranked else ""
    return {
        "prr": prr(ranked, golds),
        "em": float(exact_match(top, golds)) if ranked else 0.0,
        "f1_at_1": f1_at_1(ranked, golds),
    }


def evaluate_run(run: Sequence[RunEntry], gold: Sequence[QuestionRecord]) -> EvalReport:
    """Score every gold question; gold questions absent from the run score 0."""
    answers = {e.pq_id: [a.text for a in sorted(e.answers, key=lambda a: a.rank)] for e in run}
    gold_ids = {r.pq_id for r in gold}
    unknown = sorted(set(answers) - gold_ids)
    if unknown:
        raise UnknownId(f"run contains ids absent from gold: {unknown[:5]}")

    per_question, missing = {}, []
    for rec in sorted(gold, key=lambda r: r.pq_id):
        golds = [a.text for a in rec.answers]
        if rec.pq_id not in answers:
            missing.append(rec.pq_id)
        per_question[rec.pq_id] = score_question(answers.get(rec.pq_id, []), golds)

    n = len(per_question)
    aggregate = {
        key: (math.fsum(q[key] for q in per_question.values()) / n if n else 0.0)
        for key in ("prr", "em", "f1_at_1")
    }
    return EvalReport(per_question, aggregate, n, missing)
