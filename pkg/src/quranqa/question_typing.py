"""Interrogative-pronoun question types and per-type answer-length statistics."""
from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from math import floor
from pathlib import Path
from typing import Callable, Iterable, Sequence

from .errors import EmptyDataset, MissingStats, SchemaError
from .textnorm import NormalizationConfig, normalize_text

# Questions keep non-Arabic digits but lose diacritics and punctuation.
QUESTION_NORMALIZATION = NormalizationConfig(strip_non_arabic=False)


class QuestionType(enum.Enum):
    WHEN_HOWMUCH = "WHEN_HOWMUCH"
    WHO = "WHO"
    WHAT = "WHAT"
    WHICH = "WHICH"
    WHY = "WHY"
    POLAR = "POLAR"
    WHERE = "WHERE"
    HOW = "HOW"


FALLBACK_TYPE = QuestionType.WHAT

# Whole-token surface forms, clitic-fused variants spelled as single tokens.
# Multi-word clusters ("ضد من", "في كم") resolve through their pronoun token.
PRONOUNS: dict[QuestionType, tuple[str, ...]] = {
    QuestionType.WHEN_HOWMUCH: ("متى", "ومتى", "كم", "وكم", "بكم"),
    QuestionType.WHO: ("من", "ومن", "لمن", "عمن", "ممن", "بمن", "مع"),
    QuestionType.WHAT: ("ما", "وما", "فما", "ماهي", "ماهو", "ماذا", "وماذا", "بماذا"),
    QuestionType.WHICH: ("أي", "اي", "بأي", "باي", "وأي", "لأي"),
    QuestionType.WHY: ("لماذا", "ولماذا", "فلماذا"),
    QuestionType.POLAR: ("هل", "وهل", "فهل"),
    QuestionType.WHERE: ("أين", "اين", "وأين"),
    QuestionType.HOW: ("كيف", "وكيف", "فكيف"),
}

_LOOKUP = {form: qtype for qtype, forms in PRONOUNS.items() for form in forms}


def whitespace_tokenize(text: str) -> list[str]:
    return normalize_text(text, QUESTION_NORMALIZATION).split()


def classify_question(question: str) -> QuestionType:
    """Type of the earliest token that is a known interrogative form."""
    for token in whitespace_tokenize(question):
        qtype = _LOOKUP.get(token)
        if qtype is not None:
            return qtype
    return FALLBACK_TYPE


def _round_half_up(x: float) -> int:
    return int(floor(x + 0.5))


@dataclass(frozen=True)
class TypeStats:
    type: QuestionType
    count: int
    min_len: int
    avg_len: int
    max_len: int

    def to_json(self) -> dict:
        return {
            "type": self.type.value,
            "count": self.count,
            "min": self.min_len,
            "avg": self.avg_len,
            "max": self.max_len,
        }


@dataclass(frozen=True)
class TypeStatsTable:
    """Per-type rows plus the global average used for untyped lookups."""

    rows: tuple[TypeStats, ...]
    global_avg: int

    def get(self, qtype) -> TypeStats | None:
        for row in self.rows:
            if row.type == qtype:
                return row
        return None

    def __iter__(self):
        return iter(self.rows)

    def __len__(self):
        return len(self.rows)

    def to_json(self) -> list[dict]:
        out = [row.to_json() for row in self.rows]
        out.append({"type": "ALL", "avg": self.global_avg})
        return out

    @classmethod
    def from_json(cls, rows: Sequence[dict]) -> "TypeStatsTable":
        parsed, global_avg = [], None
        try:
            for row in rows:
                if row["type"] == "ALL":
                    global_avg = int(row["avg"])
                    continue
                parsed.append(
                    TypeStats(
                        QuestionType(row["type"]),
                        int(row["count"]),
                        int(row["min"]),
                        int(row["avg"]),
                        int(row["max"]),
                    )
                )
        except (KeyError, ValueError, TypeError) as exc:
            raise SchemaError(f"malformed stats row: {exc}") from exc
        if global_avg is None:
            global_avg = _weighted_avg(parsed)
        return cls(tuple(parsed), global_avg)

    def save(self, path) -> None:
        Path(path).write_text(
            json.dumps(self.to_json(), ensure_ascii=False, indent=2) + "\n", encoding="utf-8"
        )

    @classmethod
    def load(cls, path) -> "TypeStatsTable":
        return cls.from_json(json.loads(Path(path).read_text(encoding="utf-8")))

    def format_table(self) -> str:
        lines = [f"{'type':<14}{'N':>6}{'min':>6}{'avg':>6}{'max':>6}"]
        for row in self.rows:
            lines.append(
                f"{row.type.value:<14}{row.count:>6}{row.min_len:>6}{row.avg_len:>6}{row.max_len:>6}"
            )
        lines.append(f"{'ALL':<14}{sum(r.count for r in self.rows):>6}{'':>6}{self.global_avg:>6}")
        return "\n".join(lines)


def _weighted_avg(rows):
    total = sum(r.count for r in rows)
    if not total:
        return 1
    return _round_half_up(sum(r.avg_len * r.count for r in rows) / total)


def compute_type_stats(
    records: Iterable,
    tokenizer: Callable[[str], list[str]] = whitespace_tokenize,
) -> TypeStatsTable:
    """Answer-length statistics (in tokens) grouped by question type.

    ``count`` is the number of questions; lengths range over every gold
    answer. Averages are rounded half-up to whole tokens.
    """
    per_type: dict[QuestionType, tuple[int, list[int]]] = {}
    all_lengths: list[int] = []
    for rec in records:
        if not rec.answers:
            raise EmptyDataset(f"{rec.pq_id}: record has no gold answers")
        qtype = classify_question(rec.question)
        n, lengths = per_type.get(qtype, (0, []))
        new = [len(tokenizer(a.text)) for a in rec.answers]
        per_type[qtype] = (n + 1, lengths + new)
        all_lengths.extend(new)
    if not per_type:
        raise EmptyDataset("no records to compute statistics from")

    rows = []
    for qtype in QuestionType:
        if qtype not in per_type:
            continue
        n, lengths = per_type[qtype]
        rows.append(
            TypeStats(
                qtype,
                n,
                min(lengths),
                _round_half_up(sum(lengths) / len(lengths)),
                max(lengths),
            )
        )
    return TypeStatsTable(tuple(rows), _round_half_up(sum(all_lengths) / len(all_lengths)))


def lookup_avg_length(qtype, stats: TypeStatsTable) -> int:
    """Average answer length for ``qtype``; the global average otherwise."""
    if not stats.rows:
        raise MissingStats("statistics table is empty")
    row = stats.get(qtype)
    if row is not None and row.count > 0:
        return row.avg_len
    return stats.global_avg


def _row(qtype, n, lo, avg, hi):
    return TypeStats(qtype, n, lo, avg, hi)


# Published Farasa-token statistics over QRCD train+dev, usable as a default
# when no dataset is at hand. The "Where" row glossing بأي/أي is WHICH here.
PUBLISHED_STATS = TypeStatsTable(
    (
        _row(QuestionType.WHEN_HOWMUCH, 56, 1, 10, 55),
        _row(QuestionType.WHO, 255, 1, 6, 58),
        _row(QuestionType.WHAT, 387, 1, 8, 225),
        _row(QuestionType.WHICH, 1, 12, 12, 12),
        _row(QuestionType.WHY, 100, 1, 10, 32),
        _row(QuestionType.POLAR, 174, 1, 12, 62),
        _row(QuestionType.WHERE, 2, 1, 2, 3),
        _row(QuestionType.HOW, 14, 3, 11, 27),
    ),
    global_avg=9,
)
