"""QRCD-style records, SQuAD-family harmonization and run files.

Record schema (JSON lines, one question per line)::

    {"pq_id": str, "passage": str, "question": str,
     "answers": [{"text": str, "start_char": int}, ...]}

Extra keys (surah, verses, ...) are tolerated and ignored.
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .errors import (
    DuplicateId,
    OffsetMismatch,
    ParseError,
    RunValidationError,
    SchemaError,
)

logger = logging.getLogger(__name__)

SOURCES = ("qrcd", "squad", "mlqa", "xquad")
MAX_ANSWERS = 5


@dataclass(frozen=True)
class GoldAnswer:
    text: str
    start_char: int


@dataclass(frozen=True)
class QuestionRecord:
    pq_id: str
    passage: str
    question: str
    answers: tuple[GoldAnswer, ...]
    source: str = "qrcd"

    def validate(self) -> None:
        if self.source not in SOURCES:
            raise SchemaError(f"{self.pq_id}: unknown source {self.source!r}")
        for ans in self.answers:
            end = ans.start_char + len(ans.text)
            if ans.start_char < 0 or self.passage[ans.start_char : end] != ans.text:
                raise OffsetMismatch(
                    self.pq_id,
                    f"answer {ans.text!r} not found at start_char {ans.start_char}",
                )

    def to_json(self) -> dict:
        return {
            "pq_id": self.pq_id,
            "passage": self.passage,
            "question": self.question,
            "answers": [{"text": a.text, "start_char": a.start_char} for a in self.answers],
        }


@dataclass(frozen=True)
class RunAnswer:
    text: str
    rank: int
    score: float
    start_tok: int | None = None
    end_tok: int | None = None
    recommended: bool = False

    def to_json(self) -> dict:
        row = {"answer": self.text, "rank": self.rank, "score": self.score}
        # token coordinates ride along so later pipeline stages can re-span
        if self.start_tok is not None:
            row["start_tok"] = self.start_tok
            row["end_tok"] = self.end_tok
        if self.recommended:
            row["recommended"] = True
        return row


@dataclass(frozen=True)
class RunEntry:
    pq_id: str
    answers: tuple[RunAnswer, ...] = field(default_factory=tuple)

    def validate(self) -> None:
        if len(self.answers) > MAX_ANSWERS:
            raise RunValidationError(
                f"{self.pq_id}: {len(self.answers)} answers exceeds cap of {MAX_ANSWERS}"
            )
        for expected, ans in enumerate(self.answers, start=1):
            if ans.rank != expected:
                raise RunValidationError(f"{self.pq_id}: ranks must be 1..k consecutive")
        for prev, nxt in zip(self.answers, self.answers[1:]):
            if nxt.score > prev.score:
                raise RunValidationError(f"{self.pq_id}: scores must be non-increasing")


def _record_from_json(obj, lineno=None, source="qrcd") -> QuestionRecord:
    try:
        answers = tuple(
            GoldAnswer(str(a["text"]), int(a["start_char"])) for a in obj["answers"]
        )
        rec = QuestionRecord(
            pq_id=str(obj["pq_id"]),
            passage=obj["passage"],
            question=obj["question"],
            answers=answers,
            source=source,
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"missing or malformed field: {exc}", lineno) from exc
    rec.validate()
    return rec


def read_qrcd(path) -> list[QuestionRecord]:
    records, seen = [], set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"invalid JSON ({exc.msg})", lineno) from exc
            rec = _record_from_json(obj, lineno)
            if rec.pq_id in seen:
                raise DuplicateId(f"line {lineno}: duplicate pq_id {rec.pq_id!r}")
            seen.add(rec.pq_id)
            records.append(rec)
    return records


def write_qrcd(records: Iterable[QuestionRecord], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec.to_json(), ensure_ascii=False) + "\n")


def read_squad_family(path, source: str = "squad") -> tuple[list[QuestionRecord], int]:
    """Flatten article -> paragraph -> qas into records.

    Unanswerable questions are dropped; returns ``(records, dropped_count)``.
    """
    if source not in SOURCES:
        raise SchemaError(f"unknown source {source!r}")
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON ({exc.msg})", exc.lineno) from exc

    records, seen, dropped = [], set(), 0
    try:
        for article in doc["data"]:
            for para in article["paragraphs"]:
                context = para["context"]
                for qa in para["qas"]:
                    qid = str(qa["id"])
                    raw_answers = qa["answers"]
                    if not raw_answers or qa.get("is_impossible", False):
                        dropped += 1
                        continue
                    if qid in seen:
                        raise DuplicateId(f"duplicate question id {qid!r}")
                    seen.add(qid)
                    answers = tuple(
                        GoldAnswer(a["text"], int(a["answer_start"])) for a in raw_answers
                    )
                    rec = QuestionRecord(qid, context, qa["question"], answers, source)
                    rec.validate()
                    records.append(rec)
    except (KeyError, TypeError) as exc:
        raise SchemaError(f"{path}: missing mandatory key {exc}") from exc
    if dropped:
        logger.info("%s: dropped %d unanswerable questions", path, dropped)
    return records, dropped


def validate_run(entries: Sequence[RunEntry]) -> None:
    seen = set()
    for entry in entries:
        if entry.pq_id in seen:
            raise DuplicateId(f"duplicate pq_id {entry.pq_id!r} in run")
        seen.add(entry.pq_id)
        entry.validate()


def dumps_run(entries: Sequence[RunEntry]) -> str:
    validate_run(entries)
    payload = {
        e.pq_id: [a.to_json() for a in e.answers]
        for e in sorted(entries, key=lambda e: e.pq_id)
    }
    return json.dumps(payload, ensure_ascii=False, indent=2) + "\n"


def write_run(entries: Sequence[RunEntry], path) -> None:
    """Validate then write; keys sorted by pq_id so output is byte-stable."""
    text = dumps_run(entries)
    Path(path).write_text(text, encoding="utf-8")


def read_run(path) -> list[RunEntry]:
    try:
        with open(path, encoding="utf-8") as fh:
            payload = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON ({exc.msg})", exc.lineno) from exc
    if not isinstance(payload, dict):
        raise SchemaError("run file must be a JSON object keyed by pq_id")
    entries = []
    for pq_id, rows in payload.items():
        try:
            answers = tuple(
                RunAnswer(
                    text=row["answer"],
                    rank=int(row["rank"]),
                    score=float(row["score"]),
                    start_tok=row.get("start_tok"),
                    end_tok=row.get("end_tok"),
                    recommended=bool(row.get("recommended", False)),
                )
                for row in rows
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"{pq_id}: malformed run answer ({exc})") from exc
        entry = RunEntry(pq_id, answers)
        entry.validate()
        entries.append(entry)
    return entries
