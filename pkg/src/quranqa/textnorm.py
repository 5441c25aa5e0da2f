"""Arabic text cleaning and pretraining-corpus formatting."""
from __future__ import annotations

import json
import random
import re
import unicodedata
from dataclasses import dataclass
from fractions import Fraction
from math import ceil
from pathlib import Path
from typing import Iterable, Sequence

from .errors import BadFraction, EmptyField

# Harakat, Quranic annotation marks, superscript alef and tatweel.
_DIACRITICS = re.compile("[\u064B-\u065F\u0670\u06D6-\u06ED\u0640]")
_WHITESPACE = re.compile(r"\s+")

BLOCK_KINDS = ("fatwa", "tafseer", "quran")


@dataclass(frozen=True)
class NormalizationConfig:
    strip_diacritics: bool = True
    strip_punctuation: bool = True
    strip_non_arabic: bool = True
    collapse_whitespace: bool = True


IDENTITY = NormalizationConfig(False, False, False, False)
DEFAULT = NormalizationConfig()


def _is_arabic(ch: str) -> bool:
    cp = ord(ch)
    return 0x0600 <= cp <= 0x06FF or 0x0750 <= cp <= 0x077F


def _is_punctuation(ch: str) -> bool:
    return unicodedata.category(ch).startswith("P")


def _keep_non_arabic(ch: str) -> bool:
    return ch.isspace() or ch.isdecimal() or _is_arabic(ch)


def normalize_text(raw: str, cfg: NormalizationConfig = DEFAULT) -> str:
    """Clean ``raw`` according to the enabled flags.

    The result is idempotent under the same config: no removal step can
    produce a character another step would remove.
    """
    text = raw
    if cfg.strip_diacritics:
        text = _DIACRITICS.sub("", text)
    if cfg.strip_punctuation:
        text = "".join(ch for ch in text if not _is_punctuation(ch))
    if cfg.strip_non_arabic:
        text = "".join(ch for ch in text if _keep_non_arabic(ch))
    if cfg.collapse_whitespace:
        text = _WHITESPACE.sub(" ", text).strip()
    return text


@dataclass(frozen=True)
class CorpusBlock:
    kind: str
    text: str

    def __post_init__(self):
        if self.kind not in BLOCK_KINDS:
            raise ValueError(f"unknown block kind {self.kind!r}")
        if not self.text:
            raise EmptyField(f"{self.kind} block has empty text")


def _join_fields(kind, fields, cfg):
    parts = []
    for name, value in fields:
        cleaned = normalize_text(value, cfg)
        if not cleaned:
            raise EmptyField(f"{kind} field {name!r} is empty after normalization")
        parts.append(cleaned)
    return CorpusBlock(kind, "\n".join(parts))


def format_fatwa(question: str, answer: str, cfg: NormalizationConfig = DEFAULT) -> CorpusBlock:
    """Question first, then the mufti's answer, one per line."""
    return _join_fields("fatwa", [("question", question), ("answer", answer)], cfg)


def format_tafseer(
    context: str, question: str, explanation: str, cfg: NormalizationConfig = DEFAULT
) -> CorpusBlock:
    """Verse context, then the question, then the explanation."""
    return _join_fields(
        "tafseer",
        [("context", context), ("question", question), ("explanation", explanation)],
        cfg,
    )


def format_quran(text: str, cfg: NormalizationConfig = DEFAULT) -> CorpusBlock:
    cleaned = normalize_text(text, cfg)
    if not cleaned:
        raise EmptyField("quran text is empty after normalization")
    return CorpusBlock("quran", cleaned)


def split_corpus(
    blocks: Sequence[CorpusBlock], train_fraction: float = 0.8, seed: int = 0
) -> tuple[list[CorpusBlock], list[CorpusBlock]]:
    """Shuffle deterministically and cut into (train, validation).

    The validation side gets the floor, so a single block always lands in
    train.
    """
    if not 0 < train_fraction < 1:
        raise BadFraction(f"train_fraction must lie in (0, 1), got {train_fraction}")
    # Fraction of the decimal literal avoids 10 * (1 - 0.8) == 1.999...
    frac = Fraction(str(train_fraction))
    n_train = ceil(len(blocks) * frac)
    order = list(range(len(blocks)))
    random.Random(seed).shuffle(order)
    train = [blocks[i] for i in order[:n_train]]
    valid = [blocks[i] for i in order[n_train:]]
    return train, valid


def block_from_record(record: dict, cfg: NormalizationConfig = DEFAULT) -> CorpusBlock:
    """Build a block from a raw crawled record keyed by ``kind``."""
    kind = record.get("kind")
    if kind == "fatwa":
        return format_fatwa(record.get("question", ""), record.get("answer", ""), cfg)
    if kind == "tafseer":
        return format_tafseer(
            record.get("context", ""),
            record.get("question", ""),
            record.get("explanation", ""),
            cfg,
        )
    if kind == "quran":
        return format_quran(record.get("text", ""), cfg)
    raise EmptyField(f"record has unknown kind {kind!r}")


def write_corpus(blocks: Iterable[CorpusBlock], text_path, manifest_path) -> None:
    """Write blank-line separated paragraphs plus a JSON-lines manifest.

    Manifest offsets and lengths count characters of the decoded text file.
    """
    offset = 0
    chunks, rows = [], []
    for block in blocks:
        if chunks:
            chunks.append("\n\n")
            offset += 2
        chunks.append(block.text)
        rows.append({"kind": block.kind, "offset": offset, "length": len(block.text)})
        offset += len(block.text)
    if chunks:
        chunks.append("\n")
    Path(text_path).write_text("".join(chunks), encoding="utf-8")
    with open(manifest_path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, sort_keys=True) + "\n")


def read_corpus(text_path, manifest_path) -> list[CorpusBlock]:
    text = Path(text_path).read_text(encoding="utf-8")
    blocks = []
    with open(manifest_path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            row = json.loads(line)
            start = row["offset"]
            blocks.append(CorpusBlock(row["kind"], text[start : start + row["length"]]))
    return blocks
