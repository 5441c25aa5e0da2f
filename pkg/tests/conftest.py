from pathlib import Path

import numpy as np
import pytest

from quranqa.span_decoder import LogitBundle, TokenizedContext

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def fixture_dir():
    return FIXTURES


def make_context(n_tokens, verse_ends=(), special=(), pq_id="q"):
    """Synthetic context of single-letter tokens separated by spaces."""
    tokens, offsets, pos = [], [], 0
    for i in range(n_tokens):
        tok = "." if i in verse_ends else f"t{i}"
        tokens.append(tok)
        offsets.append((pos, pos + len(tok)))
        pos += len(tok) + 1
    passage = " ".join(tokens)
    mask = tuple(i in special for i in range(n_tokens))
    return TokenizedContext(
        pq_id, tuple(tokens), tuple(offsets), mask, tuple(sorted(verse_ends)), passage
    )


def make_bundle(ctx, start, end):
    return LogitBundle(ctx.pq_id, np.asarray(start, float), np.asarray(end, float))


ACCEPTANCE_RESULTS = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(line)
