import itertools

import pytest
from hypothesis import given
from hypothesis import strategies as st

from quranqa.dataset_io import GoldAnswer, QuestionRecord, read_qrcd
from quranqa.errors import EmptyDataset, MissingStats
from quranqa.question_typing import (
    PRONOUNS,
    PUBLISHED_STATS,
    QuestionType,
    TypeStatsTable,
    classify_question,
    compute_type_stats,
    lookup_avg_length,
)


@pytest.mark.parametrize(
    "question,expected",
    [
        ("هل سمح الإسلام بحرية الاعتقاد بالدخول إلى الإسلام؟", QuestionType.POLAR),
        ("ضد من فُرض الجهاد؟", QuestionType.WHO),
        ("xyz?", QuestionType.WHAT),
        ("على من تجب الزكاة؟", QuestionType.WHO),
        ("في كم يوم خلق الله السماوات؟", QuestionType.WHEN_HOWMUCH),
        ("متى تقوم الساعة؟", QuestionType.WHEN_HOWMUCH),
        ("ماهي صفات المؤمنين؟", QuestionType.WHAT),
        ("بماذا أمر الله؟", QuestionType.WHAT),
        ("بأي ذنب قتلت؟", QuestionType.WHICH),
        ("فلماذا تقتلون أنبياء الله؟", QuestionType.WHY),
        ("لماذا خلق الله الإنسان؟", QuestionType.WHY),
        ("أين تقع الجنة؟", QuestionType.WHERE),
        ("كيف يكون الوضوء؟", QuestionType.HOW),
        ("هَلْ يَجوز؟", QuestionType.POLAR),
    ],
)
def test_classify(question, expected):
    assert classify_question(question) == expected


def test_earliest_pronoun_wins():
    # "من" appears later as a preposition
    assert classify_question("كيف نجا موسى من فرعون؟") == QuestionType.HOW


def test_pronoun_lists_disjoint():
    for (a, fa), (b, fb) in itertools.combinations(PRONOUNS.items(), 2):
        assert not set(fa) & set(fb), (a, b)


@given(st.text())
def test_classify_total_and_deterministic(question):
    first = classify_question(question)
    assert isinstance(first, QuestionType)
    assert classify_question(question) == first


def _rec(pq_id, question, *answers):
    passage = " ".join(answers)
    golds, pos = [], 0
    for a in answers:
        golds.append(GoldAnswer(a, pos))
        pos += len(a) + 1
    return QuestionRecord(pq_id, passage, question, tuple(golds))


def test_single_record_stats():
    stats = compute_type_stats([_rec("a", "من هو؟", "قل هو الله")])
    (row,) = stats.rows
    assert (row.type, row.count, row.min_len, row.avg_len, row.max_len) == (
        QuestionType.WHO, 1, 3, 3, 3)
    assert stats.global_avg == 3


def test_stats_all_answers_counted():
    records = [
        _rec("a", "من هو؟", "ا ب", "ا ب ج د"),       # WHO: 2, 4
        _rec("b", "من هم؟", "ا"),                     # WHO: 1
        _rec("c", "هل هو؟", "ا ب ج د ه و ز ح ط"),    # POLAR: 9
    ]
    stats = compute_type_stats(records)
    who = stats.get(QuestionType.WHO)
    assert (who.count, who.min_len, who.avg_len, who.max_len) == (2, 1, 2, 4)  # mean 7/3
    assert stats.get(QuestionType.POLAR).avg_len == 9
    assert stats.global_avg == 4  # 16 / 4
    assert sum(r.count for r in stats) == 3


def test_stats_avg_rounds_half_up():
    stats = compute_type_stats([_rec("a", "من؟", "ا", "ا ب")])  # mean 1.5
    assert stats.rows[0].avg_len == 2


def test_stats_empty():
    with pytest.raises(EmptyDataset):
        compute_type_stats([])
    with pytest.raises(EmptyDataset):
        compute_type_stats([QuestionRecord("a", "x", "من؟", ())])


def test_stats_invariants_on_fixture(fixture_dir):
    records = read_qrcd(fixture_dir / "qrcd_fixture.jsonl")
    stats = compute_type_stats(records)
    assert sum(r.count for r in stats) == len(records)
    for row in stats:
        assert row.min_len <= row.avg_len <= row.max_len


def test_lookup_published():
    assert lookup_avg_length(QuestionType.WHO, PUBLISHED_STATS) == 6
    assert lookup_avg_length(QuestionType.WHY, PUBLISHED_STATS) == 10


def test_lookup_unknown_uses_global_mean():
    # WHO answers of 8 and 10 tokens, no WHY row: global mean (8 + 10) / 2 = 9
    records = [_rec("a", "من؟", " ".join("ا" * 8)), _rec("b", "من؟", " ".join("ب" * 10))]
    stats = compute_type_stats(records)
    assert lookup_avg_length(QuestionType.WHY, stats) == 9
    assert lookup_avg_length(None, stats) == 9


def test_lookup_missing_stats():
    with pytest.raises(MissingStats):
        lookup_avg_length(QuestionType.WHO, TypeStatsTable((), 1))


def test_stats_json_round_trip(tmp_path):
    path = tmp_path / "stats.json"
    PUBLISHED_STATS.save(path)
    assert TypeStatsTable.load(path) == PUBLISHED_STATS


def test_published_table_counts():
    counts = {r.type: r.count for r in PUBLISHED_STATS}
    assert counts[QuestionType.WHAT] == 387
    assert counts[QuestionType.WHO] == 255
    assert counts[QuestionType.POLAR] == 174


def test_format_table_shape():
    lines = PUBLISHED_STATS.format_table().splitlines()
    assert lines[0].split() == ["type", "N", "min", "avg", "max"]
    assert lines[2].split() == ["WHO", "255", "1", "6", "58"]
