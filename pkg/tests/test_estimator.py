import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from conftest import make_bundle, make_context
from quranqa.dataset_io import read_qrcd
from quranqa.errors import LengthMismatch, SchemaError
from quranqa.estimator import AnswerSpanExtractor, check_logit_pairs
from quranqa.question_typing import PUBLISHED_STATS
from quranqa.recommender import read_embeddings
from quranqa.span_decoder import LogitBundle, read_logits_file


@pytest.fixture
def fixture_data(fixture_dir):
    pairs = list(read_logits_file(fixture_dir / "logits_fixture.jsonl").values())
    gold = read_qrcd(fixture_dir / "qrcd_fixture.jsonl")
    return pairs, gold


def test_get_params_and_clone():
    est = AnswerSpanExtractor(n_best=3, max_span_len=10)
    params = est.get_params()
    assert params == {
        "cap": 5, "length_stats": None, "max_span_len": 10, "n_best": 3, "postprocess": True,
    }
    assert clone(est).get_params() == params
    est.set_params(cap=2)
    assert est.cap == 2


def test_predict_before_fit():
    ctx = make_context(3)
    with pytest.raises(NotFittedError):
        AnswerSpanExtractor().predict([(ctx, make_bundle(ctx, [0] * 3, [0] * 3))])


def test_fit_without_records_uses_published_table():
    assert AnswerSpanExtractor().fit().type_stats_ is PUBLISHED_STATS


def test_fit_on_records(fixture_data):
    _, gold = fixture_data
    est = AnswerSpanExtractor().fit(gold)
    assert sum(r.count for r in est.type_stats_) == len(gold)


def test_predict_run_entries(fixture_data):
    pairs, gold = fixture_data
    run = AnswerSpanExtractor().fit().predict(pairs)
    assert [e.pq_id for e in run] == sorted(r.pq_id for r in gold)
    for entry in run:
        entry.validate()


def test_raw_decode_mode(fixture_data):
    pairs, _ = fixture_data
    run = AnswerSpanExtractor(postprocess=False, n_best=1).fit().predict(pairs)
    assert all(len(e.answers) == 1 and e.answers[0].end_tok - e.answers[0].start_tok == 1 for e in run)


def test_score_improves_with_postprocessing(fixture_data):
    pairs, gold = fixture_data
    raw = AnswerSpanExtractor(postprocess=False).fit().score(pairs, gold)
    post = AnswerSpanExtractor().fit().score(pairs, gold)
    assert post >= raw


def test_recommendation_never_exceeds_cap(fixture_dir, fixture_data):
    pairs, _ = fixture_data
    store = read_embeddings(fixture_dir / "embeddings_fixture.jsonl")
    run = AnswerSpanExtractor(cap=2).fit().predict(pairs, embeddings=store)
    assert all(len(e.answers) <= 2 for e in run)


def test_check_logit_pairs():
    ctx = make_context(3)
    with pytest.raises(TypeError):
        check_logit_pairs([ctx])
    with pytest.raises(SchemaError):
        check_logit_pairs([(ctx, LogitBundle("other", np.zeros(3), np.zeros(3)))])
    with pytest.raises(LengthMismatch):
        check_logit_pairs([(ctx, make_bundle(ctx, [0], [0, 0, 0]))])
    with pytest.raises(SchemaError):
        check_logit_pairs([(ctx, make_bundle(ctx, [0, np.nan, 0], [0, 0, 0]))])
