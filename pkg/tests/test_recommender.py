import json

import mpmath
import numpy as np
import pytest

from conftest import make_context
from quranqa.errors import DimensionMismatch, SchemaError, ZeroVector
from quranqa.recommender import (
    EmbeddingVector,
    append_recommendation,
    cosine_similarity,
    most_similar_verse,
    read_embeddings,
    recommend_for_context,
    verse_spans,
)
from quranqa.span_decoder import SpanPrediction, tokenize_passage


def test_self_similarity():
    assert cosine_similarity([1, 2, 3], [1, 2, 3]) == pytest.approx(1.0, abs=1e-15)


def test_orthogonal():
    assert cosine_similarity([1, 0], [0, 1]) == 0.0


def test_embedding_vector_accepted():
    u = EmbeddingVector("q", np.array([3.0, 4.0]))
    assert cosine_similarity(u, [6.0, 8.0]) == pytest.approx(1.0)


def test_cosine_errors():
    with pytest.raises(ZeroVector):
        cosine_similarity([0, 0], [1, 1])
    with pytest.raises(DimensionMismatch):
        cosine_similarity([1, 0], [1, 0, 0])


def _mp_cosine(u, v):
    with mpmath.workdps(50):
        dot = mpmath.fsum(mpmath.mpf(a) * mpmath.mpf(b) for a, b in zip(u, v))
        nu = mpmath.sqrt(mpmath.fsum(mpmath.mpf(a) ** 2 for a in u))
        nv = mpmath.sqrt(mpmath.fsum(mpmath.mpf(b) ** 2 for b in v))
        return float(dot / (nu * nv))


def test_cosine_matches_extended_precision():
    rng = np.random.default_rng(5)
    for _ in range(100):
        dim = int(rng.integers(2, 64))
        u, v = rng.normal(size=dim), rng.normal(size=dim)
        assert abs(cosine_similarity(u, v) - _mp_cosine(u, v)) <= 1e-12


def test_cosine_symmetric_and_scale_invariant():
    rng = np.random.default_rng(6)
    for _ in range(50):
        u, v = rng.normal(size=8), rng.normal(size=8)
        assert cosine_similarity(u, v) == pytest.approx(cosine_similarity(v, u), abs=1e-15)
        assert cosine_similarity(3.5 * u, v) == pytest.approx(cosine_similarity(u, v), abs=1e-12)


def test_most_similar_basic():
    v = np.array([1.0, 2.0, 0.5])
    orth = np.array([2.0, -1.0, 0.0])
    assert most_similar_verse(v, [-v, orth, v]) == 2


def test_most_similar_tie_lowest_index():
    v = np.array([1.0, 1.0])
    assert most_similar_verse(v, [np.array([1.0, -1.0]), v, v]) == 1


def test_most_similar_matches_scan_and_scale():
    rng = np.random.default_rng(8)
    for _ in range(20):
        q = rng.normal(size=12)
        verses = list(rng.normal(size=(50, 12)))
        best, best_sim = 0, -2.0
        for i, vv in enumerate(verses):
            sim = _mp_cosine(q, vv)
            if sim > best_sim:
                best, best_sim = i, sim
        assert most_similar_verse(q, verses) == best
        assert most_similar_verse(2.0 * q, [7.0 * vv for vv in verses]) == best


def _sp(s, e, score=0.5, rank=1):
    return SpanPrediction(s, e, score, f"{s}-{e}", rank)


def test_append_full_list_unchanged():
    answers = [_sp(i * 3, i * 3 + 1, 1 - i / 10, i + 1) for i in range(5)]
    assert append_recommendation(answers, _sp(30, 32)) == answers


def test_append_overlap_unchanged():
    answers = [_sp(0, 4, 0.9, 1), _sp(10, 12, 0.5, 2)]
    assert append_recommendation(answers, _sp(3, 8)) == answers


def test_append_disjoint():
    answers = [_sp(0, 4, 0.9, 1), _sp(10, 12, 0.5, 2)]
    out = append_recommendation(answers, _sp(20, 25, 0.7))
    assert out[:2] == answers
    assert (out[2].start_tok, out[2].end_tok, out[2].rank, out[2].score) == (20, 25, 3, 0.0)
    assert out[2].recommended


def test_verse_spans_exclude_bare_stop():
    ctx = tokenize_passage("قل هو الله أحد. الله الصمد. لم يلد", "x", special_prefix=["[CLS]"])
    assert verse_spans(ctx) == [(1, 4), (6, 7), (9, 10)]


def test_verse_spans_keep_fused_stop_word():
    ctx = make_context(6, verse_ends=set())
    from dataclasses import replace
    ctx = replace(ctx, verse_end_tokens=(2,))
    assert verse_spans(ctx) == [(0, 2), (3, 5)]


def test_recommend_for_context_appends_best_verse():
    ctx = tokenize_passage("قل هو الله أحد. الله الصمد. لم يلد", "q1")
    store = {
        "q1": np.array([0.0, 1.0]),
        "q1#v1": np.array([1.0, 0.0]),
        "q1#v2": np.array([0.1, 1.0]),
        "q1#v3": np.array([-1.0, 0.2]),
    }
    out = recommend_for_context([_sp(0, 1, 0.8)], ctx, store)
    assert len(out) == 2
    assert (out[1].start_tok, out[1].end_tok, out[1].text) == (5, 6, "الله الصمد")


def test_recommend_for_context_missing_vectors():
    ctx = tokenize_passage("قل هو. الله", "q1")
    answers = [_sp(0, 0)]
    assert recommend_for_context(answers, ctx, {"q1": np.ones(2)}) == answers


def test_read_embeddings(tmp_path, fixture_dir):
    store = read_embeddings(fixture_dir / "embeddings_fixture.jsonl")
    assert len({v.shape for v in store.values()}) == 1
    bad = tmp_path / "e.jsonl"
    bad.write_text(json.dumps({"id": "a", "vector": [1, 2]}) + "\n"
                   + json.dumps({"id": "b", "vector": [1, 2, 3]}) + "\n")
    with pytest.raises(DimensionMismatch):
        read_embeddings(bad)
    bad.write_text(json.dumps({"id": "a", "vector": [1, float("nan")]}) + "\n")
    with pytest.raises(SchemaError):
        read_embeddings(bad)
