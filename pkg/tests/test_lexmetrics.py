import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from oracles import load_lexical_golden

from mint_eval.errors import EmptyReference
from mint_eval.lexmetrics import (
    BleuConfig,
    Smoothing,
    Tokenizer,
    bleu_statistics,
    corpus_bleu,
    corpus_chrf,
    sentence_bleu,
    sentence_chrf,
)

ROWS, CORPUS = load_lexical_golden()


def test_identical_is_100():
    assert sentence_chrf("the cat sat", "the cat sat") == pytest.approx(100.0)
    assert sentence_bleu("the cat sat on the mat", "the cat sat on the mat") == pytest.approx(100.0)


def test_chrf_known_value():
    assert abs(sentence_chrf("cat sat", "cat sat on the mat") - CORPUS["chrf_cat_sat"]) <= 1e-4


def test_bleu_clipping_value():
    cfg = BleuConfig()
    st_ = bleu_statistics("the the the cat", "the cat sat", cfg)
    # clipped unigram matches: "the" counts once, "cat" once
    assert st_.correct[0] == 2 and st_.total[0] == 4
    assert abs(sentence_bleu("the the the cat", "the cat sat") - CORPUS["bleu_the_the_the_cat"]) <= 1e-4


def test_empty_hypothesis_scores_zero():
    assert sentence_chrf("", "a reference") == 0.0
    assert sentence_bleu("", "a reference") == 0.0


def test_empty_reference_rejected():
    with pytest.raises(EmptyReference):
        sentence_chrf("x", "")
    with pytest.raises(EmptyReference):
        sentence_bleu("x", "   ")


@pytest.mark.parametrize("row", ROWS[:40], ids=lambda r: r["id"])
def test_sentence_parity_sample(row):
    assert abs(sentence_chrf(row["hyp"], row["ref"]) - float(row["chrf"])) <= 1e-4
    assert abs(sentence_bleu(row["hyp"], row["ref"]) - float(row["bleu"])) <= 1e-4


def test_corpus_parity():
    pairs = [(r["hyp"], r["ref"]) for r in ROWS]
    assert abs(corpus_bleu(pairs) - CORPUS["corpus_bleu_200"]) <= 1e-4
    assert abs(corpus_chrf(pairs) - CORPUS["corpus_chrf_200"]) <= 1e-4
    three = [tuple(p) for p in CORPUS["three_pairs"]]
    assert abs(corpus_bleu(three) - CORPUS["corpus_bleu_3"]) <= 1e-4


def test_no_smoothing_zero_when_higher_order_missing():
    cfg = BleuConfig(smoothing=Smoothing.NONE, effective_order=False)
    assert sentence_bleu("the cat", "the cat sat on the mat", cfg) == 0.0


def test_char_tokenizer_is_configuration():
    cfg = BleuConfig(tokenizer=Tokenizer.CHAR)
    assert sentence_bleu("東京", "東京", cfg) == pytest.approx(100.0)
    assert sentence_bleu("東京", "京東", cfg) < 100.0


words = st.lists(st.sampled_from("a b c d the cat sat mat x y".split()), min_size=1, max_size=12)


@settings(max_examples=80, deadline=None)
@given(words, words)
def test_scores_in_range_and_finite(h, r):
    h, r = " ".join(h), " ".join(r)
    for v in (sentence_chrf(h, r), sentence_bleu(h, r)):
        assert math.isfinite(v) and 0.0 <= v <= 100.0 + 1e-9


@settings(max_examples=80, deadline=None)
@given(words, words, st.data())
def test_appending_matching_token_never_loses_unigram_matches(h, r, data):
    tok = data.draw(st.sampled_from(r))
    cfg = BleuConfig()
    before = bleu_statistics(" ".join(h), " ".join(r), cfg).correct[0]
    after = bleu_statistics(" ".join(h + [tok]), " ".join(r), cfg).correct[0]
    assert after >= before
