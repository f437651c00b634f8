import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from oracles import topk_oracle

from mint_eval.errors import InvalidArgument
from mint_eval.filtering import jaccard, topk_filter
from mint_eval.registry import Polarity


def test_top_one():
    assert set(topk_filter([(0, 0.9), (1, 0.1)], 1).indices) == {0}


def test_k_at_least_pool():
    sel = topk_filter([(3, 1.0), (1, 2.0)], 10)
    assert sorted(sel.indices) == [1, 3] and len(sel) == 2


def test_hundred_random_vs_sort():
    rng = random.Random(0)
    for _ in range(30):
        scores = [(i, rng.random()) for i in range(100)]
        rng.shuffle(scores)
        assert list(topk_filter(scores, 10).indices) == topk_oracle(scores, 10)


def test_ties_by_lower_id_and_lower_better():
    scores = [(5, 1.0), (2, 1.0), (9, 0.5), (1, 3.0)]
    assert list(topk_filter(scores, 2).indices) == [1, 2]
    assert list(topk_filter(scores, 2, Polarity.LOWER_BETTER).indices) == [9, 2]


def test_preconditions():
    with pytest.raises(InvalidArgument):
        topk_filter([(0, 1.0)], 0)
    with pytest.raises(InvalidArgument):
        topk_filter([], 1)
    with pytest.raises(InvalidArgument):
        topk_filter([(0, 1.0), (0, 2.0)], 1)


def test_jaccard_examples():
    assert jaccard({1, 2}, {1, 2}) == 1.0
    assert jaccard({1}, {2}) == 0.0
    assert jaccard({1, 2, 3}, {3, 4}) == 0.25
    assert jaccard(set(), set()) == 1.0


ids = st.sets(st.integers(0, 30), max_size=15)


@settings(max_examples=100, deadline=None)
@given(ids, ids)
def test_jaccard_properties(a, b):
    v = jaccard(a, b)
    assert 0.0 <= v <= 1.0
    assert v == jaccard(b, a)
    assert jaccard(a, a) == 1.0


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-5, 5, allow_nan=False), min_size=1, max_size=30), st.integers(1, 35), st.randoms())
def test_topk_order_invariant_and_separating(vals, k, rnd):
    scores = list(enumerate(vals))
    sel = topk_filter(scores, k)
    shuffled = scores[:]
    rnd.shuffle(shuffled)
    assert list(topk_filter(shuffled, k).indices) == list(sel.indices)
    inside = [vals[i] for i in sel.indices]
    outside = [v for i, v in scores if i not in sel.as_set()]
    if outside:
        assert min(inside) >= max(outside)
    assert len(sel) == min(k, len(vals))
