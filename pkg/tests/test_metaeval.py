import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from oracles import (
    average_rank_oracle,
    bootstrap_oracle,
    borda_oracle,
    inspa_oracle,
    ols_oracle,
    pearson_oracle,
    spa_oracle,
)

from mint_eval.errors import (
    EmptySet,
    InsufficientOverlap,
    LengthMismatch,
    MissingCell,
    NoValidSources,
    ShapeMismatch,
    TooFewSegments,
)
from mint_eval.metaeval import (
    InsPaTuple,
    average_ranks,
    bootstrap_indices,
    borda,
    build_inspa_tuples,
    delta_quadrants,
    delta_stats,
    ins_pa,
    paired_bootstrap_p,
    pairs_with,
    pvalue_matrix,
    spa,
    spearman_per_source,
)
from mint_eval.registry import ScoreTable

# ---- paired bootstrap ------------------------------------------------------


def test_dominance_and_identity(backend):
    rng = np.random.default_rng(0)
    a = rng.normal(size=50)
    assert paired_bootstrap_p(a + 0.01, a, seed=1, backend=backend) == 1.0
    assert paired_bootstrap_p(a, a, seed=1, backend=backend) == 0.5


def test_matches_loop_oracle(backend):
    rng = np.random.default_rng(1)
    a, b = rng.normal(size=15), rng.normal(size=15)
    idx = bootstrap_indices(15, 200, 3)
    assert paired_bootstrap_p(a, b, indices=idx, backend=backend) == bootstrap_oracle(a, b, idx)


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 40), st.integers(0, 2**32 - 1))
def test_antisymmetry_exact(n, seed):
    rng = np.random.default_rng(seed)
    a = np.round(rng.normal(size=n), 1)  # coarse values give real ties
    b = np.round(rng.normal(size=n), 1)
    idx = bootstrap_indices(n, 300, seed)
    assert paired_bootstrap_p(a, b, indices=idx) + paired_bootstrap_p(b, a, indices=idx) == 1.0


def test_seed_determinism_and_errors():
    rng = np.random.default_rng(2)
    a, b = rng.normal(size=30), rng.normal(size=30)
    assert paired_bootstrap_p(a, b, seed=9) == paired_bootstrap_p(a, b, seed=9)
    with pytest.raises(LengthMismatch):
        paired_bootstrap_p(a, b[:-1])
    with pytest.raises(TooFewSegments):
        paired_bootstrap_p(a[:1], b[:1])


def test_pvalue_matrix_pairs_share_resamples():
    rng = np.random.default_rng(3)
    systems = ["A", "B", "C", "D"]
    scores = {s: rng.normal(size=25) for s in systems}
    P = pvalue_matrix(scores, systems, B=200, seed=4)
    for i, j in itertools.combinations(range(4), 2):
        assert P[i, j] + P[j, i] == 1.0


# ---- SPA -------------------------------------------------------------------


def test_spa_examples():
    H = np.array([[0.5, 0.2], [0.8, 0.5]])
    M = np.array([[0.5, 0.7], [0.3, 0.5]])
    assert spa(H, M, 2) == 0.5
    assert spa(H, H, 2) == 1.0


def test_spa_brute_force_n4():
    rng = np.random.default_rng(4)
    for _ in range(20):
        H, M = rng.uniform(size=(4, 4)), rng.uniform(size=(4, 4))
        assert abs(spa(H, M, 4) - spa_oracle(H, M, 4)) <= 1e-12


def test_spa_errors_and_subset():
    with pytest.raises(ShapeMismatch):
        spa(np.zeros((3, 3)), np.zeros((2, 2)), 3)
    H = np.array([[0.5, 0.1, 0.2], [0.9, 0.5, 0.3], [0.8, 0.7, 0.5]])
    M = np.full((3, 3), 0.5)
    assert spa(H, M, 3, pairs_with(["a", "b", "c"], "a")) == pytest.approx(1 - (0.4 + 0.3) / 2)


# ---- Ins-PA ----------------------------------------------------------------


def test_inspa_examples():
    assert ins_pa([InsPaTuple(0, 2.0, 1.0, 5.0, 3.0)]) == 1.0
    assert ins_pa([InsPaTuple(0, 1.0, 1.0, 5.0, 3.0)]) == 0.0
    assert ins_pa([InsPaTuple(0, 1.0, 1.0, 4.0, 4.0)]) == 1.0
    four = [InsPaTuple(0, 2, 1, 2, 1), InsPaTuple(1, 2, 1, 2, 1), InsPaTuple(2, 2, 1, 3, 1), InsPaTuple(3, 2, 1, 0, 1)]
    assert ins_pa(four) == 0.75
    with pytest.raises(EmptySet):
        ins_pa([])


def _inspa_case(rng, n_sys, n_seg, dup_text=True):
    systems = [f"s{i}" for i in range(n_sys)]
    human = {s: {g: float(rng.integers(0, 4)) for g in range(n_seg)} for s in systems}
    metric = {s: {g: float(rng.integers(0, 4)) for g in range(n_seg)} for s in systems}
    # duplicated translations across systems exercise the de-duplication key
    text = {s: {g: f"t{rng.integers(0, 3) if dup_text else s}" for g in range(n_seg)} for s in systems}
    # identical text must carry identical scores for a consistent world
    for g in range(n_seg):
        seen = {}
        for s in systems:
            t = text[s][g]
            if t in seen:
                human[s][g], metric[s][g] = seen[t]
            else:
                seen[t] = (human[s][g], metric[s][g])
    entries = {}
    for s in systems:
        for g in range(n_seg):
            entries[("l", s, g, "human")] = human[s][g]
            entries[("l", s, g, "comet")] = metric[s][g]
    tmap = {(s, g): text[s][g] for s in systems for g in range(n_seg)}
    return systems, human, metric, text, ScoreTable(entries), tmap


def test_inspa_brute_force():
    rng = np.random.default_rng(5)
    for _ in range(30):
        systems, human, metric, text, table, tmap = _inspa_case(rng, int(rng.integers(2, 5)), int(rng.integers(2, 8)))
        pairs = list(itertools.combinations(systems, 2))
        got = ins_pa(build_inspa_tuples(table, "l", pairs, "comet", "human", tmap))
        assert got == inspa_oracle(human, metric, pairs, text)


def test_inspa_dedup_by_text():
    table = ScoreTable({("l", s, 0, m): v for s, (h, c) in {"A": (2.0, 1.0), "B": (2.0, 1.0), "C": (1.0, 0.0)}.items()
                        for m, v in (("human", h), ("comet", c))})
    text = {("A", 0): "same", ("B", 0): "same", ("C", 0): "other"}
    tuples = build_inspa_tuples(table, "l", [("A", "C"), ("B", "C"), ("A", "B")], "comet", "human", text)
    assert len(tuples) == 2  # A-C and B-C collapse; A-B is a tie on identical text


# ---- Borda -----------------------------------------------------------------


def test_borda_examples():
    assert borda({"A": {"x": 0.9, "y": 0.8}, "B": {"x": 0.1, "y": 0.2}})["A"] == 1.0
    assert borda({"A": {"x": 0.5}, "B": {"x": 0.5}}) == {"A": 1.5, "B": 1.5}
    vals = {"A": {"x": 3, "y": 1, "z": 2}, "B": {"x": 2, "y": 3, "z": 1}, "C": {"x": 1, "y": 2, "z": 3}}
    assert borda(vals) == {"A": 2.0, "B": 2.0, "C": 2.0}
    vals = {"A": {"x": 3, "y": 3, "z": 2}, "B": {"x": 2, "y": 1, "z": 3}, "C": {"x": 1, "y": 2, "z": 1}}
    assert borda(vals) == {"A": (1 + 1 + 2) / 3, "B": (2 + 3 + 1) / 3, "C": (3 + 2 + 3) / 3}
    with pytest.raises(MissingCell):
        borda({"A": {"x": 1}, "B": {"y": 1}})


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 6), st.integers(1, 4), st.integers(0, 2**31), st.booleans())
def test_borda_oracle(n_methods, n_lps, seed, higher):
    rng = np.random.default_rng(seed)
    vals = {f"m{i}": {f"l{j}": float(rng.integers(0, 3)) for j in range(n_lps)} for i in range(n_methods)}
    got = borda(vals, higher)
    want = borda_oracle(vals, higher)
    assert all(abs(got[m] - want[m]) <= 1e-12 for m in vals)


# ---- Spearman --------------------------------------------------------------


def test_average_ranks_oracle():
    rng = np.random.default_rng(6)
    for _ in range(30):
        x = rng.integers(0, 5, size=8).astype(float)
        assert list(average_ranks(x)) == average_rank_oracle(list(x))


def _corr_table(a, b):
    """``a[s][seg]``; metric comet from a, chrf from b."""
    return ScoreTable({("l", s, g, m): v for m, src in (("comet", a), ("chrf", b)) for s in src
                       for g, v in enumerate(src[s])})


def test_spearman_examples():
    rng = np.random.default_rng(7)
    a = {f"s{i}": list(rng.normal(size=3)) for i in range(5)}
    neg = {s: [-v for v in vs] for s, vs in a.items()}
    assert spearman_per_source(_corr_table(a, a), "l", "comet", "chrf") == pytest.approx(1.0)
    assert spearman_per_source(_corr_table(a, neg), "l", "comet", "chrf") == pytest.approx(-1.0)


def test_spearman_rank_then_pearson_oracle():
    rng = np.random.default_rng(8)
    for _ in range(20):
        a = {f"s{i}": list(rng.normal(size=3)) for i in range(5)}
        b = {f"s{i}": list(rng.normal(size=3)) for i in range(5)}
        want = np.mean([pearson_oracle(average_rank_oracle([a[s][g] for s in a]),
                                       average_rank_oracle([b[s][g] for s in b])) for g in range(3)])
        assert spearman_per_source(_corr_table(a, b), "l", "comet", "chrf") == pytest.approx(want, abs=1e-12)


def test_spearman_skips_constant_sources():
    a = {"s0": [1.0, 1.0], "s1": [1.0, 2.0]}
    b = {"s0": [3.0, 1.0], "s1": [2.0, 5.0]}
    assert spearman_per_source(_corr_table(a, b), "l", "comet", "chrf") == 1.0
    with pytest.raises(NoValidSources):
        spearman_per_source(_corr_table({"s0": [1.0]}, {"s0": [2.0]}), "l", "comet", "chrf")


# ---- delta / quadrant ------------------------------------------------------


def test_delta_identical_systems():
    entries = {("l", s, g, m): float(g) for s in ("A", "B", "C", "D") for g in range(5) for m in ("chrf", "comet")}
    res = delta_quadrants(ScoreTable(entries), "l", ("A", "B"), ("C", "D"), "chrf", "comet")
    assert res["biased"].quadrants["zero"] == 1.0


def test_delta_exact_fit():
    r = delta_stats([1.0, -1.0], [1.0, -1.0])
    assert r.agreement == 1.0 and r.slope == 1.0 and r.intercept == 0.0


def test_delta_ols_oracle_and_buckets():
    rng = np.random.default_rng(9)
    x, y = rng.normal(size=10), rng.normal(size=10)
    r = delta_stats(x, y)
    slope, intercept = ols_oracle(list(x), list(y))
    assert abs(r.slope - slope) <= 1e-9 and abs(r.intercept - intercept) <= 1e-9
    r = delta_stats([0.0, 1.0, 0.0, -1.0], [2.0, 0.0, 0.0, -1.0])
    assert r.quadrants == {"++": 0.0, "+-": 0.0, "-+": 0.0, "--": 0.25, "axis": 0.5, "zero": 0.25}
    assert sum(r.quadrants.values()) == 1.0


def test_delta_overlap_error():
    entries = {("l", s, g, m): 1.0 for s in ("A", "B") for g in range(2) for m in ("chrf", "comet")}
    with pytest.raises(InsufficientOverlap):
        delta_quadrants(ScoreTable(entries), "l", ("A", "B"), ("A", "B"), "chrf", "comet")
