import numpy as np
import pytest

from mint_eval.adjust import AdjustSpec, apply_mintadjust, feature_matrix, train_human_ensemble, train_mintadjust
from mint_eval.errors import LeakageError, MissingHuman, MissingScores
from mint_eval.forest import ForestConfig
from mint_eval.metaeval import build_inspa_tuples, ins_pa, pairs_with
from mint_eval.registry import ScoreTable
from mint_eval.synth import ScenarioConfig, generate_scenario

FAST = ForestConfig(n_trees=60, max_depth=4, seed=0)


def table_from(columns, lp="en-de"):
    """``columns[(system, metric)] -> array over segs 0..n-1``."""
    return ScoreTable({(lp, s, i, m): float(v) for (s, m), arr in columns.items() for i, v in enumerate(arr)})


def test_identity_target_recovered():
    rng = np.random.default_rng(0)
    x = rng.uniform(0, 1, size=300)
    t = table_from({("A", "chrf"): x, ("A", "comet"): x, ("B", "chrf"): x[::-1], ("B", "comet"): x[::-1]})
    model = train_mintadjust(t, AdjustSpec("comet", ("chrf",), ("A", "B"), "en-de", FAST))
    adj = apply_mintadjust(model, t, ["A"])
    pred = np.array([adj[("en-de", "A", i, "adjusted:comet")] for i in range(300)])
    assert np.max(np.abs(pred - x)) <= 0.05 * (x.max() - x.min())


def test_constant_target():
    rng = np.random.default_rng(1)
    t = table_from({("A", "chrf"): rng.normal(size=50), ("A", "comet"): np.full(50, 0.7),
                    ("M", "chrf"): rng.normal(size=50)})
    model = train_mintadjust(t, AdjustSpec("comet", ("chrf",), ("A",), "en-de", FAST))
    adj = apply_mintadjust(model, t, ["A", "M"])
    assert {v for _, v in adj.items()} == {0.7}


def test_leakage_and_human_features_rejected():
    with pytest.raises(LeakageError):
        AdjustSpec("comet", ("chrf", "comet"), ("A",), "en-de")
    rng = np.random.default_rng(2)
    t = table_from({("A", "human"): rng.normal(size=10), ("A", "comet"): rng.normal(size=10)})
    with pytest.raises(LeakageError):
        train_mintadjust(t, AdjustSpec("comet", ("human",), ("A",), "en-de", FAST))


def test_missing_scores_listed():
    t = ScoreTable({("en-de", "A", 0, "chrf"): 1.0, ("en-de", "A", 0, "comet"): 1.0,
                    ("en-de", "A", 1, "comet"): 2.0})
    with pytest.raises(MissingScores) as e:
        train_mintadjust(t, AdjustSpec("comet", ("chrf",), ("A",), "en-de", FAST))
    assert ("en-de", "A", 1, "chrf") in e.value.missing


def test_range_and_identical_feature_rows():
    rng = np.random.default_rng(3)
    f1, f2 = rng.normal(size=80), rng.normal(size=80)
    y = f1 + 0.5 * f2 + rng.normal(scale=0.1, size=80)
    t = table_from({("A", "chrf"): f1, ("A", "bleu"): f2, ("A", "comet"): y,
                    ("C", "chrf"): f1, ("C", "bleu"): f2})  # C copies A's features
    model = train_mintadjust(t, AdjustSpec("comet", ("chrf", "bleu"), ("A",), "en-de", FAST))
    adj = apply_mintadjust(model, t)
    a = np.array([adj[("en-de", "A", i, "adjusted:comet")] for i in range(80)])
    c = np.array([adj[("en-de", "C", i, "adjusted:comet")] for i in range(80)])
    assert (a == c).all()
    assert y.min() <= a.min() and a.max() <= y.max()


def test_row_order_invariance_without_bootstrap():
    rng = np.random.default_rng(4)
    cols = {("A", "chrf"): rng.normal(size=40), ("A", "comet"): rng.normal(size=40)}
    t = table_from(cols)
    items = list(t.items())
    rng.shuffle(items)
    t2 = ScoreTable(dict(items))
    cfg = ForestConfig(n_trees=1, bootstrap=False, seed=0)
    spec = AdjustSpec("comet", ("chrf",), ("A",), "en-de", cfg)
    a = apply_mintadjust(train_mintadjust(t, spec), t)
    b = apply_mintadjust(train_mintadjust(t2, spec), t2)
    assert a == b


def test_synthetic_mint_system_improves_inspa():
    world = generate_scenario(ScenarioConfig(seed=0))
    systems = world.systems
    training = tuple(s for s in systems if s != "mint")
    cfg = world.config
    model = train_mintadjust(world.table, AdjustSpec("interfering", tuple(cfg.safe_metrics), training, "syn-syn",
                                                     ForestConfig(n_trees=200, seed=0)))
    table = world.table.merged(apply_mintadjust(model, world.table, systems, "syn-syn"))
    pairs = [(systems[i], systems[j]) for i, j in pairs_with(systems, "mint")]
    raw = ins_pa(build_inspa_tuples(table, "syn-syn", pairs, "interfering", "quality", world.text))
    adj = ins_pa(build_inspa_tuples(table, "syn-syn", pairs, "adjusted:interfering", "quality", world.text))
    assert adj > raw


def test_human_ensemble_identity_and_constant():
    rng = np.random.default_rng(5)
    x = rng.uniform(size=200)
    t = table_from({("A", "comet"): x, ("A", "human"): x, ("A", "chrf"): rng.uniform(size=200)})
    m = train_human_ensemble(t, ["comet", "chrf"], [("en-de", "A")], FAST)
    _, X, _ = feature_matrix(t, "en-de", ["A"], ["comet", "chrf"])
    assert np.max(np.abs(m.predict(X) - x)) <= 0.05
    const = table_from({("A", "comet"): x, ("A", "human"): np.full(200, 3.0)})
    m2 = train_human_ensemble(const, ["comet"], None, FAST)
    assert (m2.predict(X[:, :1]) == 3.0).all()


def test_human_ensemble_beats_noisiest_feature_held_out():
    rng = np.random.default_rng(6)

    def corpus(lp, n):
        q = rng.normal(size=n)
        cols = {("S", "comet"): q + rng.normal(scale=0.4, size=n),
                ("S", "chrf"): q + rng.normal(scale=1.5, size=n),
                ("S", "human"): q + rng.normal(scale=0.3, size=n),
                ("S", "quality"): q}
        return table_from(cols, lp)

    train, test = corpus("train", 600), corpus("test", 400)
    m = train_human_ensemble(train, ["comet", "chrf"], [("train", "S")], ForestConfig(n_trees=100, seed=1))
    _, X, q = feature_matrix(test, "test", ["S"], ["comet", "chrf"], "quality")
    corr = np.corrcoef(m.predict(X), q)[0, 1]
    noisiest = np.corrcoef(X[:, 1], q)[0, 1]
    assert corr > noisiest


def test_human_ensemble_pooled_and_missing_human():
    rng = np.random.default_rng(7)
    a = table_from({("A", "comet"): rng.normal(size=20), ("A", "human"): rng.normal(size=20)}, "l1")
    b = table_from({("A", "comet"): rng.normal(size=20), ("A", "human"): rng.normal(size=20)}, "l2")
    m = train_human_ensemble(a.merged(b), ["comet"], [("l1", "A"), ("l2", "A")], FAST)
    assert m.meta["lps"] == ["l1", "l2"]
    no_human = table_from({("A", "comet"): rng.normal(size=20)})
    with pytest.raises(MissingHuman):
        train_human_ensemble(no_human, ["comet"], [("en-de", "A")], FAST)
