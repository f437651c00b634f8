"""Synthetic metric-interference scenarios with known latent quality.

This generative model belongs to this package; nothing here is calibrated to
real WMT data. Per segment ``s`` a difficulty ``mu_s ~ N(0, 1)`` is drawn. Every
translation ``c`` (a baseline output, or one candidate of the interfering
system's pool) gets

    quality  q  = mu_s + skill + N(0, sigma_quality^2)
    spurious u  ~ N(0, 1)
    neural-like metric  = q + spurious_load * u + N(0, sigma_metric^2)
    lexical-like metric = q + N(0, sigma_lex^2)
    human               = q + N(0, sigma_human^2)

The interfering metric and the ``k_neural`` safe neural-like metrics share
``u`` (spurious correlation); lexical-like metrics do not. The system under
interference ("mint") outputs, per segment, the pool candidate with the highest
interfering-metric score; its greedy twin ("greedy") outputs candidate 0 of the
same pool.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from .adjust import AdjustSpec, apply_mintadjust, train_mintadjust
from .errors import InvalidConfig
from .forest import ForestConfig
from .metaeval import (
    DEFAULT_RESAMPLES,
    build_inspa_tuples,
    delta_quadrants,
    ins_pa,
    pairs_with,
    spa,
    table_pvalues,
)
from .rankers import autorank_instance
from .registry import Family, MetricRegistry, MetricSpec, Polarity, ScoreTable, default_registry

LP = "syn-syn"
MINT = "mint"
GREEDY = "greedy"
INTERFERING = "interfering"
QUALITY = "quality"
HUMAN = "human"


@dataclass(frozen=True)
class ScenarioConfig:
    n_segs: int = 500
    n_baseline_systems: int = 4
    pool_size: int = 20
    k_neural: int = 2
    k_lex: int = 2
    spurious_load: float = 0.6
    sigma_metric: float = 0.5
    sigma_lex: float = 1.0
    sigma_human: float = 0.3
    sigma_quality: float = 1.0
    baseline_skills: tuple = (0.5, 1.0, 1.5, 2.0)
    mint_skill: float = 0.0
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "baseline_skills", tuple(float(s) for s in self.baseline_skills))
        if self.n_segs < 3:
            raise InvalidConfig("n_segs must be >= 3")
        if self.pool_size < 1:
            raise InvalidConfig("pool_size must be >= 1")
        if self.k_neural < 0 or self.k_lex < 0 or self.k_neural + self.k_lex < 2:
            raise InvalidConfig("need k_neural + k_lex >= 2 safe metrics")
        if self.n_baseline_systems < 0:
            raise InvalidConfig("n_baseline_systems must be >= 0")
        if len(self.baseline_skills) != self.n_baseline_systems:
            raise InvalidConfig("baseline_skills must list one skill per baseline system")
        if self.spurious_load < 0:
            raise InvalidConfig("spurious_load must be >= 0")
        sigmas = (self.sigma_metric, self.sigma_lex, self.sigma_human, self.sigma_quality)
        if any(s < 0 for s in sigmas):
            raise InvalidConfig("noise levels must be >= 0")
        if self.sigma_lex < self.sigma_metric:
            raise InvalidConfig("sigma_lex must be >= sigma_metric")

    @property
    def neural_metrics(self) -> list[str]:
        return [f"neural_{i + 1}" for i in range(self.k_neural)]

    @property
    def lexical_metrics(self) -> list[str]:
        return [f"lexical_{i + 1}" for i in range(self.k_lex)]

    @property
    def safe_metrics(self) -> list[str]:
        return self.neural_metrics + self.lexical_metrics

    @property
    def baselines(self) -> list[str]:
        return [f"base_{i + 1}" for i in range(self.n_baseline_systems)]

    @classmethod
    def from_dict(cls, d: dict) -> "ScenarioConfig":
        known = set(cls.__dataclass_fields__)
        extra = set(d) - known
        if extra:
            raise InvalidConfig(f"unknown scenario options: {sorted(extra)}")
        try:
            return cls(**d)
        except TypeError as e:
            raise InvalidConfig(str(e)) from None


def synth_registry(cfg: ScenarioConfig) -> MetricRegistry:
    reg = default_registry()
    H = Polarity.HIGHER_BETTER
    reg.register(MetricSpec(INTERFERING, H, Family.NEURAL_REF))
    for m in cfg.neural_metrics:
        reg.register(MetricSpec(m, H, Family.NEURAL_REF))
    for m in cfg.lexical_metrics:
        reg.register(MetricSpec(m, H, Family.LEXICAL))
    return reg


@dataclass
class SyntheticWorld:
    config: ScenarioConfig
    systems: list
    quality: dict        # system -> array over segs
    table: ScoreTable    # every metric, plus "human" and "quality"
    chosen: np.ndarray   # mint's chosen pool index per seg
    text: dict = field(default_factory=dict)  # (system, seg) -> translation identity

    @property
    def segs(self) -> list[int]:
        return list(range(self.config.n_segs))

    def manifest(self) -> dict:
        return {
            "config": asdict(self.config),
            "lp": LP,
            "systems": self.systems,
            "mint_system": MINT,
            "greedy_twin": GREEDY,
            "interfering_metric": INTERFERING,
            "safe_metrics": self.config.safe_metrics,
            "chosen_index": [int(c) for c in self.chosen],
        }


def generate_scenario(cfg: ScenarioConfig) -> SyntheticWorld:
    rng = np.random.default_rng(cfg.seed)
    S, P = cfg.n_segs, cfg.pool_size
    neural = [INTERFERING] + cfg.neural_metrics
    lexical = cfg.lexical_metrics

    mu = rng.normal(size=S)

    def translations(skill, shape):
        q = mu.reshape((S,) + (1,) * (len(shape) - 1)) + skill + cfg.sigma_quality * rng.normal(size=shape)
        u = rng.normal(size=shape)
        scores = {}
        for m in neural:
            scores[m] = q + cfg.spurious_load * u + cfg.sigma_metric * rng.normal(size=shape)
        for m in lexical:
            scores[m] = q + cfg.sigma_lex * rng.normal(size=shape)
        scores[HUMAN] = q + cfg.sigma_human * rng.normal(size=shape)
        scores[QUALITY] = q
        return scores

    per_system = {}
    for name, skill in zip(cfg.baselines, cfg.baseline_skills):
        per_system[name] = translations(skill, (S,))
    pool = translations(cfg.mint_skill, (S, P))
    # argmax takes the first maximum, i.e. the lowest candidate index on ties
    chosen = np.argmax(pool[INTERFERING], axis=1)
    rows = np.arange(S)
    per_system[MINT] = {m: v[rows, chosen] for m, v in pool.items()}
    per_system[GREEDY] = {m: v[:, 0] for m, v in pool.items()}

    systems = cfg.baselines + [GREEDY, MINT]
    entries = {}
    text = {}
    for system in systems:
        for m, vals in per_system[system].items():
            for seg in range(S):
                entries[(LP, system, seg, m)] = float(vals[seg])
        for seg in range(S):
            if system == MINT:
                text[(system, seg)] = f"pool:{seg}:{int(chosen[seg])}"
            elif system == GREEDY:
                text[(system, seg)] = f"pool:{seg}:0"
            else:
                text[(system, seg)] = f"{system}:{seg}"
    table = ScoreTable(entries, synth_registry(cfg))
    quality = {s: np.asarray(per_system[s][QUALITY], dtype=float) for s in systems}
    return SyntheticWorld(cfg, systems, quality, table, chosen, text)


@dataclass(frozen=True)
class EvalConfig:
    forest: ForestConfig = field(default_factory=ForestConfig)
    resamples: int = DEFAULT_RESAMPLES
    seed: int = 0
    truth: str = QUALITY
    lexical_for_delta: str = "lexical_1"


@dataclass
class ScenarioReport:
    methods: dict    # method -> {"spa": float, "ins_pa": float}
    deltas: dict     # "biased"/"reference" -> DeltaResult
    mint_gap: float  # mean interfering score, mint minus greedy
    quality_gap: float

    def summary(self) -> dict:
        return {
            "methods": self.methods,
            "mint_gap": self.mint_gap,
            "quality_gap": self.quality_gap,
            "delta": {k: {"slope": d.slope, "intercept": d.intercept, "agreement": d.agreement,
                          "quadrants": d.quadrants} for k, d in self.deltas.items()},
        }


def evaluate_scenario(world: SyntheticWorld, ecfg: EvalConfig | None = None, jobs: int | None = None
                      ) -> ScenarioReport:
    """Score every evaluation method against latent quality on the pairs containing the mint system."""
    ecfg = ecfg or EvalConfig(forest=ForestConfig(seed=world.config.seed), seed=world.config.seed)
    cfg = world.config
    systems = world.systems
    training = [s for s in systems if s != MINT]
    if len(training) < 2:
        raise InvalidConfig("need at least two systems free of interference to train MINTAdjust")

    spec = AdjustSpec(INTERFERING, tuple(cfg.safe_metrics), tuple(training), LP, ecfg.forest)
    model = train_mintadjust(world.table, spec, jobs=jobs)
    adjusted = apply_mintadjust(model, world.table, systems, LP)
    ranks = autorank_instance(world.table, LP, systems, cfg.safe_metrics)
    table = world.table.merged(adjusted).merged(ranks.to_table(world.table.registry))

    pairs = pairs_with(systems, MINT)
    named_pairs = [(systems[i], systems[j]) for i, j in pairs]
    human_p = table_pvalues(table, LP, systems, ecfg.truth, ecfg.resamples, ecfg.seed, pairs)

    methods = [INTERFERING] + cfg.safe_metrics + ["autorank_ins", "adjusted:" + INTERFERING]
    results = {}
    for m in methods:
        metric_p = table_pvalues(table, LP, systems, m, ecfg.resamples, ecfg.seed, pairs)
        tuples = build_inspa_tuples(table, LP, named_pairs, m, ecfg.truth, world.text)
        results[m] = {"spa": spa(human_p, metric_p, len(systems), pairs), "ins_pa": ins_pa(tuples)}

    deltas = delta_quadrants(table, LP, (MINT, GREEDY), (cfg.baselines[0], cfg.baselines[1])
                             if len(cfg.baselines) >= 2 else (GREEDY, cfg.baselines[0]),
                             ecfg.lexical_for_delta, INTERFERING)
    mint_int = np.array([table[(LP, MINT, s, INTERFERING)] for s in world.segs])
    greedy_int = np.array([table[(LP, GREEDY, s, INTERFERING)] for s in world.segs])
    return ScenarioReport(
        results,
        deltas,
        float(mint_int.mean() - greedy_int.mean()),
        float(world.quality[MINT].mean() - world.quality[GREEDY].mean()),
    )


@dataclass
class MonteCarloResult:
    seeds: list
    reports: list

    def fraction(self, pred) -> float:
        return sum(bool(pred(r)) for r in self.reports) / len(self.reports)

    def checks(self) -> dict:
        adj = "adjusted:" + INTERFERING
        mean = lambda m, k: float(np.mean([r.methods[m][k] for r in self.reports]))  # noqa: E731
        return {
            "mint_beats_greedy_all_seeds": all(r.mint_gap > 0 for r in self.reports),
            "distortion_signature_share": self.fraction(
                lambda r: r.deltas["biased"].intercept > 0
                and r.deltas["biased"].intercept > r.deltas["reference"].intercept),
            "adjust_inspa_win_share": self.fraction(lambda r: r.methods[adj]["ins_pa"] > r.methods[INTERFERING]["ins_pa"]),
            "mean_spa_adjusted": mean(adj, "spa"),
            "mean_spa_interfering": mean(INTERFERING, "spa"),
            "mean_inspa_adjusted": mean(adj, "ins_pa"),
            "mean_inspa_interfering": mean(INTERFERING, "ins_pa"),
        }

    def method_means(self) -> dict:
        methods = list(self.reports[0].methods)
        return {m: {k: float(np.mean([r.methods[m][k] for r in self.reports])) for k in ("spa", "ins_pa")}
                for m in methods}


def run_monte_carlo(cfg: ScenarioConfig, seeds, forest: ForestConfig | None = None,
                    resamples: int = DEFAULT_RESAMPLES, jobs: int | None = None) -> MonteCarloResult:
    reports = []
    seeds = list(seeds)
    for seed in seeds:
        world = generate_scenario(replace(cfg, seed=seed))
        fcfg = replace(forest, seed=seed) if forest is not None else ForestConfig(seed=seed)
        reports.append(evaluate_scenario(world, EvalConfig(forest=fcfg, resamples=resamples, seed=seed), jobs=jobs))
    return MonteCarloResult(seeds, reports)


def write_world(world: SyntheticWorld, out_dir) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    world.table.save(out / "scores.tsv")
    (out / "world.json").write_text(json.dumps(world.manifest(), indent=2) + "\n", encoding="utf-8")
    # usable as ``--config`` so CLI commands know the synthetic metric names
    defaults = {spec.name for spec in default_registry()}
    extra = [spec.to_dict() for spec in world.table.registry if spec.name not in defaults]
    (out / "metrics.json").write_text(json.dumps({"metrics": extra}, indent=2) + "\n", encoding="utf-8")
