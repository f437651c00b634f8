"""MINTAdjust and the learned human-score ensemble baseline.

MINTAdjust regresses the interfering metric on other ("safe") metrics using
only systems the caller declares free of interference, then re-scores every
instance of every system with the fitted model. Which systems count as free
of interference is the caller's decision; nothing here tries to detect it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import InvalidArgument, LeakageError, MissingHuman, MissingScores
from .forest import ForestConfig, ForestModel, fit_forest, predict_forest
from .registry import ADJUSTED_PREFIX, Family, ScoreTable

HUMAN = "human"


@dataclass(frozen=True)
class AdjustSpec:
    interfering_metric: str
    feature_metrics: tuple
    training_systems: tuple
    lp: str
    forest_cfg: ForestConfig = field(default_factory=ForestConfig)

    def __post_init__(self):
        object.__setattr__(self, "feature_metrics", tuple(self.feature_metrics))
        object.__setattr__(self, "training_systems", tuple(self.training_systems))
        if self.interfering_metric in self.feature_metrics:
            raise LeakageError(f"interfering metric {self.interfering_metric!r} is listed as a feature")
        if not self.feature_metrics:
            raise InvalidArgument("at least one feature metric is required")
        if len(set(self.feature_metrics)) != len(self.feature_metrics):
            raise InvalidArgument("duplicate feature metrics")
        if not self.training_systems:
            raise InvalidArgument("training_systems must be non-empty")


def _segments_for(table: ScoreTable, lp: str, system: str, metrics: Sequence[str]) -> list[int]:
    segs: set = set()
    for m in metrics:
        segs |= set(table.segments(lp, system, m))
    return sorted(segs)


def feature_matrix(table: ScoreTable, lp: str, systems: Sequence[str], metrics: Sequence[str],
                   target: str | None = None, target_error=MissingScores):
    """Stack rows for ``systems`` (in order, segments ascending).

    Returns ``(keys, X, y)`` where ``keys`` lists ``(system, seg)`` and ``y``
    is ``None`` when no target is given. Any absent score raises, listing every
    missing key.
    """
    keys, rows, ys = [], [], []
    missing, missing_target = [], []
    wanted = list(metrics) + ([target] if target else [])
    for system in systems:
        segs = _segments_for(table, lp, system, wanted)
        if not segs:
            missing.append((lp, system, "*", "*"))
            continue
        for seg in segs:
            row = []
            for m in metrics:
                v = table.get(lp, system, seg, m)
                if v is None:
                    missing.append((lp, system, seg, m))
                row.append(v)
            if target:
                t = table.get(lp, system, seg, target)
                if t is None:
                    missing_target.append((lp, system, seg, target))
                ys.append(t)
            keys.append((system, seg))
            rows.append(row)
    if missing:
        raise MissingScores(missing)
    if missing_target:
        raise target_error(missing_target)
    X = np.array(rows, dtype=float).reshape(len(rows), len(metrics))
    y = np.array(ys, dtype=float) if target else None
    return keys, X, y


def train_mintadjust(table: ScoreTable, spec: AdjustSpec, jobs: int | None = None) -> ForestModel:
    if HUMAN in spec.feature_metrics or any(
        table.registry.get(m).family is Family.HUMAN for m in spec.feature_metrics if m in table.registry
    ):
        raise LeakageError("MINTAdjust must not read human judgments")
    _, X, y = feature_matrix(table, spec.lp, spec.training_systems, spec.feature_metrics, spec.interfering_metric)
    model = fit_forest(X, y, spec.forest_cfg, feature_names=spec.feature_metrics, jobs=jobs)
    model.meta = {
        "kind": "mintadjust",
        "target": spec.interfering_metric,
        "lp": spec.lp,
        "training_systems": list(spec.training_systems),
    }
    return model


def apply_model(model: ForestModel, table: ScoreTable, systems: Sequence[str], lp: str,
                out_metric: str) -> ScoreTable:
    keys, X, _ = feature_matrix(table, lp, systems, model.feature_names)
    preds = predict_forest(model, X)
    registry = table.registry
    if out_metric not in registry:
        raise InvalidArgument(f"output metric {out_metric!r} is not registered")
    return ScoreTable({(lp, s, seg, out_metric): float(p) for (s, seg), p in zip(keys, preds)}, registry)


def apply_mintadjust(model: ForestModel, table: ScoreTable, systems: Sequence[str] | None = None,
                     lp: str | None = None) -> ScoreTable:
    """Score every instance of ``systems`` (default: all systems in the lp)."""
    lp = lp or model.meta.get("lp")
    if lp is None:
        raise InvalidArgument("language pair not given and not recorded in the model")
    target = model.meta.get("target", "metric")
    if systems is None:
        systems = table.systems(lp)
    return apply_model(model, table, systems, lp, ADJUSTED_PREFIX + target)


def train_human_ensemble(table: ScoreTable, feature_metrics: Sequence[str],
                         split: Sequence[tuple[str, str]] | None = None,
                         forest_cfg: ForestConfig | None = None, human_metric: str = HUMAN,
                         jobs: int | None = None) -> ForestModel:
    """Fit a forest predicting human scores from metric scores.

    ``split`` lists the ``(lp, system)`` pairs to train on; by default every pair
    that has any human score. Several language pairs in the split give one
    pooled model.
    """
    feature_metrics = tuple(feature_metrics)
    if human_metric in feature_metrics:
        raise LeakageError("the human score can not also be a feature")
    if split is None:
        split = sorted({(k[0], k[1]) for k in table if k[3] == human_metric})
        if not split:
            raise MissingHuman([("*", "*", "*", human_metric)])
    Xs, ys = [], []
    for lp, system in split:
        _, X, y = feature_matrix(table, lp, [system], feature_metrics, human_metric, target_error=MissingHuman)
        Xs.append(X)
        ys.append(y)
    X = np.vstack(Xs)
    y = np.concatenate(ys)
    model = fit_forest(X, y, forest_cfg or ForestConfig(), feature_names=feature_metrics, jobs=jobs)
    model.meta = {
        "kind": "human_ensemble",
        "target": human_metric,
        "lps": sorted({lp for lp, _ in split}),
        "training_split": [list(p) for p in split],
    }
    return model
