"""AutoRank and AutoRank-Ins metric ensembles.

Each metric's scores are mapped linearly onto ``[1, N]`` with the best value at
1 and the worst at ``N``; the ensemble value is the unweighted mean over
metrics, so lower is better. For AutoRank ``N`` is the number of systems and
the scaled quantity is each system's mean score; for AutoRank-Ins ``N`` is
the number of (system, segment) instances, scaled jointly across systems.

A metric whose values are all equal maps every item to ``(1 + N) / 2``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InvalidArgument
from .registry import Polarity, ScoreTable, join_segments


def scale_to_ranks(values, polarity: Polarity) -> np.ndarray:
    v = np.asarray(values, dtype=float)
    n = v.size
    lo, hi = v.min(), v.max()
    if lo == hi:
        return np.full(n, (1 + n) / 2)
    if polarity is Polarity.HIGHER_BETTER:
        frac = (hi - v) / (hi - lo)
    else:
        frac = (v - lo) / (hi - lo)
    return 1 + (n - 1) * frac


@dataclass
class RankTable:
    lp: str
    systems: list
    system_values: np.ndarray          # ensemble value per system (lower is better)
    per_metric: dict                   # metric -> scaled values (systems, or instances)
    instance_keys: list | None = None  # (system, seg) per instance for the instance variant
    instance_values: np.ndarray | None = None

    def as_dict(self) -> dict:
        return dict(zip(self.systems, map(float, self.system_values)))

    def to_table(self, registry, system_metric: str = "autorank", instance_metric: str = "autorank_ins") -> ScoreTable:
        if self.instance_keys is None:
            raise InvalidArgument("system-level rank tables have no per-instance values")
        return ScoreTable({(self.lp, s, seg, instance_metric): float(v)
                           for (s, seg), v in zip(self.instance_keys, self.instance_values)}, registry)


def _polarities(table: ScoreTable, metrics: Sequence[str], polarities) -> list[Polarity]:
    if polarities is None:
        return [table.spec(m).polarity for m in metrics]
    if len(polarities) != len(metrics):
        raise InvalidArgument("one polarity per metric is required")
    return list(polarities)


def autorank_system(table: ScoreTable, lp: str, systems: Sequence[str], metrics: Sequence[str],
                    polarities: Sequence[Polarity] | None = None) -> RankTable:
    """System-level AutoRank; a system's metric score is its mean over shared segments."""
    systems = list(systems)
    if len(systems) < 2:
        raise InvalidArgument("AutoRank needs at least two systems")
    pols = _polarities(table, metrics, polarities)
    aligned = join_segments(table, lp, systems, metrics)
    per_metric = {}
    for m, pol in zip(metrics, pols):
        means = np.array([aligned.col(s, m).mean() for s in systems])
        per_metric[m] = scale_to_ranks(means, pol)
    ensemble = np.mean(np.vstack([per_metric[m] for m in metrics]), axis=0)
    return RankTable(lp, systems, ensemble, per_metric)


def autorank_instance(table: ScoreTable, lp: str, systems: Sequence[str], metrics: Sequence[str],
                      polarities: Sequence[Polarity] | None = None) -> RankTable:
    systems = list(systems)
    if not systems:
        raise InvalidArgument("AutoRank-Ins needs at least one system")
    pols = _polarities(table, metrics, polarities)
    aligned = join_segments(table, lp, systems, metrics)
    segs = [int(s) for s in aligned.segs]
    keys = [(s, seg) for s in systems for seg in segs]
    per_metric = {}
    for m, pol in zip(metrics, pols):
        flat = np.concatenate([aligned.col(s, m) for s in systems])
        per_metric[m] = scale_to_ranks(flat, pol)
    inst = np.mean(np.vstack([per_metric[m] for m in metrics]), axis=0)
    n_seg = len(segs)
    sys_values = np.array([inst[i * n_seg:(i + 1) * n_seg].mean() for i in range(len(systems))])
    return RankTable(lp, systems, sys_values, per_metric, keys, inst)
