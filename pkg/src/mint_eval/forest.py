"""Regression random forest (CART trees, squared-error splits, bagging).

Tree growing and prediction run in the kernel backend chosen by
:mod:`mint_eval._backend`; this module handles configuration, seeding,
bootstrap draws and serialization.

Seeding scheme: tree ``t`` of a forest with root seed ``s`` draws from
``numpy.random.SeedSequence(s, spawn_key=(t,))``. The first draw is the
bootstrap sample (``n`` indices with replacement), the second a 63-bit seed for
the per-node feature subsampling. Changing ``n_trees`` never alters earlier
trees.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import _backend
from .errors import DimensionMismatch, InvalidArgument, InvalidConfig, NonFiniteInput, TooFewRows

FORMAT_NAME = "mint-eval-forest"
FORMAT_VERSION = 1


@dataclass(frozen=True)
class ForestConfig:
    n_trees: int = 1000
    max_depth: int = 4
    min_samples_split: int = 2
    min_samples_leaf: int = 1
    bootstrap: bool = True
    max_features: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.n_trees < 1:
            raise InvalidConfig("n_trees must be >= 1")
        if self.max_depth < 1:
            raise InvalidConfig("max_depth must be >= 1")
        if self.min_samples_split < 2:
            raise InvalidConfig("min_samples_split must be >= 2")
        if self.min_samples_leaf < 1:
            raise InvalidConfig("min_samples_leaf must be >= 1")
        if not 0 < self.max_features <= 1:
            raise InvalidConfig("max_features must be in (0, 1]")
        if not 0 <= self.seed < 2**64:
            raise InvalidConfig("seed must be a non-negative 64-bit integer")

    def features_per_split(self, n_features: int) -> int:
        return max(1, int(self.max_features * n_features))


@dataclass
class Tree:
    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    n_node_samples: np.ndarray

    def depth(self) -> int:
        def walk(i):
            if self.feature[i] < 0:
                return 0
            return 1 + max(walk(self.left[i]), walk(self.right[i]))

        return walk(0)

    def leaf_values(self) -> np.ndarray:
        return self.value[self.feature < 0]

    def to_nested(self, i: int = 0) -> dict:
        if self.feature[i] < 0:
            return {"value": float(self.value[i]), "n": int(self.n_node_samples[i])}
        return {
            "feature": int(self.feature[i]),
            "threshold": float(self.threshold[i]),
            "value": float(self.value[i]),
            "n": int(self.n_node_samples[i]),
            "left": self.to_nested(int(self.left[i])),
            "right": self.to_nested(int(self.right[i])),
        }

    @classmethod
    def from_nested(cls, root: dict) -> "Tree":
        feature, threshold, left, right, value, counts = [], [], [], [], [], []

        def add(node):
            i = len(feature)
            feature.append(node.get("feature", -1))
            threshold.append(node.get("threshold", 0.0))
            left.append(-1)
            right.append(-1)
            value.append(node["value"])
            counts.append(node.get("n", 0))
            if "feature" in node:
                left[i] = add(node["left"])
                right[i] = add(node["right"])
            return i

        add(root)
        return cls(
            np.array(feature, dtype=np.int32),
            np.array(threshold, dtype=np.float64),
            np.array(left, dtype=np.int32),
            np.array(right, dtype=np.int32),
            np.array(value, dtype=np.float64),
            np.array(counts, dtype=np.int64),
        )


@dataclass
class ForestModel:
    trees: list
    feature_names: list
    target_range: tuple
    config: ForestConfig = field(default_factory=ForestConfig)
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self._packed = None

    @property
    def n_features(self) -> int:
        return len(self.feature_names)

    def _pack(self):
        if self._packed is None:
            offsets = np.zeros(len(self.trees) + 1, dtype=np.int64)
            offsets[1:] = np.cumsum([len(t.feature) for t in self.trees])
            cat = lambda attr: np.concatenate([getattr(t, attr) for t in self.trees])  # noqa: E731
            self._packed = (cat("feature"), cat("threshold"), cat("left"), cat("right"), cat("value"), offsets)
        return self._packed

    def predict(self, X, backend: str | None = None) -> np.ndarray:
        return predict_forest(self, X, backend=backend)

    def to_dict(self) -> dict:
        return {
            "format": FORMAT_NAME,
            "version": FORMAT_VERSION,
            "feature_names": list(self.feature_names),
            "target_range": [float(self.target_range[0]), float(self.target_range[1])],
            "config": asdict(self.config),
            "meta": self.meta,
            "trees": [t.to_nested() for t in self.trees],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ForestModel":
        if d.get("format") != FORMAT_NAME:
            raise InvalidArgument("not a forest model document")
        if d.get("version") != FORMAT_VERSION:
            raise InvalidArgument(f"unsupported forest model version {d.get('version')!r}")
        return cls(
            trees=[Tree.from_nested(t) for t in d["trees"]],
            feature_names=list(d["feature_names"]),
            target_range=tuple(d["target_range"]),
            config=ForestConfig(**d["config"]),
            meta=d.get("meta", {}),
        )

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict()) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path) -> "ForestModel":
        try:
            d = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as e:
            raise InvalidArgument(f"{path}: invalid JSON ({e})") from None
        return cls.from_dict(d)


def tree_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


def _default_jobs() -> int:
    try:
        return max(1, int(os.environ.get("MINT_EVAL_JOBS", "1")))
    except ValueError:
        return 1


def fit_forest(X, y, cfg: ForestConfig | None = None, feature_names: Sequence[str] | None = None,
               jobs: int | None = None, backend: str | None = None) -> ForestModel:
    cfg = cfg or ForestConfig()
    X = np.ascontiguousarray(np.asarray(X, dtype=np.float64))
    y = np.ascontiguousarray(np.asarray(y, dtype=np.float64))
    if X.ndim != 2 or y.ndim != 1 or X.shape[0] != y.shape[0]:
        raise DimensionMismatch(f"X must be n x d and y length n; got {X.shape} and {y.shape}")
    n, d = X.shape
    if n < 2:
        raise TooFewRows(f"need at least 2 rows, got {n}")
    if d < 1:
        raise DimensionMismatch("need at least one feature")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
        raise NonFiniteInput("X and y must be finite")
    names = list(feature_names) if feature_names is not None else [f"x{i}" for i in range(d)]
    if len(names) != d:
        raise DimensionMismatch("feature_names length does not match X")

    kernels = _backend.get(backend)
    k = cfg.features_per_split(d)
    all_rows = np.arange(n, dtype=np.int64)

    def one(t: int) -> Tree:
        rng = tree_rng(cfg.seed, t)
        samples = rng.integers(0, n, size=n) if cfg.bootstrap else all_rows
        node_seed = int(rng.integers(0, 2**63))
        arrays = kernels.build_tree(X, y, samples, cfg.max_depth, cfg.min_samples_split,
                                    cfg.min_samples_leaf, k, node_seed)
        return Tree(*arrays)

    jobs = jobs or _default_jobs()
    if jobs > 1:
        with ThreadPoolExecutor(jobs) as ex:
            trees = list(ex.map(one, range(cfg.n_trees)))
    else:
        trees = [one(t) for t in range(cfg.n_trees)]
    return ForestModel(trees, names, (float(y.min()), float(y.max())), cfg)


def predict_forest(model: ForestModel, X, backend: str | None = None) -> np.ndarray:
    """Mean of per-tree leaf values, clipped to the training target range.

    The clip only absorbs floating-point rounding: a mean of leaf means can not
    leave the range mathematically.
    """
    X = np.ascontiguousarray(np.asarray(X, dtype=np.float64))
    if X.ndim == 1:
        X = X.reshape(1, -1)
    if X.ndim != 2 or X.shape[1] != model.n_features:
        raise DimensionMismatch(f"model expects {model.n_features} feature columns, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise NonFiniteInput("X must be finite")
    kernels = _backend.get(backend)
    total = kernels.predict_sum(X, *model._pack())
    lo, hi = model.target_range
    return np.clip(total / len(model.trees), lo, hi)
