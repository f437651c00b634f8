"""Minimum Bayes risk selection over candidate pools."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from .errors import DimensionMismatch, EmptyPool, InvalidArgument, MalformedRow, NonFiniteInput
from .lexmetrics import get_native_metric
from .registry import CandidatePool


@dataclass(frozen=True)
class UtilityMatrix:
    seg: int
    values: np.ndarray  # values[i, j]: candidate i scored with candidate j as reference

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2 or v.shape[0] != v.shape[1] or v.shape[0] < 1:
            raise DimensionMismatch(f"seg {self.seg}: utility matrix must be square and non-empty, got {v.shape}")
        if not np.all(np.isfinite(v)):
            raise NonFiniteInput(f"seg {self.seg}: non-finite utility values")
        object.__setattr__(self, "values", v)

    @property
    def size(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class MbrConfig:
    """Either ``metric`` (a native lexical metric name) or ``matrices`` (seg -> UtilityMatrix)."""

    metric: str | None = "chrf"
    matrices: dict | None = None
    include_self: bool = True

    def __post_init__(self):
        if (self.metric is None) == (self.matrices is None):
            raise InvalidArgument("specify exactly one of a native metric or precomputed matrices")


def utility_matrix(pool: CandidatePool, metric: str | Callable[[str, str], float] = "chrf") -> UtilityMatrix:
    if not pool.candidates:
        raise EmptyPool(f"seg {pool.seg}: empty candidate pool")
    fn = get_native_metric(metric) if isinstance(metric, str) else metric
    cands = pool.candidates
    p = len(cands)
    values = np.empty((p, p))
    cache: dict = {}
    for i in range(p):
        for j in range(p):
            key = (cands[i], cands[j])
            if key not in cache:
                cache[key] = fn(cands[i], cands[j]) if cands[j].strip() else 0.0
            values[i, j] = cache[key]
    return UtilityMatrix(pool.seg, values)


def expected_utilities(matrix: UtilityMatrix | np.ndarray, include_self: bool = True) -> np.ndarray:
    v = matrix.values if isinstance(matrix, UtilityMatrix) else np.asarray(matrix, dtype=float)
    p = v.shape[0]
    if include_self:
        return v.mean(axis=1)
    if p == 1:
        # no other pseudo-reference: fall back to the candidate itself
        return v[:, 0].copy()
    return (v.sum(axis=1) - np.diag(v)) / (p - 1)


def select(matrix: UtilityMatrix | np.ndarray, include_self: bool = True) -> tuple[int, np.ndarray]:
    eu = expected_utilities(matrix, include_self)
    # argmax returns the first maximum: ties go to the lowest index
    return int(np.argmax(eu)), eu


def mbr_select(pool: CandidatePool, cfg: MbrConfig | None = None) -> tuple[int, np.ndarray]:
    cfg = cfg or MbrConfig()
    if not pool.candidates:
        raise EmptyPool(f"seg {pool.seg}: empty candidate pool")
    if cfg.matrices is not None:
        try:
            matrix = cfg.matrices[pool.seg]
        except KeyError:
            raise DimensionMismatch(f"no utility matrix for seg {pool.seg}") from None
        if matrix.size != len(pool.candidates):
            raise DimensionMismatch(
                f"seg {pool.seg}: matrix is {matrix.size}x{matrix.size} but pool has {len(pool.candidates)} candidates"
            )
    else:
        matrix = utility_matrix(pool, cfg.metric)
    return select(matrix, cfg.include_self)


def load_matrices(path) -> dict[int, UtilityMatrix]:
    out = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").split("\n"), start=1):
        if not raw.strip():
            continue
        try:
            d = json.loads(raw)
            m = UtilityMatrix(int(d["seg"]), np.array(d["matrix"], dtype=float))
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
            raise MalformedRow(f"bad matrix row ({e})", lineno) from None
        out[m.seg] = m
    return out
