"""Meta-evaluation statistics.

Pairwise p-values come from a paired bootstrap over segments: ``B`` resamples
of segment indices (with replacement) are drawn once per system pair and shared
by both directions, and

    p(i, j) = (#{mean(a*) > mean(b*)} + 0.5 * #{ties}) / B

so ``p(i, j) + p(j, i) == 1``. Soft pairwise accuracy depends directly on this
estimator (``B = 1000`` by default).
"""

from __future__ import annotations

import itertools
import zlib
from dataclasses import dataclass
from typing import Hashable, Iterable, Mapping, Sequence

import numpy as np

from . import _backend
from .errors import (
    EmptySet,
    InsufficientOverlap,
    InvalidArgument,
    LengthMismatch,
    MissingCell,
    NoValidSources,
    ShapeMismatch,
    TooFewSegments,
)
from .registry import ScoreTable, join_segments

DEFAULT_RESAMPLES = 1000


def bootstrap_indices(n: int, B: int, seed) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return rng.integers(0, n, size=(B, n))


def paired_bootstrap_p(a, b, B: int = DEFAULT_RESAMPLES, seed=0, indices: np.ndarray | None = None,
                       backend: str | None = None) -> float:
    """Estimated probability that ``a``'s mean exceeds ``b``'s (ties count half)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise LengthMismatch(f"paired vectors differ in shape: {a.shape} vs {b.shape}")
    if a.size < 2:
        raise TooFewSegments("paired bootstrap needs at least 2 segments")
    if B < 1:
        raise InvalidArgument("B must be >= 1")
    if indices is None:
        indices = bootstrap_indices(a.size, B, seed)
    gt, _, tie = _backend.get(backend).bootstrap_counts(a, b, indices)
    return (2 * gt + tie) / (2 * indices.shape[0])


def pair_seed(root_seed: int, a: str, b: str) -> np.random.SeedSequence:
    """Per-pair bootstrap seed keyed by the two system names.

    Symmetric in ``(a, b)`` so both directions share resamples, and independent
    of where the systems sit in a list so relabeling cannot change p-values.
    """
    lo, hi = sorted((str(a), str(b)))
    return np.random.SeedSequence(root_seed, spawn_key=(zlib.crc32(lo.encode()), zlib.crc32(hi.encode())))


def pvalue_matrix(scores: Mapping[str, np.ndarray], systems: Sequence[str], B: int = DEFAULT_RESAMPLES,
                  seed: int = 0, sign: float = 1.0, pairs: Iterable[tuple[int, int]] | None = None) -> np.ndarray:
    """``P[i, j]`` = p-value that system i is preferred over j.

    ``scores`` maps system -> per-segment scores (already aligned). ``sign``
    = -1 flips lower-is-better scores. Diagonal is 0.5; unrequested pairs NaN.
    """
    n = len(systems)
    P = np.full((n, n), np.nan)
    np.fill_diagonal(P, 0.5)
    todo = pairs if pairs is not None else itertools.combinations(range(n), 2)
    for i, j in todo:
        a = sign * np.asarray(scores[systems[i]], dtype=float)
        b = sign * np.asarray(scores[systems[j]], dtype=float)
        idx = bootstrap_indices(a.size, B, pair_seed(seed, systems[i], systems[j]))
        p = paired_bootstrap_p(a, b, indices=idx)
        P[i, j] = p
        P[j, i] = paired_bootstrap_p(b, a, indices=idx)
    return P


def table_pvalues(table: ScoreTable, lp: str, systems: Sequence[str], metric: str, B: int = DEFAULT_RESAMPLES,
                  seed: int = 0, pairs=None) -> np.ndarray:
    aligned = join_segments(table, lp, systems, [metric])
    scores = {s: aligned.col(s, metric) for s in systems}
    return pvalue_matrix(scores, systems, B, seed, table.spec(metric).polarity.sign, pairs)


def spa(human_p, metric_p, n_systems: int | None = None, pairs: Iterable[tuple[int, int]] | None = None) -> float:
    """Soft pairwise accuracy: mean over system pairs of ``1 - |p_h - p_m|``.

    By default all ``i < j`` pairs; ``pairs`` restricts to a subset (e.g. the
    pairs that contain one system of interest).
    """
    H = np.asarray(human_p, dtype=float)
    M = np.asarray(metric_p, dtype=float)
    if H.shape != M.shape or H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise ShapeMismatch(f"p-value matrices must be square and equal in shape: {H.shape} vs {M.shape}")
    n = H.shape[0] if n_systems is None else n_systems
    if n != H.shape[0] or n < 2:
        raise ShapeMismatch(f"expected {n} systems (>= 2), matrices are {H.shape[0]}x{H.shape[0]}")
    todo = list(pairs) if pairs is not None else list(itertools.combinations(range(n), 2))
    if not todo:
        raise EmptySet("no system pairs")
    vals = []
    for i, j in todo:
        i, j = min(i, j), max(i, j)
        h, m = H[i, j], M[i, j]
        if np.isnan(h) or np.isnan(m):
            raise ShapeMismatch(f"p-value missing for pair ({i}, {j})")
        vals.append(1.0 - abs(h - m))
    return float(np.mean(vals))


def pairs_with(systems: Sequence[str], focus: str) -> list[tuple[int, int]]:
    k = list(systems).index(focus)
    return [(min(k, j), max(k, j)) for j in range(len(systems)) if j != k]


@dataclass(frozen=True)
class InsPaTuple:
    """One translation pair for one source.

    ``human_*``/``metric_*`` hold the scores of the human-favoured (``pos``) and
    disfavoured (``neg``) translation; for human ties the order is arbitrary and
    ``tie`` is set. ``key`` identifies the tuple for de-duplication.
    """

    src: Hashable
    human_pos: float
    human_neg: float
    metric_pos: float
    metric_neg: float
    key: Hashable = None

    @property
    def tie(self) -> bool:
        return self.human_pos == self.human_neg

    def correct(self) -> bool:
        if self.tie:
            return self.metric_pos == self.metric_neg
        return self.metric_pos > self.metric_neg


def ins_pa(tuples: Iterable[InsPaTuple]) -> float:
    tuples = list(tuples)
    if not tuples:
        raise EmptySet("Ins-PA needs at least one tuple")
    return sum(t.correct() for t in tuples) / len(tuples)


def build_inspa_tuples(table: ScoreTable, lp: str, system_pairs: Iterable[tuple[str, str]], metric: str,
                       human_metric: str = "human", text: Mapping[tuple[str, int], Hashable] | None = None
                       ) -> list[InsPaTuple]:
    """Collect unique tuples over all given system pairs.

    Tuples are de-duplicated by ``(seg, favoured text, disfavoured text)``
    (unordered for human ties). ``text`` maps ``(system, seg)`` to the
    translation (or any identity); without it the system name stands in, so
    nothing de-duplicates across different systems. Both metric and human
    scores are oriented so that higher is better.
    """
    m_sign = table.spec(metric).polarity.sign
    h_sign = table.spec(human_metric).polarity.sign
    seen = set()
    out = []
    for sa, sb in system_pairs:
        aligned = join_segments(table, lp, [sa, sb], [metric, human_metric], min_overlap=1)
        ha = h_sign * aligned.col(sa, human_metric)
        hb = h_sign * aligned.col(sb, human_metric)
        ma = m_sign * aligned.col(sa, metric)
        mb = m_sign * aligned.col(sb, metric)
        for k, seg in enumerate(aligned.segs):
            seg = int(seg)
            ta = text[(sa, seg)] if text is not None else sa
            tb = text[(sb, seg)] if text is not None else sb
            if ha[k] >= hb[k]:
                pos = (ta, ha[k], ma[k])
                neg = (tb, hb[k], mb[k])
            else:
                pos = (tb, hb[k], mb[k])
                neg = (ta, ha[k], ma[k])
            if ha[k] == hb[k]:
                key = (seg, frozenset((ta, tb)) if ta != tb else (ta, tb))
            else:
                key = (seg, pos[0], neg[0])
            if key in seen:
                continue
            seen.add(key)
            out.append(InsPaTuple(seg, float(pos[1]), float(neg[1]), float(pos[2]), float(neg[2]), key))
    return out


def borda(values: Mapping[str, Mapping[str, float]], higher_better: bool = True) -> dict[str, float]:
    """Average per-lp rank of each method (1 = best; ties share the average rank).

    ``values[method][lp]`` is the meta-metric value. Lower output is better.
    """
    methods = list(values)
    if not methods:
        raise EmptySet("no methods")
    lps = sorted({lp for m in methods for lp in values[m]})
    missing = [(m, lp) for m in methods for lp in lps if lp not in values[m]]
    if missing:
        raise MissingCell(f"missing meta-metric values: {missing}")
    totals = {m: 0.0 for m in methods}
    for lp in lps:
        col = {m: values[m][lp] for m in methods}
        for m in methods:
            better = sum(1 for o in methods if (col[o] > col[m] if higher_better else col[o] < col[m]))
            equal = sum(1 for o in methods if col[o] == col[m])
            totals[m] += better + (equal + 1) / 2
    return {m: totals[m] / len(lps) for m in methods}


def average_ranks(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    order = np.argsort(x, kind="stable")
    ranks = np.empty(x.size)
    sx = x[order]
    i = 0
    while i < x.size:
        j = i
        while j + 1 < x.size and sx[j + 1] == sx[i]:
            j += 1
        ranks[order[i:j + 1]] = (i + j) / 2 + 1
        i = j + 1
    return ranks


def spearman(x, y) -> float:
    rx = average_ranks(x)
    ry = average_ranks(y)
    rx -= rx.mean()
    ry -= ry.mean()
    denom = np.sqrt((rx * rx).sum() * (ry * ry).sum())
    if denom == 0:
        return float("nan")
    return float(np.clip((rx * ry).sum() / denom, -1.0, 1.0))


def spearman_per_source(table: ScoreTable, lp: str, metric_a: str, metric_b: str,
                        systems: Sequence[str] | None = None) -> float:
    """Mean over segments of the across-system Spearman correlation.

    Segments with fewer than two systems scored by both metrics, or with no
    variation in either metric, are skipped.
    """
    systems = systems if systems is not None else table.systems(lp)
    cols = {}
    for s in systems:
        a = table.segments(lp, s, metric_a)
        b = table.segments(lp, s, metric_b)
        for seg in a.keys() & b.keys():
            cols.setdefault(seg, []).append((a[seg], b[seg]))
    corrs = []
    for seg in sorted(cols):
        pts = cols[seg]
        if len(pts) < 2:
            continue
        xa = np.array([p[0] for p in pts])
        xb = np.array([p[1] for p in pts])
        if np.all(xa == xa[0]) or np.all(xb == xb[0]):
            continue
        corrs.append(spearman(xa, xb))
    if not corrs:
        raise NoValidSources(f"{lp}: no segment has >= 2 systems with variation in both {metric_a} and {metric_b}")
    return float(np.mean(corrs))


@dataclass
class DeltaResult:
    label: str
    segs: np.ndarray
    dx: np.ndarray
    dy: np.ndarray
    quadrants: dict   # "++", "+-", "-+", "--", "axis", "zero" -> share
    agreement: float  # share of segments in "++" or "--"
    slope: float
    intercept: float

    def rows(self):
        for s, x, y in zip(self.segs, self.dx, self.dy):
            yield int(s), float(x), float(y), self.label


def ols(x, y) -> tuple[float, float]:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    xm, ym = x.mean(), y.mean()
    sxx = ((x - xm) ** 2).sum()
    if sxx == 0:
        return 0.0, float(ym)
    slope = ((x - xm) * (y - ym)).sum() / sxx
    return float(slope), float(ym - slope * xm)


def delta_stats(dx, dy, label: str = "", segs=None) -> DeltaResult:
    dx = np.asarray(dx, dtype=float)
    dy = np.asarray(dy, dtype=float)
    n = dx.size
    zero = (dx == 0) & (dy == 0)
    axis = ((dx == 0) | (dy == 0)) & ~zero
    q = {
        "++": np.sum((dx > 0) & (dy > 0)) / n,
        "+-": np.sum((dx > 0) & (dy < 0)) / n,
        "-+": np.sum((dx < 0) & (dy > 0)) / n,
        "--": np.sum((dx < 0) & (dy < 0)) / n,
        "axis": np.sum(axis) / n,
        "zero": np.sum(zero) / n,
    }
    q = {k: float(v) for k, v in q.items()}
    slope, intercept = ols(dx, dy)
    segs = np.arange(n) if segs is None else np.asarray(segs)
    return DeltaResult(label, segs, dx, dy, q, q["++"] + q["--"], slope, intercept)


def delta_quadrants(table: ScoreTable, lp: str, pair_biased: tuple[str, str], pair_reference: tuple[str, str],
                    metric_x: str, metric_y: str) -> dict[str, DeltaResult]:
    """Per-segment deltas (first system minus second) for two system pairs.

    Segments where one delta is exactly 0 go to the ``axis`` bucket and
    both-zero segments to ``zero``; neither counts toward a quadrant.
    """
    out = {}
    for name, (a, b) in (("biased", pair_biased), ("reference", pair_reference)):
        try:
            aligned = join_segments(table, lp, [a, b], [metric_x, metric_y], min_overlap=3)
        except InsufficientOverlap as e:
            raise InsufficientOverlap(f"{name} pair {a} vs {b}: {e}") from None
        dx = aligned.col(a, metric_x) - aligned.col(b, metric_x)
        dy = aligned.col(a, metric_y) - aligned.col(b, metric_y)
        out[name] = delta_stats(dx, dy, f"{a}-{b}", aligned.segs)
    return out
