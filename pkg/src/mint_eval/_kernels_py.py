"""Pure NumPy implementations of the hot kernels.

These are the reference semantics for :mod:`mint_eval._kernels` (Cython). Both
must produce bit-identical results, so summation order is fixed: sums are
always sequential (``cumsum``), never pairwise (``sum``/``mean``).
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
LEAF = -1


class SplitMix64:
    """Tiny counter-based PRNG shared by both kernel backends."""

    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)

    def below(self, n: int) -> int:
        return self.next() % n


def choose_features(rng: SplitMix64, n_features: int, k: int) -> list[int]:
    if k >= n_features:
        return list(range(n_features))
    perm = list(range(n_features))
    for i in range(k):
        j = i + rng.below(n_features - i)
        perm[i], perm[j] = perm[j], perm[i]
    return sorted(perm[:k])


def _seq_sum(v: np.ndarray) -> float:
    return float(np.cumsum(v)[-1])


def build_tree(X, y, samples, max_depth, min_samples_split, min_samples_leaf, max_features, seed):
    """Grow one variance-reduction regression tree.

    ``samples`` lists the training rows (with repeats for a bootstrap draw).
    Returns ``(feature, threshold, left, right, value, n_node_samples)`` arrays;
    ``feature == -1`` marks a leaf.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    samples = np.array(samples, dtype=np.int64)
    d = X.shape[1]
    rng = SplitMix64(seed)
    feature, threshold, left, right, value, counts = [], [], [], [], [], []

    def grow(start, end, depth):
        node = len(feature)
        feature.append(LEAF)
        threshold.append(0.0)
        left.append(LEAF)
        right.append(LEAF)
        idx = samples[start:end]
        ys = y[idx]
        n = end - start
        lo, hi = float(ys.min()), float(ys.max())
        value.append(min(max(_seq_sum(ys) / n, lo), hi))
        counts.append(n)
        if depth >= max_depth or n < min_samples_split or n < 2 * min_samples_leaf or lo == hi:
            return node

        best = -np.inf
        best_f, best_t = -1, 0.0
        for f in choose_features(rng, d, max_features):
            xs = X[idx, f]
            order = np.argsort(xs, kind="stable")
            xs = xs[order]
            cs = np.cumsum(ys[order])
            total = cs[-1]
            pos = np.arange(min_samples_leaf - 1, n - min_samples_leaf)
            if pos.size == 0:
                continue
            pos = pos[xs[pos] < xs[pos + 1]]
            if pos.size == 0:
                continue
            nl = (pos + 1).astype(np.float64)
            sl = cs[pos]
            sr = total - sl
            proxy = sl * sl / nl + sr * sr / (n - nl)
            k = int(np.argmax(proxy))
            if proxy[k] > best:
                best = proxy[k]
                i = pos[k]
                t = (xs[i] + xs[i + 1]) / 2.0
                if t == xs[i + 1]:
                    t = xs[i]
                best_f, best_t = f, float(t)
        if best_f < 0:
            return node

        go_left = X[idx, best_f] <= best_t
        n_left = int(go_left.sum())
        samples[start:end] = np.concatenate([idx[go_left], idx[~go_left]])
        feature[node] = best_f
        threshold[node] = best_t
        left[node] = grow(start, start + n_left, depth + 1)
        right[node] = grow(start + n_left, end, depth + 1)
        return node

    grow(0, len(samples), 0)
    return (
        np.array(feature, dtype=np.int32),
        np.array(threshold, dtype=np.float64),
        np.array(left, dtype=np.int32),
        np.array(right, dtype=np.int32),
        np.array(value, dtype=np.float64),
        np.array(counts, dtype=np.int64),
    )


def predict_sum(X, feature, threshold, left, right, value, offsets):
    """Sum of per-tree predictions; trees are concatenated, tree t occupying
    nodes ``offsets[t]:offsets[t+1]`` with child indices local to the tree."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    m = X.shape[0]
    total = np.zeros(m)
    rows = np.arange(m)
    for t in range(len(offsets) - 1):
        base = offsets[t]
        node = np.zeros(m, dtype=np.int64)
        while True:
            f = feature[base + node]
            active = f != LEAF
            if not active.any():
                break
            a = rows[active]
            na = node[active]
            go_left = X[a, f[active]] <= threshold[base + na]
            node[active] = np.where(go_left, left[base + na], right[base + na])
        total = total + value[base + node]
    return total


def bootstrap_counts(a, b, indices):
    """Count resamples where sum(a*) > sum(b*), < and == for shared index rows."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    sa = np.cumsum(a[indices], axis=1)[:, -1]
    sb = np.cumsum(b[indices], axis=1)[:, -1]
    return int((sa > sb).sum()), int((sa < sb).sum()), int((sa == sb).sum())
