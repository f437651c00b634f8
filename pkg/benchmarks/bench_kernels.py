"""Compare the compiled kernels with the pure NumPy fallback.

Usage::

    python benchmarks/bench_kernels.py [--rows 2000] [--trees 100] [--repeat 3]

Each workload runs on both backends; outputs are also checked for bit
equality so a speedup never hides a divergence.
"""

import argparse
import sys
import time

import numpy as np

from mint_eval import _backend
from mint_eval.forest import ForestConfig, fit_forest, predict_forest
from mint_eval.metaeval import bootstrap_indices, paired_bootstrap_p


def best_of(fn, repeat):
    times, out = [], None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--rows", type=int, default=2000)
    ap.add_argument("--features", type=int, default=6)
    ap.add_argument("--trees", type=int, default=100)
    ap.add_argument("--depth", type=int, default=4)
    ap.add_argument("--segments", type=int, default=1000)
    ap.add_argument("--resamples", type=int, default=1000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    if not _backend.compiled_available():
        print("compiled kernels are not built; run `pip install --no-build-isolation -e .` first")
        return 1

    rng = np.random.default_rng(0)
    X = rng.uniform(size=(args.rows, args.features))
    y = X @ rng.normal(size=args.features) + 0.1 * rng.normal(size=args.rows)
    cfg = ForestConfig(n_trees=args.trees, max_depth=args.depth, seed=1)
    a, b = rng.normal(size=args.segments), rng.normal(size=args.segments)
    idx = bootstrap_indices(args.segments, args.resamples, 2)
    models = {be: fit_forest(X, y, cfg, backend=be) for be in ("python", "compiled")}

    workloads = {
        "forest fit": lambda be: fit_forest(X, y, cfg, backend=be).to_dict(),
        "forest predict": lambda be: predict_forest(models[be], X, backend=be).tobytes(),
        "bootstrap p": lambda be: paired_bootstrap_p(a, b, indices=idx, backend=be),
    }
    print(f"{'workload':<16}{'python s':>12}{'compiled s':>12}{'speedup':>10}  identical")
    ok = True
    for label, fn in workloads.items():
        tp, op = best_of(lambda: fn("python"), args.repeat)
        tc, oc = best_of(lambda: fn("compiled"), args.repeat)
        same = op == oc
        ok &= same
        print(f"{label:<16}{tp:>12.4f}{tc:>12.4f}{tp / tc:>9.1f}x  {same}")
    return 0 if ok else 2


if __name__ == "__main__":
    sys.exit(main())
