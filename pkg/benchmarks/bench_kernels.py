"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 5]
"""
import argparse
import timeit

import numpy as np

from deepgraph import _kernels
from deepgraph.features import _csr
from deepgraph.graph import Graph


def _random_graph(rng, n, p):
    iu = np.triu_indices(n, 1)
    keep = rng.random(len(iu[0])) < p
    return Graph.from_pairs(n, list(zip(iu[0][keep].tolist(), iu[1][keep].tolist())))


def cases(rng):
    a = rng.normal(size=(200, 200))
    sym = (a + a.T) / 2
    h = rng.random((2000, 64))
    means, sds = h.mean(axis=0), h.std(axis=0)
    g = _random_graph(rng, 120, 0.08)
    adj = g.adjacency_matrix().astype(np.uint8)
    indptr, indices = _csr(g)
    p, grad = rng.normal(size=300_000), rng.normal(size=300_000)
    m, v = np.zeros_like(p), np.zeros_like(p)
    return {
        "eigh_ql n=200": lambda mod: mod.eigh_ql(sym, 20000),
        "histogram 2000x64": lambda mod: mod.histogram_counts(h, means, sds, 64),
        "quad_census n=120": lambda mod: mod.quad_census(adj, indptr, indices),
        "adam 300k params": lambda mod: mod.adam_update(p, grad, m, v, 1e-3, 0.9, 0.999, 1e-8, 0.1, 0.001),
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if _kernels.native is None:
        raise SystemExit("native extension not built; run `pip install -e . --no-build-isolation`")
    print(f"{'kernel':<22}{'native ms':>12}{'python ms':>12}{'speedup':>10}")
    for name, fn in cases(np.random.default_rng(0)).items():
        t = {}
        for label, mod in (("native", _kernels.native), ("python", _kernels.fallback)):
            t[label] = min(timeit.repeat(lambda: fn(mod), number=1, repeat=args.repeat)) * 1e3
        print(f"{name:<22}{t['native']:>12.2f}{t['python']:>12.2f}{t['python'] / t['native']:>10.1f}")


if __name__ == "__main__":
    main()
