import numpy as np
import pytest

from deepgraph import _kernels
from deepgraph.features import _csr
from oracles import random_graph

native = _kernels.native
fallback = _kernels.fallback
needs_native = pytest.mark.skipif(native is None, reason="native extension not built")


def _sym(rng, n):
    a = rng.normal(size=(n, n))
    return (a + a.T) / 2


@needs_native
@pytest.mark.parametrize("n", [1, 2, 3, 10, 40])
def test_eigh_backends_agree(n):
    a = _sym(np.random.default_rng(n), n)
    wn, vn, itn = native.eigh_ql(a, 100 * n)
    wf, vf, itf = fallback.eigh_ql(a, 100 * n)
    assert itn >= 0 and itf >= 0
    on, of = np.argsort(wn), np.argsort(wf)
    assert np.allclose(np.asarray(wn)[on], np.asarray(wf)[of], atol=1e-12)
    for V, w in ((np.asarray(vn), np.asarray(wn)), (np.asarray(vf), np.asarray(wf))):
        assert np.abs(V @ np.diag(w) @ V.T - a).max() < 1e-10
        assert np.abs(V.T @ V - np.eye(n)).max() < 1e-10


@needs_native
def test_eigh_iteration_cap():
    a = _sym(np.random.default_rng(0), 30)
    assert native.eigh_ql(a, 1)[2] == -1
    assert fallback.eigh_ql(a, 1)[2] == -1


@needs_native
@pytest.mark.parametrize("n_bins", [3, 16, 64])
def test_histogram_backends_agree(n_bins):
    rng = np.random.default_rng(n_bins)
    h = rng.normal(size=(300, 8)) * 1.5
    means, sds = h.mean(axis=0), h.std(axis=0)
    assert np.array_equal(native.histogram_counts(h, means, sds, n_bins),
                          fallback.histogram_counts(h, means, sds, n_bins))


@needs_native
def test_quad_backends_agree():
    rng = np.random.default_rng(5)
    for _ in range(30):
        g = random_graph(rng, int(rng.integers(4, 40)), float(rng.uniform(0.05, 0.6)))
        adj = g.adjacency_matrix().astype(np.uint8)
        indptr, indices = _csr(g)
        assert np.array_equal(np.asarray(native.quad_census(adj, indptr, indices)),
                              np.asarray(fallback.quad_census(adj, indptr, indices)))


@needs_native
def test_adam_backends_agree():
    rng = np.random.default_rng(9)
    p0, g = rng.normal(size=50), rng.normal(size=50)
    m0, v0 = rng.normal(size=50), rng.random(50)
    out = []
    for mod in (native, fallback):
        p, m, v = p0.copy(), m0.copy(), v0.copy()
        mod.adam_update(p, g, m, v, 0.01, 0.9, 0.999, 1e-8, 1 - 0.9 ** 3, 1 - 0.999 ** 3)
        out.append((p, m, v))
    for a, b in zip(*out):
        assert np.allclose(a, b, rtol=1e-14, atol=1e-15)


def test_backend_flag():
    assert _kernels.BACKEND in ("native", "python")
    assert (_kernels.BACKEND == "native") == (native is not None)
