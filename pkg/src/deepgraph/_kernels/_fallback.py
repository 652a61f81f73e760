"""Pure Python/numpy implementations of the hot kernels.

Signatures mirror the compiled ``_native`` module exactly so either can be
bound at import time.
"""
import math

import numpy as np

EPS = 2.0 ** -52
TAIL = 1.2


def _tred2(a):
    """Householder reduction to tridiagonal form (vectorized EISPACK tred2).

    Returns ``(V, d, e)`` with ``V`` the accumulated orthogonal transform,
    ``d`` the diagonal and ``e`` the sub-diagonal (``e[0] == 0``).
    """
    n = a.shape[0]
    V = np.array(a, dtype=np.float64, copy=True)
    d = V[n - 1].copy()
    e = np.zeros(n)
    for i in range(n - 1, 0, -1):
        scale = np.abs(d[:i]).sum()
        h = 0.0
        if scale == 0.0:
            e[i] = d[i - 1]
            d[:i] = V[i - 1, :i]
            V[i, :i] = 0.0
            V[:i, i] = 0.0
        else:
            d[:i] /= scale
            h = float(d[:i] @ d[:i])
            f = d[i - 1]
            g = math.sqrt(h)
            if f > 0:
                g = -g
            e[i] = scale * g
            h -= f * g
            d[i - 1] = f - g
            u = d[:i]
            V[:i, i] = u
            # the leading block is kept symmetric, so the lower-triangle
            # product of the reference algorithm is a plain mat-vec here
            ev = V[:i, :i] @ u
            ev /= h
            hh = float(ev @ u) / (h + h)
            ev -= hh * u
            V[:i, :i] -= np.outer(u, ev) + np.outer(ev, u)
            d[:i] = V[i - 1, :i]
            V[i, :i] = 0.0
            e[:i] = ev
        d[i] = h
    for i in range(n - 1):
        V[n - 1, i] = V[i, i]
        V[i, i] = 1.0
        h = d[i + 1]
        if h != 0.0:
            col = V[:i + 1, i + 1]
            g = col @ V[:i + 1, :i + 1]
            V[:i + 1, :i + 1] -= np.outer(col / h, g)
        V[:i + 1, i + 1] = 0.0
    d = V[n - 1].copy()
    V[n - 1] = 0.0
    V[n - 1, n - 1] = 1.0
    e[0] = 0.0
    return V, d, e


def _tql2(Zt, d, e, max_iter):
    """Implicit-shift QL on a symmetric tridiagonal matrix.

    ``Zt`` holds the eigenvector basis transposed (row ``i`` is vector ``i``)
    and is rotated in place. Returns the number of iterations used, or -1 if
    ``max_iter`` was exceeded.
    """
    n = len(d)
    d = d.tolist()
    e = e.tolist()
    for i in range(1, n):
        e[i - 1] = e[i]
    e[n - 1] = 0.0
    f = 0.0
    tst1 = 0.0
    total = 0
    hypot = math.hypot
    for l in range(n):
        tst1 = max(tst1, abs(d[l]) + abs(e[l]))
        m = l
        while m < n - 1 and abs(e[m]) > EPS * tst1:
            m += 1
        if m > l:
            while True:
                total += 1
                if total > max_iter:
                    return -1, d
                g = d[l]
                p = (d[l + 1] - g) / (2.0 * e[l])
                r = hypot(p, 1.0)
                if p < 0:
                    r = -r
                d[l] = e[l] / (p + r)
                d[l + 1] = e[l] * (p + r)
                dl1 = d[l + 1]
                h = g - d[l]
                for i in range(l + 2, n):
                    d[i] -= h
                f += h
                p = d[m]
                c = c2 = c3 = 1.0
                el1 = e[l + 1]
                s = s2 = 0.0
                for i in range(m - 1, l - 1, -1):
                    c3 = c2
                    c2 = c
                    s2 = s
                    g = c * e[i]
                    h = c * p
                    r = hypot(p, e[i])
                    e[i + 1] = s * r
                    s = e[i] / r
                    c = p / r
                    p = c * d[i] - s * g
                    d[i + 1] = h + s * (c * g + s * d[i])
                    zi = Zt[i]
                    zi1 = Zt[i + 1]
                    tmp = zi1.copy()
                    zi1 *= c
                    zi1 += s * zi
                    zi *= c
                    zi -= s * tmp
                p = -s * s2 * c3 * el1 * e[l] / dl1
                e[l] = s * p
                d[l] = c * p
                if abs(e[l]) <= EPS * tst1:
                    break
        d[l] += f
        e[l] = 0.0
    return total, d


def eigh_ql(a, max_iter):
    """Full eigendecomposition of a symmetric matrix.

    Returns ``(eigenvalues, eigenvectors, iterations)`` unsorted, with
    eigenvectors in columns; ``iterations == -1`` signals non-convergence.
    """
    a = np.ascontiguousarray(a, dtype=np.float64)
    n = a.shape[0]
    if n == 0:
        return np.zeros(0), np.zeros((0, 0)), 0
    if n == 1:
        return a[0].copy(), np.ones((1, 1)), 0
    V, d, e = _tred2(a)
    Zt = np.ascontiguousarray(V.T)
    iters, d = _tql2(Zt, d, e, max_iter)
    return np.asarray(d), np.ascontiguousarray(Zt.T), iters


def histogram_counts(h, means, sds, n_bins):
    """Per-column bin counts of standardized values.

    Bin 0 takes ``u < -1.2``, bin ``n_bins-1`` takes ``u >= 1.2`` and the
    ``n_bins-2`` inner bins split ``[-1.2, 1.2)`` into half-open intervals.
    """
    h = np.asarray(h, dtype=np.float64)
    u = (h - means) / sds
    # multiply by the reciprocal width so that exact inner edges such as 0 land on the right side
    scale = (n_bins - 2) / (2.0 * TAIL)
    inner = np.floor((u + TAIL) * scale)
    inner = np.clip(inner, 0, n_bins - 3).astype(np.int64) + 1
    idx = np.where(u < -TAIL, 0, np.where(u >= TAIL, n_bins - 1, inner))
    n_cols = h.shape[1]
    counts = np.zeros((n_bins, n_cols), dtype=np.int64)
    cols = np.broadcast_to(np.arange(n_cols), idx.shape)
    np.add.at(counts, (idx.ravel(), cols.ravel()), 1)
    return counts


def quad_census(adj, indptr, indices):
    """Induced counts of the six connected 4-node graphs.

    Order: 3-star, 4-path, paw (triangle with tail), 4-cycle, diamond, K4.
    Computed from non-induced subgraph counts by inclusion-exclusion instead
    of enumerating subsets.
    """
    A = np.asarray(adj, dtype=np.float64)
    n = A.shape[0]
    if n < 4:
        return np.zeros(6, dtype=np.int64)
    deg = A.sum(axis=1)
    A2 = A @ A
    tri_node = np.einsum("ij,ji->i", A2, A) / 2.0
    n_tri = tri_node.sum() / 3.0
    iu, iv = np.nonzero(np.triu(A, 1))
    tri_edge = A2[iu, iv]

    stars = (deg * (deg - 1) * (deg - 2) / 6.0).sum()
    paths = ((deg[iu] - 1) * (deg[iv] - 1)).sum() - 3.0 * n_tri
    paws = (tri_node * (deg - 2)).sum()
    common = np.triu(A2, 1)
    cycles = (common * (common - 1) / 2.0).sum() / 2.0
    diamonds = (tri_edge * (tri_edge - 1) / 2.0).sum()
    if len(iu):
        X = A[iu] * A[iv]
        cliques = ((X @ A) * X).sum() / 2.0 / 6.0
    else:
        cliques = 0.0

    k4 = cliques
    dia = diamonds - 6 * k4
    cyc = cycles - dia - 3 * k4
    paw = paws - 4 * dia - 12 * k4
    path = paths - 2 * paw - 4 * cyc - 6 * dia - 12 * k4
    star = stars - paw - 2 * dia - 4 * k4
    return np.rint([star, path, paw, cyc, dia, k4]).astype(np.int64)


def adam_update(p, g, m, v, lr, b1, b2, eps, c1, c2):
    """In-place Adam step on flat arrays; ``c1``/``c2`` are the bias corrections."""
    m *= b1
    m += (1.0 - b1) * g
    v *= b2
    tmp = g * g
    tmp *= 1.0 - b2
    v += tmp
    np.divide(v, c2, out=tmp)
    np.sqrt(tmp, out=tmp)
    tmp += eps
    step = m / c1
    step *= lr
    step /= tmp
    p -= step
