# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels. Signatures mirror ``_fallback``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, sqrt, hypot, floor

cnp.import_array()

cdef double EPS = 2.0 ** -52
cdef double TAIL = 1.2


cdef void _tred2(double[:, ::1] W, double[::1] d, double[::1] e) noexcept nogil:
    # Householder tridiagonalization operating on the transposed transform,
    # so the column sweeps of the textbook routine walk contiguous rows.
    cdef Py_ssize_t n = W.shape[0]
    cdef Py_ssize_t i, j, k
    cdef double scale, h, f, g, hh
    for j in range(n):
        d[j] = W[j, n - 1]
    for i in range(n - 1, 0, -1):
        scale = 0.0
        h = 0.0
        for k in range(i):
            scale += fabs(d[k])
        if scale == 0.0:
            e[i] = d[i - 1]
            for j in range(i):
                d[j] = W[j, i - 1]
                W[j, i] = 0.0
                W[i, j] = 0.0
        else:
            for k in range(i):
                d[k] /= scale
                h += d[k] * d[k]
            f = d[i - 1]
            g = sqrt(h)
            if f > 0:
                g = -g
            e[i] = scale * g
            h = h - f * g
            d[i - 1] = f - g
            for j in range(i):
                e[j] = 0.0
            for j in range(i):
                f = d[j]
                W[i, j] = f
                g = e[j] + W[j, j] * f
                for k in range(j + 1, i):
                    g += W[j, k] * d[k]
                    e[k] += W[j, k] * f
                e[j] = g
            f = 0.0
            for j in range(i):
                e[j] /= h
                f += e[j] * d[j]
            hh = f / (h + h)
            for j in range(i):
                e[j] -= hh * d[j]
            for j in range(i):
                f = d[j]
                g = e[j]
                for k in range(j, i):
                    W[j, k] -= (f * e[k] + g * d[k])
                d[j] = W[j, i - 1]
                W[j, i] = 0.0
        d[i] = h
    for i in range(n - 1):
        W[i, n - 1] = W[i, i]
        W[i, i] = 1.0
        h = d[i + 1]
        if h != 0.0:
            for k in range(i + 1):
                d[k] = W[i + 1, k] / h
            for j in range(i + 1):
                g = 0.0
                for k in range(i + 1):
                    g += W[i + 1, k] * W[j, k]
                for k in range(i + 1):
                    W[j, k] -= g * d[k]
        for k in range(i + 1):
            W[i + 1, k] = 0.0
    for j in range(n):
        d[j] = W[j, n - 1]
        W[j, n - 1] = 0.0
    W[n - 1, n - 1] = 1.0
    e[0] = 0.0


cdef long _tql2(double[:, ::1] Z, double[::1] d, double[::1] e, long max_iter) noexcept nogil:
    cdef Py_ssize_t n = d.shape[0]
    cdef Py_ssize_t i, k, l, m
    cdef double f = 0.0, tst1 = 0.0
    cdef double g, p, r, dl1, h, c, c2, c3, el1, s, s2, zi, zi1
    cdef long total = 0
    for i in range(1, n):
        e[i - 1] = e[i]
    e[n - 1] = 0.0
    for l in range(n):
        tst1 = max(tst1, fabs(d[l]) + fabs(e[l]))
        m = l
        while m < n - 1 and fabs(e[m]) > EPS * tst1:
            m += 1
        if m > l:
            while True:
                total += 1
                if total > max_iter:
                    return -1
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
                f = f + h
                p = d[m]
                c = 1.0
                c2 = c
                c3 = c
                el1 = e[l + 1]
                s = 0.0
                s2 = 0.0
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
                    for k in range(n):
                        zi = Z[i, k]
                        zi1 = Z[i + 1, k]
                        Z[i + 1, k] = c * zi1 + s * zi
                        Z[i, k] = c * zi - s * zi1
                p = -s * s2 * c3 * el1 * e[l] / dl1
                e[l] = s * p
                d[l] = c * p
                if fabs(e[l]) <= EPS * tst1:
                    break
        d[l] = d[l] + f
        e[l] = 0.0
    return total


def eigh_ql(a, long max_iter):
    cdef cnp.ndarray[double, ndim=2, mode="c"] W = np.array(a, dtype=np.float64, order="C", copy=True)
    cdef Py_ssize_t n = W.shape[0]
    if n == 0:
        return np.zeros(0), np.zeros((0, 0)), 0
    if n == 1:
        return W[0].copy(), np.ones((1, 1)), 0
    cdef cnp.ndarray[double, ndim=1] d = np.zeros(n)
    cdef cnp.ndarray[double, ndim=1] e = np.zeros(n)
    cdef double[:, ::1] Wv = W
    cdef double[::1] dv = d
    cdef double[::1] ev = e
    cdef long iters
    with nogil:
        _tred2(Wv, dv, ev)
        iters = _tql2(Wv, dv, ev, max_iter)
    return d, np.ascontiguousarray(W.T), iters


def histogram_counts(h, means, sds, Py_ssize_t n_bins):
    cdef double[:, ::1] hv = np.ascontiguousarray(h, dtype=np.float64)
    cdef double[::1] mv = np.ascontiguousarray(means, dtype=np.float64)
    cdef double[::1] sv = np.ascontiguousarray(sds, dtype=np.float64)
    cdef Py_ssize_t n = hv.shape[0], n_cols = hv.shape[1]
    out = np.zeros((n_bins, n_cols), dtype=np.int64)
    cdef long long[:, ::1] counts = out
    cdef double scale = (n_bins - 2) / (2.0 * TAIL)
    cdef double u, q
    cdef Py_ssize_t i, j, b
    with nogil:
        for i in range(n):
            for j in range(n_cols):
                u = (hv[i, j] - mv[j]) / sv[j]
                if u < -TAIL:
                    b = 0
                elif u >= TAIL:
                    b = n_bins - 1
                else:
                    q = floor((u + TAIL) * scale)
                    if q < 0:
                        q = 0
                    elif q > n_bins - 3:
                        q = n_bins - 3
                    b = <Py_ssize_t>q + 1
                counts[b, j] += 1
    return out


cdef inline int _classify(const unsigned char[:, ::1] A, Py_ssize_t a, Py_ssize_t b,
                          Py_ssize_t c, Py_ssize_t x) noexcept nogil:
    cdef int da = A[a, b] + A[a, c] + A[a, x]
    cdef int db = A[a, b] + A[b, c] + A[b, x]
    cdef int dc = A[a, c] + A[b, c] + A[c, x]
    cdef int dx = A[a, x] + A[b, x] + A[c, x]
    cdef int m2 = da + db + dc + dx
    if m2 == 6:
        if da == 3 or db == 3 or dc == 3 or dx == 3:
            return 0
        return 1
    if m2 == 8:
        if da == 3 or db == 3 or dc == 3 or dx == 3:
            return 2
        return 3
    if m2 == 10:
        return 4
    return 5


def quad_census(adj, indptr, indices):
    """Enumerate each connected 4-node subset once (ESU) and classify it."""
    cdef const unsigned char[:, ::1] A = np.ascontiguousarray(adj, dtype=np.uint8)
    cdef const long long[::1] ptr = np.ascontiguousarray(indptr, dtype=np.int64)
    cdef const long long[::1] nb = np.ascontiguousarray(indices, dtype=np.int64)
    cdef Py_ssize_t n = A.shape[0]
    out = np.zeros(6, dtype=np.int64)
    cdef long long[::1] counts = out
    if n < 4:
        return out
    cdef long long[::1] ext1 = np.zeros(n, dtype=np.int64)
    cdef long long[::1] ext2 = np.zeros(n, dtype=np.int64)
    cdef long long[::1] ext3 = np.zeros(n, dtype=np.int64)
    cdef Py_ssize_t v, w, w2, x, u, i, j, q, t, n1, n2, n3
    with nogil:
        for v in range(n):
            n1 = 0
            for t in range(ptr[v], ptr[v + 1]):
                u = nb[t]
                if u > v:
                    ext1[n1] = u
                    n1 += 1
            for i in range(n1):
                w = ext1[i]
                n2 = 0
                for j in range(i + 1, n1):
                    ext2[n2] = ext1[j]
                    n2 += 1
                for t in range(ptr[w], ptr[w + 1]):
                    u = nb[t]
                    if u > v and u != v and A[v, u] == 0:
                        ext2[n2] = u
                        n2 += 1
                for j in range(n2):
                    w2 = ext2[j]
                    n3 = 0
                    for q in range(j + 1, n2):
                        ext3[n3] = ext2[q]
                        n3 += 1
                    for t in range(ptr[w2], ptr[w2 + 1]):
                        u = nb[t]
                        if u > v and u != w and A[v, u] == 0 and A[w, u] == 0:
                            ext3[n3] = u
                            n3 += 1
                    for q in range(n3):
                        x = ext3[q]
                        counts[_classify(A, v, w, w2, x)] += 1
    return out


def adam_update(double[::1] p, const double[::1] g, double[::1] m, double[::1] v,
                double lr, double b1, double b2, double eps, double c1, double c2):
    """Fused in-place Adam step on flat arrays; ``c1``/``c2`` are the bias corrections."""
    cdef Py_ssize_t i, n = p.shape[0]
    cdef double gi
    with nogil:
        for i in range(n):
            gi = g[i]
            m[i] = b1 * m[i] + (1.0 - b1) * gi
            v[i] = b2 * v[i] + (1.0 - b2) * (gi * gi)
            p[i] -= (lr * (m[i] / c1)) / (sqrt(v[i] / c2) + eps)
