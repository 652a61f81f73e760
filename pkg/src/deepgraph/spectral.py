"""Normalized graph Laplacian and dense symmetric eigendecomposition."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import ConvergenceError
from .graph import Graph, degree_vector


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenpairs sorted by ascending eigenvalue; column ``k`` of
    ``eigenvectors`` belongs to ``eigenvalues[k]``."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def n(self) -> int:
        return self.eigenvectors.shape[0]


def normalized_laplacian(g: Graph) -> np.ndarray:
    """``D^{-1/2} (D - W) D^{-1/2}`` with zero rows for isolated nodes.

    Off-diagonal entries are ``-1/sqrt(d_i d_j)``, computed once per edge so
    the matrix is exactly symmetric.
    """
    deg = degree_vector(g).astype(np.float64)
    L = np.diag((deg > 0).astype(np.float64))
    if g.edges:
        e = g.edge_array()
        vals = -1.0 / np.sqrt(deg[e[:, 0]] * deg[e[:, 1]])
        L[e[:, 0], e[:, 1]] = vals
        L[e[:, 1], e[:, 0]] = vals
    return L


def _fix_signs(vecs: np.ndarray) -> np.ndarray:
    # largest-magnitude entry of each column made non-negative
    if vecs.size == 0:
        return vecs
    rows = np.argmax(np.abs(vecs), axis=0)
    signs = np.where(vecs[rows, np.arange(vecs.shape[1])] < 0, -1.0, 1.0)
    return vecs * signs


def eig_sym(m: np.ndarray, method: str = "ql", n_eig: int | None = None,
            max_sweeps: int | None = None) -> SpectralDecomposition:
    """Full eigendecomposition of a real symmetric matrix.

    Parameters
    ----------
    m : ndarray (n, n)
        Symmetric matrix with finite entries.
    method : {"ql", "lapack"}
        ``"ql"`` runs Householder tridiagonalization followed by implicit-shift
        QL (compiled when available). ``"lapack"`` defers to
        :func:`numpy.linalg.eigh` and is kept as an independent cross-check.
    n_eig : int, optional
        Keep only the ``n_eig`` smallest eigenpairs. This truncates the heat
        kernel expansion and is an approximation for ``n_eig < n``.
    max_sweeps : int, optional
        QL iteration cap, default ``100 * n``.

    Raises
    ------
    ConvergenceError
        If QL does not converge within the cap.
    """
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("matrix must be square")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    n = m.shape[0]
    if method == "ql":
        cap = 100 * max(n, 1) if max_sweeps is None else max_sweeps
        vals, vecs, iters = _kernels.eigh_ql(m, cap)
        if iters < 0:
            raise ConvergenceError(f"QL eigensolver did not converge within {cap} iterations (n={n})")
    elif method == "lapack":
        vals, vecs = np.linalg.eigh(m)
    else:
        raise ValueError(f"unknown method {method!r}")
    order = np.argsort(vals, kind="stable")
    vals = np.ascontiguousarray(vals[order])
    vecs = _fix_signs(np.ascontiguousarray(vecs[:, order]))
    if n_eig is not None and n_eig < n:
        if n_eig < 1:
            raise ValueError("n_eig must be positive")
        vals, vecs = vals[:n_eig].copy(), np.ascontiguousarray(vecs[:, :n_eig])
    return SpectralDecomposition(vals, vecs)


def graph_spectrum(g: Graph, method: str = "ql", n_eig: int | None = None) -> SpectralDecomposition:
    return eig_sym(normalized_laplacian(g), method=method, n_eig=n_eig)
