"""Heat kernel signatures and the histogram graph descriptor.

A graph is turned into a ``n_bins x n_steps`` matrix: for every diffusion
step the diagonal heat values of all nodes are standardized with statistics
fitted on training graphs and histogrammed into bins that are shared by all
graphs. The result does not depend on node order or node count.
"""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from . import _kernels
from .graph import Graph
from .spectral import SpectralDecomposition, graph_spectrum

STAT_EPS = 1e-8
DEFAULT_Z1 = 0.1
DEFAULT_ZN = 25.0
DEFAULT_STEPS = 64
DEFAULT_BINS = 64
# HKS values closer than this to the column mean are treated as equal to it;
# they differ only by eigensolver rounding and would otherwise flip across the
# bin edge at 0 when the sd sits at its floor
HKS_RESOLUTION = 1e-12


def diffusion_steps(z1: float = DEFAULT_Z1, zN: float = DEFAULT_ZN, N: int = DEFAULT_STEPS) -> np.ndarray:
    """``N`` diffusion times spaced evenly in log between ``z1`` and ``zN``."""
    if not (0 < z1 < zN):
        raise ValueError("need 0 < z1 < zN")
    if int(N) != N or N < 2:
        raise ValueError("N must be an integer >= 2")
    return np.geomspace(z1, zN, int(N))


def heat_kernel_diag(dec: SpectralDecomposition, steps: np.ndarray) -> np.ndarray:
    """HKS matrix ``H[i, j] = sum_k exp(-lambda_k z_j) phi_k(i)^2``."""
    steps = np.asarray(steps, dtype=np.float64)
    decay = np.exp(-np.outer(dec.eigenvalues, steps))
    return (dec.eigenvectors ** 2) @ decay


def hks(g: Graph, steps: np.ndarray, method: str = "ql", n_eig: int | None = None) -> np.ndarray:
    return heat_kernel_diag(graph_spectrum(g, method=method, n_eig=n_eig), steps)


@dataclass(frozen=True)
class DescriptorStats:
    """Column-wise mean and population sd of training HKS values."""

    means: np.ndarray
    sds: np.ndarray


@dataclass(frozen=True)
class PixelStats:
    means: np.ndarray
    sds: np.ndarray


def fit_stats(training_hks: Sequence[np.ndarray], eps: float = STAT_EPS) -> DescriptorStats:
    if len(training_hks) == 0:
        raise ValueError("need at least one training HKS matrix")
    pooled = np.concatenate([np.asarray(h, dtype=np.float64) for h in training_hks], axis=0)
    return DescriptorStats(pooled.mean(axis=0), np.maximum(pooled.std(axis=0), eps))


def histogram_descriptor(h: np.ndarray, stats: DescriptorStats, n_bins: int = DEFAULT_BINS) -> np.ndarray:
    """Per-column histogram of standardized HKS values, normalized by node count.

    Values below -1.2 sd land in bin 0, values at or above +1.2 sd in the last
    bin, and ``n_bins - 2`` equal half-open bins cover ``[-1.2, 1.2)``.
    """
    h = np.asarray(h, dtype=np.float64)
    if n_bins < 3:
        raise ValueError("n_bins must be >= 3")
    if h.ndim != 2 or h.shape[1] != len(stats.means) or len(stats.sds) != len(stats.means):
        raise ValueError("HKS columns do not match the fitted stats")
    if h.shape[0] == 0:
        raise ValueError("empty graph has no descriptor")
    h = np.where(np.abs(h - stats.means) <= HKS_RESOLUTION, stats.means, h)
    counts = _kernels.histogram_counts(h, stats.means, stats.sds, n_bins)
    return counts / float(h.shape[0])


def compute_descriptor(g: Graph, steps: np.ndarray, stats: DescriptorStats,
                       n_bins: int = DEFAULT_BINS, method: str = "ql") -> np.ndarray:
    return histogram_descriptor(hks(g, steps, method=method), stats, n_bins)


def fit_pixel_stats(descriptors: Sequence[np.ndarray]) -> PixelStats:
    if len(descriptors) == 0:
        raise ValueError("need at least one training descriptor")
    stack = np.stack([np.asarray(d, dtype=np.float64) for d in descriptors])
    # shift by the first descriptor: cells that never vary get an exact mean and sd 0
    shifted = stack - stack[0]
    return PixelStats(stack[0] + shifted.mean(axis=0), shifted.std(axis=0))


def pixel_normalize(descriptors: Sequence[np.ndarray] | np.ndarray, stats: PixelStats,
                    eps: float = STAT_EPS) -> np.ndarray:
    """Standardize each cell with training mean and ``sd + eps``."""
    stack = np.asarray(descriptors, dtype=np.float64)
    if stack.ndim == 2:
        stack = stack[None]
    if stack.shape[1:] != stats.means.shape:
        raise ValueError(f"descriptor shape {stack.shape[1:]} != stats shape {stats.means.shape}")
    return (stack - stats.means) / (stats.sds + eps)


def _hks_job(args):
    g, steps, method = args
    return hks(g, steps, method=method)


def hks_batch(graphs: Sequence[Graph], steps: np.ndarray, method: str = "ql",
              n_jobs: int = 1) -> list[np.ndarray]:
    """HKS for many graphs; output order follows input order for any ``n_jobs``."""
    if n_jobs <= 1:
        return [hks(g, steps, method=method) for g in graphs]
    with ProcessPoolExecutor(max_workers=n_jobs) as pool:
        return list(pool.map(_hks_job, [(g, steps, method) for g in graphs], chunksize=16))


def write_descriptor_csv(path: str | Path, desc: np.ndarray) -> None:
    np.savetxt(path, desc, fmt="%.9g", delimiter=",")


def read_descriptor_csv(path: str | Path) -> np.ndarray:
    return np.loadtxt(path, delimiter=",", ndmin=2)


def write_pgm(path: str | Path, desc: np.ndarray) -> None:
    """Binary grayscale heatmap, one pixel per descriptor cell, max mapped to white."""
    desc = np.asarray(desc, dtype=np.float64)
    top = desc.max()
    img = np.zeros(desc.shape, dtype=np.uint8) if top <= 0 else np.rint(255.0 * desc / top).astype(np.uint8)
    rows, cols = img.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{cols} {rows}\n255\n".encode("ascii"))
        fh.write(img.tobytes())


def read_pgm(path: str | Path) -> np.ndarray:
    with open(path, "rb") as fh:
        data = fh.read()
    fields, pos = [], 0
    while len(fields) < 4:
        while data[pos:pos + 1].isspace():
            pos += 1
        start = pos
        while not data[pos:pos + 1].isspace():
            pos += 1
        fields.append(data[start:pos])
    if fields[0] != b"P5":
        raise ValueError("not a binary PGM file")
    cols, rows = int(fields[1]), int(fields[2])
    # exactly one whitespace byte separates the header from the raster
    return np.frombuffer(data[pos + 1:], dtype=np.uint8).reshape(rows, cols)
