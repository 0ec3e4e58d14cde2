"""Distances between diagrams, point clouds and feature vectors."""
from __future__ import annotations

import math

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching
from scipy.spatial.distance import cdist

from ._validation import check_cloud
from .exceptions import ConfigError, ScaleMismatchError
from .persistence import DIAMETER, RADIUS, PersistenceDiagram, check_same_scale


def _split(pairs) -> tuple[np.ndarray, np.ndarray]:
    pairs = np.asarray(pairs, dtype=float).reshape(-1, 2)
    inf = np.isinf(pairs[:, 1])
    return pairs[~inf], np.sort(pairs[inf, 0])


def _cost_tables(A: np.ndarray, B: np.ndarray):
    pair_cost = np.abs(A[:, None, :] - B[None, :, :]).max(axis=2) if len(A) and len(B) else np.zeros((len(A), len(B)))
    return pair_cost, (A[:, 1] - A[:, 0]) / 2, (B[:, 1] - B[:, 0]) / 2


def _feasible(pair_cost, half_a, half_b, r: float) -> bool:
    # left: points of A, then diagonal slots for B; right: points of B, then slots for A
    k, l = len(half_a), len(half_b)
    size = k + l
    if size == 0:
        return True
    if np.any(np.minimum(half_a, pair_cost.min(axis=1) if l else np.inf) > r):
        return False
    if np.any(np.minimum(half_b, pair_cost.min(axis=0) if k else np.inf) > r):
        return False
    block = np.zeros((size, size), dtype=bool)
    block[:k, :l] = pair_cost <= r
    block[np.arange(k), l + np.arange(k)] = half_a <= r
    block[k + np.arange(l), np.arange(l)] = half_b <= r
    block[k:, l:] = True
    match = maximum_bipartite_matching(csr_matrix(block), perm_type="column")
    return bool(np.all(match >= 0))


def matching_feasible(A, B, r: float) -> bool:
    """Whether finite diagrams ``A`` and ``B`` admit a matching with all costs ``<= r``."""
    A, _ = _split(A)
    B, _ = _split(B)
    return _feasible(*_cost_tables(A, B), r)


def bottleneck_pairs(A, B) -> float:
    """Bottleneck distance between two single-dimension arrays of (birth, death) pairs.

    Essential pairs (infinite death) are matched with each other by sorted
    birth; unequal counts give ``inf``.
    """
    A, inf_a = _split(A)
    B, inf_b = _split(B)
    if len(inf_a) != len(inf_b):
        return math.inf
    essential = float(np.max(np.abs(inf_a - inf_b))) if len(inf_a) else 0.0

    pair_cost, half_a, half_b = _cost_tables(A, B)
    candidates = np.unique(np.concatenate([[0.0], pair_cost.ravel(), half_a, half_b]))
    lo, hi = 0, len(candidates) - 1
    # largest candidate always works: each point can go to the diagonal
    while lo < hi:
        mid = (lo + hi) // 2
        if _feasible(pair_cost, half_a, half_b, candidates[mid]):
            hi = mid
        else:
            lo = mid + 1
    return max(essential, float(candidates[lo]))


def bottleneck(D1: PersistenceDiagram, D2: PersistenceDiagram, dim: int) -> float:
    """Bottleneck distance between the dimension-``dim`` parts of two diagrams."""
    check_same_scale(D1, D2)
    return bottleneck_pairs(D1.in_dim(dim), D2.in_dim(dim))


def bottleneck_all(D1: PersistenceDiagram, D2: PersistenceDiagram, dims=None) -> float:
    """Largest per-dimension bottleneck distance."""
    check_same_scale(D1, D2)
    dims = range(max(D1.n_dim, D2.n_dim) + 1) if dims is None else dims
    return max(bottleneck(D1, D2, k) for k in dims)


def hausdorff(X, Y) -> float:
    X, Y = check_cloud(X), check_cloud(Y)
    if X.shape[1] != Y.shape[1]:
        raise ConfigError(f"dimension mismatch: {X.shape[1]} vs {Y.shape[1]}")
    d = cdist(X, Y)
    return float(max(d.min(axis=1).max(), d.min(axis=0).max()))


def linf_grid(f1, f2) -> float:
    """Largest componentwise difference of two feature vectors built with the same spec."""
    if f1.spec != f2.spec or tuple(f1.dims) != tuple(f2.dims):
        raise ConfigError("feature vectors were built with different specs")
    a, b = f1.flat, f2.flat
    if a.shape != b.shape:
        raise ConfigError("feature vectors have different lengths")
    return float(np.max(np.abs(a - b))) if a.size else 0.0


def prop51_bound(
    L_f: float, T: float, N: int, noise_sup: float, m: int, lambda_l: float, scale: str = RADIUS
) -> float:
    """Sampling-noise bound on the bottleneck distance to the continuous embedding.

    ``sqrt(m) e + 2 m^1.5 L_f T e (2 L_f T + e) / lambda_l + sqrt(m) L_f T / N``
    with ``e = noise_sup``.  The value is in the radius convention unless
    ``scale="diameter"`` asks for twice that.
    """
    if not lambda_l > 0:
        raise ConfigError(f"lambda_l must be > 0, got {lambda_l}")
    if scale not in (RADIUS, DIAMETER):
        raise ScaleMismatchError(f"unknown scale {scale!r}")
    e = noise_sup
    rm = math.sqrt(m)
    rhs = rm * e + 2 * m**1.5 * L_f * T * e * (2 * L_f * T + e) / lambda_l + rm * L_f * T / N
    return 2 * rhs if scale == DIAMETER else rhs
