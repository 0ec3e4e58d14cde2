"""Vietoris-Rips persistent homology over the two-element field.

Simplices enter the filtration at their diameter (largest pairwise vertex
distance).  Diagrams carry a ``scale`` tag; the radius convention used by
the union-of-balls definition of the Rips complex halves every value.

The reduction stores each boundary column as a Python ``int`` bitset, so
adding two columns mod 2 is a single XOR and the pivot ("low") is
``bit_length() - 1``.  Dimensions are reduced from the top down and every
simplex that already appeared as a pivot in the dimension above is cleared
(its column would reduce to zero anyway).
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

import numpy as np
from scipy.spatial.distance import pdist, squareform

from ._validation import check_cloud
from .exceptions import ConfigError, ScaleMismatchError, SimplexBudgetError

DIAMETER = "diameter"
RADIUS = "radius"
SCALES = (DIAMETER, RADIUS)

ZERO_PERSISTENCE_TOL = 1e-12
DEFAULT_SIMPLEX_CAP = 5_000_000

# keep boolean candidate masks below ~32 MB per enumeration chunk
_MASK_BUDGET = 1 << 25


class PersistencePair(NamedTuple):
    dim: int
    birth: float
    death: float

    @property
    def persistence(self) -> float:
        return self.death - self.birth


@dataclass
class PersistenceDiagram:
    """Multiset of ``(dim, birth, death)`` pairs for dims ``0..n_dim``."""

    pairs: list[PersistencePair] = field(default_factory=list)
    n_dim: int = 0
    scale: str = DIAMETER

    def __post_init__(self):
        if self.scale not in SCALES:
            raise ConfigError(f"unknown scale convention {self.scale!r}")
        self.pairs = sorted(PersistencePair(int(d), float(b), float(e)) for d, b, e in self.pairs)

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)

    def in_dim(self, dim: int) -> np.ndarray:
        """``(k, 2)`` array of the (birth, death) pairs in homology dimension ``dim``."""
        rows = [(p.birth, p.death) for p in self.pairs if p.dim == dim]
        return np.array(rows, dtype=float).reshape(-1, 2)

    def multiset(self, dim: int | None = None) -> list[tuple[int, float, float]]:
        return sorted(tuple(p) for p in self.pairs if dim is None or p.dim == dim)

    def to_scale(self, scale: str) -> "PersistenceDiagram":
        """Return the diagram expressed in another filtration convention."""
        if scale not in SCALES:
            raise ConfigError(f"unknown scale convention {scale!r}")
        if scale == self.scale:
            return PersistenceDiagram(list(self.pairs), self.n_dim, self.scale)
        factor = 0.5 if scale == RADIUS else 2.0
        pairs = [(p.dim, p.birth * factor, p.death * factor) for p in self.pairs]
        return PersistenceDiagram(pairs, self.n_dim, scale)

    def to_dict(self) -> dict:
        return {
            "scale": self.scale,
            "n_dim": self.n_dim,
            "pairs": [
                {"dim": p.dim, "birth": p.birth, "death": "inf" if math.isinf(p.death) else p.death}
                for p in self.pairs
            ],
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_dict(cls, data: dict) -> "PersistenceDiagram":
        try:
            pairs = [
                (int(p["dim"]), float(p["birth"]), math.inf if p["death"] == "inf" else float(p["death"]))
                for p in data["pairs"]
            ]
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"malformed diagram JSON: {exc}") from exc
        n_dim = int(data.get("n_dim", max((p[0] for p in pairs), default=0)))
        return cls(pairs, n_dim, data.get("scale", DIAMETER))

    @classmethod
    def from_json(cls, text: str) -> "PersistenceDiagram":
        return cls.from_dict(json.loads(text))


def check_same_scale(*diagrams: PersistenceDiagram) -> str:
    scales = {d.scale for d in diagrams}
    if len(scales) > 1:
        raise ScaleMismatchError(f"diagrams use different conventions: {sorted(scales)}")
    return scales.pop() if scales else DIAMETER


def distance_matrix(X) -> np.ndarray:
    """Euclidean distance matrix of the rows of ``X``."""
    X = check_cloud(X)
    if len(X) == 1:
        return np.zeros((1, 1))
    return squareform(pdist(X))


def _check_distances(D) -> np.ndarray:
    D = np.asarray(D, dtype=float)
    if D.ndim != 2 or D.shape[0] != D.shape[1] or D.shape[0] == 0:
        raise ConfigError(f"distance matrix must be square and nonempty, got shape {D.shape}")
    if not np.all(np.isfinite(D)) or np.any(D < 0):
        raise ConfigError("distance matrix entries must be finite and nonnegative")
    if not np.allclose(D, D.T, rtol=0, atol=1e-12) or np.any(np.diag(D) != 0):
        raise ConfigError("distance matrix must be symmetric with zero diagonal")
    return D


def _keys(S: np.ndarray, n: int) -> np.ndarray:
    # base-n encoding of sorted vertex tuples; numeric order == lexicographic order
    key = np.zeros(len(S), dtype=np.int64)
    for c in range(S.shape[1]):
        key = key * n + S[:, c]
    return key


def rips_filtration(D, max_simplex_dim: int, d_max: float = math.inf, cap: int = DEFAULT_SIMPLEX_CAP):
    """Enumerate Rips simplices of dimension ``<= max_simplex_dim`` with diameter ``<= d_max``.

    Returns a list indexed by dimension of ``(vertices, values)`` arrays; the
    vertex rows of each dimension are in lexicographic order.
    """
    D = _check_distances(D)
    n = len(D)
    if n ** (max_simplex_dim + 1) >= 2**62:
        raise SimplexBudgetError(f"{n} points is too many for simplices of dimension {max_simplex_dim}")
    levels = [(np.arange(n, dtype=np.int64).reshape(-1, 1), np.zeros(n))]
    total = n
    if total > cap:
        raise SimplexBudgetError(_budget_message(cap))
    if max_simplex_dim == 0 or n == 1:
        return levels

    adj = np.triu(D <= d_max, k=1)
    i, j = np.nonzero(adj)
    edges = np.stack([i, j], axis=1).astype(np.int64)
    levels.append((edges, D[i, j].astype(float)))
    total += len(edges)
    if total > cap:
        raise SimplexBudgetError(_budget_message(cap))

    for _ in range(2, max_simplex_dim + 1):
        S, vals = levels[-1]
        if len(S) == 0:
            levels.append((np.zeros((0, S.shape[1] + 1), dtype=np.int64), np.zeros(0)))
            continue
        chunk = max(1, _MASK_BUDGET // n)
        new_s, new_v = [], []
        for start in range(0, len(S), chunk):
            block = S[start:start + chunk]
            mask = adj[block[:, 0]].copy()
            for c in range(1, block.shape[1]):
                mask &= adj[block[:, c]]
            rows, w = np.nonzero(mask)
            if len(rows) == 0:
                continue
            total += len(rows)
            if total > cap:
                raise SimplexBudgetError(_budget_message(cap))
            cand = block[rows]
            val = np.maximum(vals[start + rows], D[cand, w[:, None]].max(axis=1))
            new_s.append(np.concatenate([cand, w[:, None]], axis=1))
            new_v.append(val)
        if new_s:
            levels.append((np.concatenate(new_s), np.concatenate(new_v)))
        else:
            levels.append((np.zeros((0, S.shape[1] + 1), dtype=np.int64), np.zeros(0)))
    return levels


def _budget_message(cap: int) -> str:
    return f"Rips complex exceeds the simplex cap of {cap}; lower d_max or n_dim"


def _reduce_dimension(face_ranks, cleared):
    """Reduce one boundary matrix; columns arrive in filtration order.

    Returns ``(pairs, zero_columns)`` where ``pairs`` maps pivot row rank to
    column rank and ``zero_columns`` lists uncleared columns that reduced to 0.
    """
    pivots: dict[int, int] = {}
    pairs: list[tuple[int, int]] = []
    zero_columns: list[int] = []
    for j, faces in enumerate(face_ranks):
        if j in cleared:
            continue
        col = 0
        for r in faces:
            col ^= 1 << r
        while col:
            low = col.bit_length() - 1
            other = pivots.get(low)
            if other is None:
                pivots[low] = col
                pairs.append((low, j))
                break
            col ^= other
        else:
            zero_columns.append(j)
    return pairs, zero_columns


def rips_persistence(
    D,
    n_dim: int = 1,
    d_max: float = math.inf,
    cap: int = DEFAULT_SIMPLEX_CAP,
    tol: float = ZERO_PERSISTENCE_TOL,
) -> PersistenceDiagram:
    """Persistence diagram of the Rips filtration on a distance matrix.

    Parameters
    ----------
    D : (n, n) array_like
        Symmetric distance matrix with zero diagonal.
    n_dim : int
        Highest homology dimension reported.  Simplices up to dimension
        ``n_dim + 1`` are built.
    d_max : float
        Largest diameter included.  Classes still alive at ``d_max`` get
        ``death = inf``.
    cap : int
        Maximum number of simplices before :class:`SimplexBudgetError`.
    tol : float
        Pairs with ``death - birth <= tol`` are dropped.
    """
    if n_dim < 0:
        raise ConfigError("n_dim must be >= 0")
    if not d_max > 0:
        raise ConfigError("d_max must be > 0")
    D = _check_distances(D)
    # exact duplicates only add zero-length pairs, which are dropped anyway
    twin = np.triu(D == 0, k=1).any(axis=0)
    if twin.any():
        D = D[~twin][:, ~twin]
    levels = rips_filtration(D, n_dim + 1, d_max, cap)
    n = len(levels[0][0])
    top = len(levels) - 1

    # filtration order within each dimension: (value, lexicographic position)
    orders, ranks, sorted_vals = [], [], []
    for S, vals in levels:
        order = np.lexsort((np.arange(len(vals)), vals))
        rank = np.empty(len(order), dtype=np.int64)
        rank[order] = np.arange(len(order))
        orders.append(order)
        ranks.append(rank)
        sorted_vals.append(vals[order])

    out: list[tuple[int, float, float]] = []
    cleared: set[int] = set()
    for k in range(top, 0, -1):
        S = levels[k][0]
        if len(S) == 0:
            cleared = set()
            continue
        S = S[orders[k]]
        keys_below = _keys(levels[k - 1][0], n)
        face_ranks = np.empty((len(S), k + 1), dtype=np.int64)
        for c in range(k + 1):
            face = np.delete(S, c, axis=1)
            face_ranks[:, c] = ranks[k - 1][np.searchsorted(keys_below, _keys(face, n))]
        pairs, zero_cols = _reduce_dimension(face_ranks.tolist(), cleared)
        births, deaths = sorted_vals[k - 1], sorted_vals[k]
        for low, j in pairs:
            b, d = float(births[low]), float(deaths[j])
            if d - b > tol:
                out.append((k - 1, b, d))
        if k <= n_dim:
            out.extend((k, float(deaths[j]), math.inf) for j in zero_cols)
        cleared = {low for low, _ in pairs}
    # vertices are never cleared by a lower dimension
    out.extend((0, 0.0, math.inf) for r in range(n) if r not in cleared)
    return PersistenceDiagram(out, n_dim, DIAMETER)


def cloud_persistence(X, n_dim: int = 1, d_max: float = math.inf, cap: int = DEFAULT_SIMPLEX_CAP) -> PersistenceDiagram:
    """Convenience wrapper: ``rips_persistence(distance_matrix(X), ...)``."""
    return rips_persistence(distance_matrix(X), n_dim=n_dim, d_max=d_max, cap=cap)


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))
        self.size = [1] * n

    def find(self, a: int) -> int:
        root = a
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[a] != root:
            self.parent[a], a = root, self.parent[a]
        return root

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        return True


def h0_union_find(D, d_max: float = math.inf, tol: float = ZERO_PERSISTENCE_TOL) -> PersistenceDiagram:
    """Zero-dimensional diagram by Kruskal merging of edges sorted by length."""
    D = _check_distances(D)
    n = len(D)
    edges: Iterable = sorted(
        (D[i, j], i, j) for i in range(n) for j in range(i + 1, n) if D[i, j] <= d_max
    )
    uf = _UnionFind(n)
    pairs = []
    components = n
    for length, i, j in edges:
        if uf.union(i, j):
            components -= 1
            if length > tol:
                pairs.append((0, 0.0, float(length)))
    pairs.extend((0, 0.0, math.inf) for _ in range(components))
    return PersistenceDiagram(pairs, 0, DIAMETER)
