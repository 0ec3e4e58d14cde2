"""Landscape and silhouette summaries of persistence diagrams, sampled on a grid."""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from ._validation import check_positive, check_positive_int
from .exceptions import ConfigError, ScaleMismatchError
from .persistence import DIAMETER, SCALES, PersistenceDiagram

LANDSCAPE = "landscape"
SILHOUETTE = "silhouette"


@dataclass(frozen=True)
class SummarySpec:
    kind: str = LANDSCAPE
    order: int = 1
    q: float = 1.0
    kappa: float = 0.05
    d_max: float = 1.0
    scale: str = DIAMETER

    def __post_init__(self):
        if self.kind not in (LANDSCAPE, SILHOUETTE):
            raise ConfigError(f"summary kind must be 'landscape' or 'silhouette', got {self.kind!r}")
        check_positive_int(self.order, "order")
        check_positive(self.q, "q")
        check_positive(self.kappa, "kappa")
        check_positive(self.d_max, "d_max")
        if not math.isfinite(self.d_max):
            raise ConfigError("d_max must be finite for vectorization")
        if self.scale not in SCALES:
            raise ConfigError(f"unknown scale convention {self.scale!r}")

    @property
    def grid_size(self) -> int:
        # absorb representation error such as 1.1 / 0.1 = 11.000000000000002
        return max(1, math.ceil(self.d_max / self.kappa - 1e-9))

    @property
    def grid(self) -> np.ndarray:
        """Cell midpoints ``(i + 0.5) * kappa``."""
        return (np.arange(self.grid_size) + 0.5) * self.kappa


@dataclass
class FeatureVector:
    """Per-dimension summary samples; ``values[k]`` belongs to homology dimension ``dims[k]``."""

    values: np.ndarray
    dims: tuple
    spec: SummarySpec
    concatenated: bool = False
    metadata: dict = field(default_factory=dict)

    @property
    def flat(self) -> np.ndarray:
        return np.asarray(self.values).reshape(-1)

    def vectors(self) -> list[np.ndarray]:
        return [np.asarray(v) for v in np.asarray(self.values).reshape(len(self.dims), -1)]

    def __len__(self) -> int:
        return self.flat.size

    def to_dict(self) -> dict:
        return {
            "spec": asdict(self.spec),
            "dims": list(self.dims),
            "concatenated": self.concatenated,
            "grid": self.spec.grid.tolist(),
            "values": [v.tolist() for v in self.vectors()],
            "metadata": self.metadata,
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_dict(cls, data: dict) -> "FeatureVector":
        spec = SummarySpec(**data["spec"])
        return cls(np.array(data["values"], dtype=float), tuple(data["dims"]), spec,
                   bool(data.get("concatenated", False)), dict(data.get("metadata", {})))


def _as_pairs(dgm, dim: int | None = None) -> np.ndarray:
    if isinstance(dgm, PersistenceDiagram):
        if dim is None:
            raise ConfigError("pass dim= when summarising a multi-dimensional diagram")
        return dgm.in_dim(dim)
    return np.asarray(dgm, dtype=float).reshape(-1, 2)


def tents(pairs, t) -> np.ndarray:
    """Tent values, shape ``(len(pairs), len(t))``."""
    pairs = np.asarray(pairs, dtype=float).reshape(-1, 2)
    if not np.all(np.isfinite(pairs)):
        raise ConfigError("tent functions need finite deaths; truncate infinite pairs first")
    t = np.atleast_1d(np.asarray(t, dtype=float))
    b, d = pairs[:, :1], pairs[:, 1:]
    return np.maximum(0.0, np.minimum(t[None, :] - b, d - t[None, :]))


def tent(p, t: float) -> float:
    """Tent of a single pair: rises with slope 1 from ``b``, falls to 0 at ``d``."""
    b, d = p
    if not math.isfinite(d) or not math.isfinite(b):
        raise ConfigError("tent functions need finite deaths; truncate infinite pairs first")
    if b >= d:
        raise ConfigError("tent needs birth < death")
    return float(tents([(b, d)], [t])[0, 0])


def landscape(pairs, order: int, t) -> np.ndarray:
    """``order``-th largest tent value at each ``t`` (0 where fewer tents are positive)."""
    check_positive_int(order, "order")
    vals = tents(pairs, t)
    if len(vals) < order:
        return np.zeros(vals.shape[1])
    # -np.sort(-x) keeps ties in place; partition would work too
    return -np.sort(-vals, axis=0)[order - 1]


def landscape_eval(dgm, j: int, t: float, dim: int | None = None) -> float:
    return float(landscape(_as_pairs(dgm, dim), j, [t])[0])


def silhouette(pairs, q: float, t) -> np.ndarray:
    """Persistence-power weighted mean of the tents; zero for an empty diagram."""
    check_positive(q, "q")
    pairs = np.asarray(pairs, dtype=float).reshape(-1, 2)
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if len(pairs) == 0:
        return np.zeros(len(t))
    pers = np.abs(pairs[:, 1] - pairs[:, 0])
    top = pers.max()
    if top == 0:
        return np.zeros(len(t))
    # weights rescaled by the largest persistence so large q cannot overflow
    w = (pers / top) ** q
    return (w @ tents(pairs, t)) / w.sum()


def silhouette_eval(dgm, q: float, t: float, dim: int | None = None) -> float:
    return float(silhouette(_as_pairs(dgm, dim), q, [t])[0])


def truncate_infinite(dgm: PersistenceDiagram, d_max: float) -> PersistenceDiagram:
    """Clamp deaths to ``d_max`` and drop pairs born at or after it."""
    check_positive(d_max, "d_max")
    pairs = [(p.dim, p.birth, min(p.death, d_max)) for p in dgm if p.birth < d_max]
    return PersistenceDiagram(pairs, dgm.n_dim, dgm.scale)


def summarize(pairs, spec: SummarySpec) -> np.ndarray:
    """Grid samples of one dimension's summary."""
    if spec.kind == LANDSCAPE:
        return landscape(pairs, spec.order, spec.grid)
    return silhouette(pairs, spec.q, spec.grid)


def vectorize(dgm: PersistenceDiagram, spec: SummarySpec, concat: bool = False, dims=None) -> FeatureVector:
    """Sample the chosen summary of every homology dimension ``0..dgm.n_dim``."""
    if dgm.scale != spec.scale:
        raise ScaleMismatchError(f"diagram is in {dgm.scale} scale but the summary expects {spec.scale}")
    dims = tuple(range(dgm.n_dim + 1)) if dims is None else tuple(dims)
    dgm = truncate_infinite(dgm, spec.d_max)
    values = np.stack([summarize(dgm.in_dim(k), spec) for k in dims]) if dims else np.zeros((0, spec.grid_size))
    if concat:
        values = values.reshape(-1)
    return FeatureVector(values, dims, spec, concat)


class DiagramVectorizer(TransformerMixin, BaseEstimator):
    """Turn a list of persistence diagrams into a feature matrix."""

    def __init__(self, kind=LANDSCAPE, order=1, q=1.0, kappa=0.05, d_max=1.0, scale=DIAMETER):
        self.kind = kind
        self.order = order
        self.q = q
        self.kappa = kappa
        self.d_max = d_max
        self.scale = scale

    def _spec(self) -> SummarySpec:
        return SummarySpec(self.kind, self.order, self.q, self.kappa, self.d_max, self.scale)

    def fit(self, X, y=None):
        self.spec_ = self._spec()
        return self

    def transform(self, X):
        spec = getattr(self, "spec_", None) or self._spec()
        return np.stack([vectorize(d, spec, concat=True).values for d in X])
