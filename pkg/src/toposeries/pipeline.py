"""End-to-end featurization: embed, project, persist, summarize.

``featurize`` composes the module functions in order and labels any
failure with the step that raised it.  ``classify_demo`` runs the
three-generator classification experiment with a k-NN classifier.
"""
from __future__ import annotations

import csv
import io
import json
import os
import time
from dataclasses import asdict, dataclass, field, fields, replace

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.metrics import confusion_matrix
from sklearn.neighbors import KNeighborsClassifier

from ._validation import check_fraction, check_positive, check_positive_int
from .embedding import resolve_params, sliding_window_embed
from .exceptions import ComputationError, ConfigError, PipelineError, ScaleMismatchError
from .pca import pca_project
from .persistence import DEFAULT_SIMPLEX_CAP, PersistenceDiagram, cloud_persistence
from .summaries import FeatureVector, SummarySpec, truncate_infinite, vectorize
from .timeseries import GeneratorSpec, TimeSeries, generate, spawn_seeds

CONFIG_VERSION = 1
SEED_ENV = "TDA_SEED"
MODELS = ("arima112", "sinusoid", "ou")


def env_seed(seed: int) -> int:
    """``TDA_SEED`` from the environment if set, else ``seed``."""
    raw = os.environ.get(SEED_ENV)
    if raw is None or raw == "":
        return seed
    try:
        return int(raw)
    except ValueError as exc:
        raise ConfigError(f"{SEED_ENV} must be an integer, got {raw!r}") from exc


def _auto_or_int(value, name: str):
    if value == "auto":
        return value
    if isinstance(value, str):
        try:
            value = int(value)
        except ValueError as exc:
            raise ConfigError(f"{name} must be an integer or 'auto', got {value!r}") from exc
    return check_positive_int(value, name)


@dataclass(frozen=True)
class PipelineConfig:
    m: int | str = 25
    tau: int | str = 5
    pca_dims: int = 3
    center: bool = False
    n_dim: int = 2
    d_max: float = 1.0
    summary: str = "landscape"
    order: int = 1
    q: float = 1.0
    kappa: float = 0.05
    concat: bool = False
    column: int | str = 0
    dt: float = 1.0
    simplex_cap: int = DEFAULT_SIMPLEX_CAP
    input: str | None = None
    output: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "m", _auto_or_int(self.m, "m"))
        object.__setattr__(self, "tau", _auto_or_int(self.tau, "tau"))
        check_positive_int(self.pca_dims, "pca_dims")
        check_positive_int(self.n_dim, "n_dim", minimum=0)
        check_positive(self.dt, "dt")
        check_positive_int(self.simplex_cap, "simplex_cap")
        self.summary_spec  # validates kind, order, q, kappa, d_max

    @property
    def summary_spec(self) -> SummarySpec:
        return SummarySpec(self.summary, self.order, self.q, self.kappa, self.d_max)

    def to_dict(self) -> dict:
        return {"version": CONFIG_VERSION, **asdict(self)}

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_dict(cls, data: dict) -> "PipelineConfig":
        return cls(**_checked_fields(cls, data))

    def merged(self, **overrides) -> "PipelineConfig":
        """Copy with every non-``None`` override applied."""
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})


def _checked_fields(cls, data: dict) -> dict:
    data = dict(data)
    version = data.pop("version", CONFIG_VERSION)
    if version != CONFIG_VERSION:
        raise ConfigError(f"unsupported config version {version!r}; expected {CONFIG_VERSION}")
    known = {f.name for f in fields(cls)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    return data


def load_config(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a JSON object")
    return data


def _step(name: str, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except (ConfigError, ComputationError, ScaleMismatchError) as exc:
        raise PipelineError(name, exc) from exc


def diagram_of(config: PipelineConfig, x):
    """Embedding parameters, PCA result and persistence diagram of one series."""
    params = _step("embed", resolve_params, x, config.m, config.tau)
    cloud = _step("embed", sliding_window_embed, x, params)
    pca = _step("pca", pca_project, cloud, config.pca_dims, config.center)
    dgm = _step("persistence", cloud_persistence, pca.projected, config.n_dim, config.d_max, config.simplex_cap)
    return params, pca, dgm


def featurize(config: PipelineConfig, x) -> FeatureVector:
    """Algorithm output: ``n_dim + 1`` summary vectors of length ``ceil(d_max / kappa)``."""
    params, pca, dgm = diagram_of(config, x)
    spec = config.summary_spec
    dgm = _step("truncate", truncate_infinite, dgm, config.d_max)
    fv = _step("vectorize", vectorize, dgm, spec, config.concat)
    fv.metadata = {
        "m": params.m,
        "tau": params.tau,
        "n_points": int(pca.projected.shape[0]),
        "eigenvalues": pca.eigenvalues.tolist(),
        "explained": float(pca.explained[: config.pca_dims].sum()),
        "n_pairs": len(dgm),
    }
    return fv


def featurize_many(config: PipelineConfig, series) -> FeatureVector:
    """Concatenate per-series features in input order (multivariate input)."""
    parts = [featurize(config, x) for x in series]
    if not parts:
        raise ConfigError("no series given")
    values = np.concatenate([p.flat for p in parts])
    dims = tuple(d for p in parts for d in p.dims)
    return FeatureVector(values, dims, config.summary_spec, True, {"parts": [p.metadata for p in parts]})


class TopologicalFeaturizer(TransformerMixin, BaseEstimator):
    """sklearn wrapper around ``featurize``; each input row is one series."""

    def __init__(self, m=25, tau=5, pca_dims=3, center=False, n_dim=2, d_max=1.0,
                 summary="landscape", order=1, q=1.0, kappa=0.05, simplex_cap=DEFAULT_SIMPLEX_CAP):
        self.m = m
        self.tau = tau
        self.pca_dims = pca_dims
        self.center = center
        self.n_dim = n_dim
        self.d_max = d_max
        self.summary = summary
        self.order = order
        self.q = q
        self.kappa = kappa
        self.simplex_cap = simplex_cap

    def _config(self) -> PipelineConfig:
        return PipelineConfig(**self.get_params(), concat=True)

    def fit(self, X, y=None):
        self.config_ = self._config()
        return self

    def transform(self, X):
        config = getattr(self, "config_", None) or self._config()
        return np.stack([featurize(config, x).flat for x in X])


def h1_mass(fv: FeatureVector) -> float:
    """Grid integral of the H1 summary (0 if dimension 1 is absent)."""
    if 1 not in fv.dims:
        return 0.0
    return float(fv.vectors()[fv.dims.index(1)].sum() * fv.spec.kappa)


@dataclass
class ClassifyDemoConfig:
    sequences_per_class: int = 150
    N: int = 250
    knn_k: int = 5
    train_fraction: float = 0.7
    seed: int = 0
    pipeline: PipelineConfig = field(default_factory=PipelineConfig)
    grid: list | None = None
    validation_fraction: float = 0.25
    model_params: dict = field(default_factory=dict)
    n_jobs: int = 1

    def __post_init__(self):
        if isinstance(self.pipeline, dict):
            self.pipeline = PipelineConfig.from_dict(self.pipeline)
        check_positive_int(self.sequences_per_class, "sequences_per_class")
        check_positive_int(self.N, "N", minimum=2)
        check_positive_int(self.knn_k, "knn_k")
        check_fraction(self.train_fraction, "train_fraction")
        check_fraction(self.validation_fraction, "validation_fraction")
        check_positive_int(self.n_jobs, "n_jobs")
        unknown = set(self.model_params) - set(MODELS)
        if unknown:
            raise ConfigError(f"model_params keys must be among {MODELS}, got {sorted(unknown)}")
        if self.grid is not None:
            self.grid = [tuple(_auto_or_int(v, n) for v, n in zip(pt, ("m", "tau"))) for pt in self.grid]
            if not self.grid:
                raise ConfigError("grid is empty")

    def to_dict(self) -> dict:
        out = asdict(self)
        out["pipeline"] = self.pipeline.to_dict()
        return {"version": CONFIG_VERSION, **out}

    @classmethod
    def from_dict(cls, data: dict) -> "ClassifyDemoConfig":
        return cls(**_checked_fields(cls, data))


def parse_grid(text: str) -> list[tuple[int, int]]:
    """``"m=10,25,tau=1,5"`` -> the cartesian grid of ``(m, tau)`` pairs."""
    values: dict[str, list[int]] = {"m": [], "tau": []}
    key = None
    for token in (t.strip() for t in text.split(",") if t.strip()):
        if "=" in token:
            key, token = (s.strip() for s in token.split("=", 1))
            if key not in values:
                raise ConfigError(f"grid keys are m and tau, got {key!r}")
        if key is None:
            raise ConfigError(f"grid value {token!r} has no key")
        try:
            values[key].append(int(token))
        except ValueError as exc:
            raise ConfigError(f"grid value {token!r} is not an integer") from exc
    if not values["m"] or not values["tau"]:
        raise ConfigError("grid needs at least one m and one tau value")
    return [(m, tau) for m in values["m"] for tau in values["tau"]]


def _split_counts(n: int, fraction: float) -> tuple[int, int]:
    n_train = int(round(n * fraction))
    return n_train, n - n_train


def _split(labels: np.ndarray, fraction: float, rng: np.random.Generator):
    """Stratified index split; ``fraction`` of each class goes to the first part."""
    first, second = [], []
    for c in np.unique(labels):
        idx = rng.permutation(np.flatnonzero(labels == c))
        k, _ = _split_counts(len(idx), fraction)
        first.extend(idx[:k])
        second.extend(idx[k:])
    return np.sort(first).astype(int), np.sort(second).astype(int)


def demo_series(cfg: ClassifyDemoConfig) -> tuple[list[TimeSeries], np.ndarray]:
    """Seeded sequences from the three generators, class-major order."""
    n = cfg.sequences_per_class
    seeds = spawn_seeds(cfg.seed, n * len(MODELS))
    series, labels = [], []
    for c, kind in enumerate(MODELS):
        params = cfg.model_params.get(kind, {})
        for i in range(n):
            series.append(generate(GeneratorSpec(kind, cfg.N, seeds[c * n + i], params)))
            labels.append(c)
    return series, np.array(labels)


def _features(config: PipelineConfig, series, n_jobs: int) -> list[FeatureVector]:
    if n_jobs == 1:
        return [featurize(config, x) for x in series]
    from joblib import Parallel, delayed

    return Parallel(n_jobs=n_jobs)(delayed(featurize)(config, x) for x in series)


def _knn_accuracy(F_train, y_train, F_test, y_test, k: int):
    model = KNeighborsClassifier(n_neighbors=k).fit(F_train, y_train)
    pred = model.predict(F_test)
    return float(np.mean(pred == y_test)), pred


@dataclass
class DemoReport:
    accuracy: float
    error_rate: float
    confusion: list
    classes: list
    n_train: int
    n_test: int
    m: int
    tau: int
    h1_mass: dict
    grid_scores: list
    elapsed: float

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)


def classify_demo(cfg: ClassifyDemoConfig) -> DemoReport:
    """Featurize seeded sequences from the three generators and score a k-NN classifier.

    With a grid, each ``(m, tau)`` is scored by validation accuracy on a
    held-out part of the training split and the winner is refit on the
    whole training split.
    """
    start = time.perf_counter()
    n = cfg.sequences_per_class
    n_train, n_test = _split_counts(n, cfg.train_fraction)
    if n_test == 0:
        raise ConfigError(f"train_fraction {cfg.train_fraction} leaves no test sequences with {n} per class")
    if n_train == 0:
        raise ConfigError(f"train_fraction {cfg.train_fraction} leaves no training sequences with {n} per class")
    if cfg.knn_k > n_train * len(MODELS):
        raise ConfigError(f"knn_k = {cfg.knn_k} exceeds the {n_train * len(MODELS)} training sequences")

    series, labels = demo_series(cfg)
    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    train, test = _split(labels, cfg.train_fraction, rng)

    grid_scores = []
    base = cfg.pipeline.merged(concat=True)
    if cfg.grid:
        fit_idx, val_idx = _split(labels[train], 1 - cfg.validation_fraction, rng)
        if len(val_idx) == 0 or len(fit_idx) < cfg.knn_k:
            raise ConfigError("training split too small for grid validation")
        for m, tau in cfg.grid:
            config = base.merged(m=m, tau=tau)
            F = [fv.flat for fv in _features(config, [series[i] for i in train], cfg.n_jobs)]
            F = np.stack(F)
            acc, _ = _knn_accuracy(F[fit_idx], labels[train][fit_idx], F[val_idx], labels[train][val_idx], cfg.knn_k)
            grid_scores.append({"m": m, "tau": tau, "validation_accuracy": acc})
        # first grid point wins ties
        best = max(range(len(grid_scores)), key=lambda i: (grid_scores[i]["validation_accuracy"], -i))
        base = base.merged(m=cfg.grid[best][0], tau=cfg.grid[best][1])

    fvs = _features(base, series, cfg.n_jobs)
    F = np.stack([fv.flat for fv in fvs])
    acc, pred = _knn_accuracy(F[train], labels[train], F[test], labels[test], cfg.knn_k)
    cm = confusion_matrix(labels[test], pred, labels=list(range(len(MODELS))))
    mass = {kind: float(np.mean([h1_mass(fvs[i]) for i in np.flatnonzero(labels == c)]))
            for c, kind in enumerate(MODELS)}
    return DemoReport(
        accuracy=acc,
        error_rate=1 - acc,
        confusion=cm.tolist(),
        classes=list(MODELS),
        n_train=len(train),
        n_test=len(test),
        m=fvs[0].metadata["m"],
        tau=fvs[0].metadata["tau"],
        h1_mass=mass,
        grid_scores=grid_scores,
        elapsed=time.perf_counter() - start,
    )


def emit_plot_data(obj) -> str:
    """CSV text: ``dim,t,value`` rows for a feature vector, ``birth,death,dim`` rows for a diagram."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    if isinstance(obj, PersistenceDiagram):
        writer.writerow(["birth", "death", "dim"])
        for p in obj:
            writer.writerow([repr(float(p.birth)), "inf" if np.isinf(p.death) else repr(float(p.death)), p.dim])
    elif isinstance(obj, FeatureVector):
        writer.writerow(["dim", "t", "value"])
        grid = obj.spec.grid
        for dim, vec in zip(obj.dims, obj.vectors()):
            for t, v in zip(grid, vec):
                writer.writerow([dim, repr(float(t)), repr(float(v))])
    else:
        raise ConfigError(f"cannot emit plot data for {type(obj).__name__}")
    return buf.getvalue()

