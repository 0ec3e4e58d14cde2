"""Empirical check of the sampling-noise stability bounds.

Each trial draws a sinusoid ``f(t) = A sin(w t + phase)`` whose frequency is
resonant with the embedding window (``w * tau * dt * m`` is a multiple of
pi).  Its delay embedding is then a round circle of radius ``A sqrt(m/2)``
inside a 2-D subspace through the origin, so the persistence of the
continuous embedding is known exactly: one essential component and one loop
that dies at diameter ``sqrt(3)`` times the radius.  With ``m = 1`` the
embedding is an interval and only the essential component remains.

The noisy sample goes through embedding, uncentered PCA and Rips
persistence; bottleneck, landscape and silhouette distances to the exact
diagram are compared with the bound in the radius convention.  Both
diagrams are truncated at the same ``d_max`` first, which cannot increase
their bottleneck distance.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from ._validation import check_positive, check_positive_int
from .embedding import EmbeddingParams, sliding_window_embed
from .exceptions import ConfigError
from .metrics import bottleneck, prop51_bound
from .pca import pca_project, second_moment_spectrum
from .persistence import DEFAULT_SIMPLEX_CAP, RADIUS, PersistenceDiagram, cloud_persistence
from .summaries import landscape, silhouette, truncate_infinite

NUMERIC_TOL = 1e-9
REFERENCES = ("analytic", "dense")


@dataclass
class StabilityConfig:
    L_f: float = 1.0
    N: int = 100
    noise_sup: float = 0.0
    m: int = 4
    tau: int = 5
    l: int | None = None
    trials: int = 100
    seed: int = 0
    T: float | None = None
    d_max_fraction: float = 0.25
    grid_points: int = 50
    q: float = 1.0
    order: int = 1
    reference: str = "analytic"
    oversample: int = 20
    simplex_cap: int = DEFAULT_SIMPLEX_CAP

    def __post_init__(self):
        check_positive(self.L_f, "L_f")
        check_positive_int(self.N, "N", minimum=2)
        if self.noise_sup < 0:
            raise ConfigError("noise_sup must be >= 0")
        check_positive_int(self.m, "m")
        check_positive_int(self.tau, "tau")
        check_positive_int(self.trials, "trials")
        check_positive(self.d_max_fraction, "d_max_fraction")
        check_positive_int(self.grid_points, "grid_points")
        check_positive_int(self.oversample, "oversample")
        if self.l is None:
            self.l = min(2, self.m)
        check_positive_int(self.l, "l")
        if self.l > self.m:
            raise ConfigError(f"l = {self.l} exceeds m = {self.m}")
        if self.T is None:
            self.T = float(self.N)
        check_positive(self.T, "T")
        if self.reference not in REFERENCES:
            raise ConfigError(f"reference must be one of {REFERENCES}")
        if self.m > 1 and self.l < 2:
            raise ConfigError("a circle embedding needs l >= 2")
        if self.N - (self.m - 1) * self.tau < 2:
            raise ConfigError("series too short for the embedding window")

    @property
    def dt(self) -> float:
        return self.T / self.N

    def bound(self, lambda_l: float, noise: float | None = None) -> float:
        """Radius-convention right-hand side of the sampling stability bound."""
        e = self.noise_sup if noise is None else noise
        return prop51_bound(self.L_f, self.T, self.N, e, self.m, lambda_l)

    @classmethod
    def from_dict(cls, data: dict) -> "StabilityConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known - {"version"}
        if unknown:
            raise ConfigError(f"unknown stability config keys: {sorted(unknown)}")
        return cls(**{k: v for k, v in data.items() if k in known})


@dataclass
class TrialResult:
    trial: int
    frequency: float
    amplitude: float
    radius: float
    noise: float
    lambda_l: float
    n_positive: int
    d_max: float
    rhs: float
    slack: float
    bottleneck: float
    landscape: float
    silhouette: float
    per_dim: dict
    passed: bool

    @property
    def ratio(self) -> float:
        worst = max(self.bottleneck, self.landscape, self.silhouette)
        return worst / (self.rhs + self.slack)


@dataclass
class StabilityReport:
    config: StabilityConfig
    trials: list[TrialResult] = field(default_factory=list)

    @property
    def all_passed(self) -> bool:
        return all(t.passed for t in self.trials)

    @property
    def n_passed(self) -> int:
        return sum(t.passed for t in self.trials)

    @property
    def max_ratio(self) -> float:
        return max((t.ratio for t in self.trials), default=0.0)

    def to_dict(self) -> dict:
        return {
            "config": asdict(self.config),
            "all_passed": self.all_passed,
            "passed": self.n_passed,
            "trials_run": len(self.trials),
            "max_ratio": self.max_ratio,
            "trials": [asdict(t) for t in self.trials],
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)


def resonant_orders(cfg: StabilityConfig) -> list[int]:
    """Admissible ``j`` for ``w = pi j / (m tau dt)``.

    ``j`` must not be a multiple of ``m`` (the window would collapse onto a
    segment) and one period must fit inside the embedded time span.
    """
    if cfg.m == 1:
        return []
    span = cfg.N - 1 - (cfg.m - 1) * cfg.tau
    window = cfg.m * cfg.tau
    return [j for j in range(1, window) if j % cfg.m and 2 * window / j <= span]


def build_signal(cfg: StabilityConfig, rng: np.random.Generator):
    """Draw ``(frequency, amplitude, phase)`` for one trial."""
    if cfg.m == 1:
        period = rng.uniform(4.0, max(5.0, cfg.N / 2.0)) * cfg.dt
        omega = 2 * math.pi / period
    else:
        orders = resonant_orders(cfg)
        if not orders:
            raise ConfigError("no resonant frequency fits: increase N or decrease m*tau")
        j = int(rng.choice(orders))
        omega = math.pi * j / (cfg.m * cfg.tau * cfg.dt)
    amplitude = cfg.L_f / omega
    phase = float(rng.uniform(0, 2 * math.pi))
    return omega, amplitude, phase


def exact_diagram(cfg: StabilityConfig, amplitude: float) -> PersistenceDiagram:
    """Diameter-convention diagram of the continuous embedding."""
    pairs = [(0, 0.0, math.inf)]
    if cfg.m > 1:
        radius = amplitude * math.sqrt(cfg.m / 2)
        pairs.append((1, 0.0, math.sqrt(3.0) * radius))
    return PersistenceDiagram(pairs, 1)


def dense_diagram(cfg: StabilityConfig, omega, amplitude, phase, d_max) -> tuple[PersistenceDiagram, float]:
    """Diagram of an oversampled clean embedding plus the Hausdorff slack it carries."""
    k = cfg.oversample
    t = np.arange((cfg.N - 1) * k + 1) * cfg.dt / k
    fine = amplitude * np.sin(omega * t + phase)
    cloud = sliding_window_embed(fine, EmbeddingParams(cfg.m, cfg.tau * k))
    proj = pca_project(cloud, cfg.l).projected
    dgm = cloud_persistence(proj, 1, d_max, cfg.simplex_cap)
    slack = math.sqrt(cfg.m) * cfg.L_f * cfg.T / (k * cfg.N)
    return dgm, slack


def run_trial(cfg: StabilityConfig, index: int, seed: int) -> TrialResult:
    rng = np.random.Generator(np.random.PCG64(seed))
    omega, amplitude, phase = build_signal(cfg, rng)
    t = np.arange(cfg.N) * cfg.dt
    clean = amplitude * np.sin(omega * t + phase)
    eps = rng.uniform(-cfg.noise_sup, cfg.noise_sup, cfg.N) if cfg.noise_sup > 0 else np.zeros(cfg.N)
    params = EmbeddingParams(cfg.m, cfg.tau)

    vals, _, _ = second_moment_spectrum(sliding_window_embed(clean, params))
    positive = vals[: cfg.l][vals[: cfg.l] > 0]
    if len(positive) == 0:
        raise ConfigError("clean embedding has no positive eigenvalue")
    lambda_l = float(positive[-1])

    radius = amplitude * math.sqrt(cfg.m / 2)
    d_max = cfg.d_max_fraction * (radius if cfg.m > 1 else amplitude)
    projected = pca_project(sliding_window_embed(clean + eps, params), cfg.l).projected
    observed = cloud_persistence(projected, 1, d_max, cfg.simplex_cap)
    if cfg.reference == "analytic":
        reference, slack = exact_diagram(cfg, amplitude), 0.0
    else:
        reference, slack = dense_diagram(cfg, omega, amplitude, phase, d_max)

    a = truncate_infinite(observed, d_max).to_scale(RADIUS)
    b = truncate_infinite(reference, d_max).to_scale(RADIUS)
    grid = (np.arange(cfg.grid_points) + 0.5) * (d_max / 2) / cfg.grid_points
    per_dim = {}
    for k in (0, 1):
        pa, pb = a.in_dim(k), b.in_dim(k)
        per_dim[k] = {
            "bottleneck": bottleneck(a, b, k),
            "landscape": float(np.max(np.abs(landscape(pa, cfg.order, grid) - landscape(pb, cfg.order, grid)))),
            "silhouette": float(np.max(np.abs(silhouette(pa, cfg.q, grid) - silhouette(pb, cfg.q, grid)))),
        }
    noise = float(np.max(np.abs(eps)))
    rhs = cfg.bound(lambda_l, noise)
    worst = {key: max(d[key] for d in per_dim.values()) for key in ("bottleneck", "landscape", "silhouette")}
    passed = all(v <= rhs + slack + NUMERIC_TOL for v in worst.values())
    return TrialResult(
        trial=index,
        frequency=omega,
        amplitude=amplitude,
        radius=radius,
        noise=noise,
        lambda_l=lambda_l,
        n_positive=int(np.count_nonzero(vals > 0)),
        d_max=d_max,
        rhs=rhs,
        slack=slack,
        per_dim={str(k): v for k, v in per_dim.items()},
        passed=passed,
        **worst,
    )


def run_stability_suite(cfg: StabilityConfig) -> StabilityReport:
    """Run ``cfg.trials`` independent trials with per-trial seeded streams."""
    seeds = [int(s.generate_state(1, dtype=np.uint64)[0]) for s in np.random.SeedSequence(cfg.seed).spawn(cfg.trials)]
    report = StabilityReport(cfg)
    for i, s in enumerate(seeds):
        report.trials.append(run_trial(cfg, i, s))
    return report
