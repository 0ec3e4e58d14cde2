"""Univariate series: CSV ingest, returns, and seeded synthetic generators."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ._validation import check_positive, check_positive_int, check_series
from .exceptions import ConfigError

GENERATOR_KINDS = ("arima112", "composite-sinusoid", "ornstein-uhlenbeck")
KIND_ALIASES = {
    "arima": "arima112",
    "arima112": "arima112",
    "sinusoid": "composite-sinusoid",
    "composite-sinusoid": "composite-sinusoid",
    "ou": "ornstein-uhlenbeck",
    "ornstein-uhlenbeck": "ornstein-uhlenbeck",
}

ARIMA_DEFAULTS = {"phi1": 0.4, "theta1": 0.2, "theta2": 0.1, "current": 1.0, "burn_in": 0}
SINUSOID_DEFAULTS = {"low": 1.45, "high": 1.55, "dt": 1.0}
OU_DEFAULTS = {"theta": -0.5, "mu": 0.0, "sigma": 0.5, "dt": 1.0}


@dataclass(frozen=True)
class TimeSeries:
    """Equispaced real samples starting at ``origin`` with step ``dt``."""

    values: np.ndarray
    dt: float = 1.0
    origin: float = 0.0

    def __post_init__(self):
        values = check_series(self.values, "TimeSeries values")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        check_positive(self.dt, "dt")

    def __len__(self) -> int:
        return len(self.values)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype)

    @property
    def T(self) -> float:
        """Time of the last sample."""
        return self.origin + (len(self) - 1) * self.dt

    @property
    def times(self) -> np.ndarray:
        return self.origin + self.dt * np.arange(len(self))


@dataclass(frozen=True)
class GeneratorSpec:
    kind: str
    n: int = 250
    seed: int = 0
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        kind = KIND_ALIASES.get(self.kind)
        if kind is None:
            raise ConfigError(f"unknown generator kind {self.kind!r}; expected one of {GENERATOR_KINDS}")
        object.__setattr__(self, "kind", kind)
        check_positive_int(self.n, "n")
        if isinstance(self.seed, bool) or not isinstance(self.seed, (int, np.integer)):
            raise ConfigError(f"seed must be an integer, got {self.seed!r}")


def load_csv(path, column=0, dt: float = 1.0, origin: float = 0.0) -> TimeSeries:
    """Read one column of a CSV file as a :class:`TimeSeries`.

    ``column`` is a header name or a 0-based index.  A header row is detected
    when the selected cell of the first row does not parse as a number.
    Reported row numbers are 1-based file lines.
    """
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"no such file: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r and any(cell.strip() for cell in r)]
    if not rows:
        raise ConfigError(f"{path}: column is empty")

    header = None
    first = rows[0]
    if isinstance(column, str) and not column.lstrip("-").isdigit():
        header = [c.strip() for c in first]
        if column not in header:
            raise ConfigError(f"{path}: no column named {column!r}")
        idx = header.index(column)
    else:
        idx = int(column)
        if not _is_number(first[idx] if idx < len(first) else ""):
            header = first
    body = rows[1:] if header is not None else rows
    start = 2 if header is not None else 1

    values = []
    for lineno, row in enumerate(body, start=start):
        cell = row[idx].strip() if idx < len(row) else ""
        try:
            value = float(cell)
        except ValueError:
            raise ConfigError(f"{path}: row {lineno}: cannot parse {cell!r} as a number") from None
        if not math.isfinite(value):
            raise ConfigError(f"{path}: row {lineno}: non-finite value {cell!r}")
        values.append(value)
    if not values:
        raise ConfigError(f"{path}: column is empty")
    return TimeSeries(np.array(values), dt=dt, origin=origin)


def _is_number(cell: str) -> bool:
    try:
        float(cell)
    except ValueError:
        return False
    return True


def returns(prices: TimeSeries) -> TimeSeries:
    """Single-period simple returns ``(p_t - p_{t-1}) / p_{t-1}``."""
    p = check_series(prices, "prices", min_length=2)
    if np.any(p[:-1] == 0):
        raise ConfigError("zero price: returns are undefined")
    dt = getattr(prices, "dt", 1.0)
    origin = getattr(prices, "origin", 0.0) + dt
    return TimeSeries(np.diff(p) / p[:-1], dt=dt, origin=origin)


def prices_from_returns(r, p0: float) -> np.ndarray:
    """Inverse of :func:`returns` given the first price."""
    return p0 * np.concatenate([[1.0], np.cumprod(1.0 + np.asarray(r, dtype=float))])


def rng_for(seed: int) -> np.random.Generator:
    """PCG64 generator; identical streams on every platform for a given seed."""
    return np.random.Generator(np.random.PCG64(seed))


def spawn_seeds(seed: int, count: int) -> list[int]:
    """Independent per-sequence seeds derived from one master seed."""
    children = np.random.SeedSequence(seed).spawn(count)
    return [int(c.generate_state(1, dtype=np.uint64)[0]) for c in children]


def _params(spec: GeneratorSpec, defaults: dict) -> dict:
    unknown = set(spec.params) - set(defaults) - {"x0", "a", "b", "c", "d", "noise"}
    if unknown:
        raise ConfigError(f"unknown parameters for {spec.kind}: {sorted(unknown)}")
    return {**defaults, **spec.params}


def gen_arima112(spec: GeneratorSpec) -> TimeSeries:
    """ARIMA(1,1,2): ``x_t = x_{t-1} + phi1*dx_{t-1} + e_t - theta1*e_{t-1} - theta2*e_{t-2}``.

    Innovations are standard normal and all pre-sample values are zero.
    ``burn_in`` extra steps are simulated and discarded.  Passing
    ``noise=0`` zeroes every innovation; ``current`` scales the ``e_t`` term
    (0 drops it and leaves only the lagged innovations).
    """
    p = _params(spec, ARIMA_DEFAULTS)
    burn = check_positive_int(int(p["burn_in"]), "burn_in", minimum=0)
    total = spec.n + burn
    e = rng_for(spec.seed).standard_normal(total) * float(p.get("noise", 1.0))
    phi, th1, th2 = float(p["phi1"]), float(p["theta1"]), float(p["theta2"])
    cur = float(p["current"])
    x = np.zeros(total + 2)
    e = np.concatenate([[0.0, 0.0], e])
    for t in range(2, total + 2):
        x[t] = x[t - 1] + phi * (x[t - 1] - x[t - 2]) + cur * e[t] - th1 * e[t - 1] - th2 * e[t - 2]
    return TimeSeries(x[2 + burn:])


def gen_composite_sinusoid(spec: GeneratorSpec) -> TimeSeries:
    """``a sin(t) sin(b t) + c cos(t + d)`` at ``t = k*dt``.

    ``a, b, c, d`` are drawn once from ``Uniform[low, high]``; any of them can
    be fixed through ``spec.params``.
    """
    p = _params(spec, SINUSOID_DEFAULTS)
    dt = check_positive(float(p["dt"]), "dt")
    draws = rng_for(spec.seed).uniform(float(p["low"]), float(p["high"]), size=4)
    a, b, c, d = (float(p.get(name, draws[i])) for i, name in enumerate("abcd"))
    t = np.arange(spec.n) * dt
    values = a * np.sin(t) * np.sin(b * t) + c * np.cos(t + d)
    return TimeSeries(values, dt=dt)


def sinusoid_coefficients(spec: GeneratorSpec) -> tuple[float, float, float, float]:
    """The ``(a, b, c, d)`` that :func:`gen_composite_sinusoid` uses for ``spec``."""
    p = _params(spec, SINUSOID_DEFAULTS)
    draws = rng_for(spec.seed).uniform(float(p["low"]), float(p["high"]), size=4)
    return tuple(float(p.get(name, draws[i])) for i, name in enumerate("abcd"))


def gen_ou(spec: GeneratorSpec) -> TimeSeries:
    """Euler-Maruyama path of ``dx = theta (mu - x) dt + sigma dW`` starting at ``x0`` (default ``mu``)."""
    p = _params(spec, OU_DEFAULTS)
    dt = check_positive(float(p["dt"]), "dt")
    theta, mu, sigma = float(p["theta"]), float(p["mu"]), float(p["sigma"])
    z = rng_for(spec.seed).standard_normal(spec.n - 1)
    x = np.empty(spec.n)
    x[0] = float(p.get("x0", mu))
    step = sigma * math.sqrt(dt)
    for t in range(spec.n - 1):
        x[t + 1] = x[t] + theta * (mu - x[t]) * dt + step * z[t]
    return TimeSeries(x, dt=dt)


_GENERATORS = {
    "arima112": gen_arima112,
    "composite-sinusoid": gen_composite_sinusoid,
    "ornstein-uhlenbeck": gen_ou,
}


def generate(spec: GeneratorSpec) -> TimeSeries:
    return _GENERATORS[spec.kind](spec)


def parse_params(text: str | None) -> dict:
    """Parse ``k=v,k=v`` into a dict of floats (ints where integral)."""
    if not text:
        return {}
    out = {}
    for item in text.split(","):
        key, sep, value = item.partition("=")
        if not sep or not key.strip():
            raise ConfigError(f"malformed parameter {item!r}; expected key=value")
        try:
            num = float(value)
        except ValueError:
            raise ConfigError(f"parameter {key!r} is not a number: {value!r}") from None
        out[key.strip()] = int(num) if key.strip() in ("burn_in",) else num
    return out
