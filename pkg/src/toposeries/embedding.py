"""Sliding-window (delay) embedding and heuristics for its parameters."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from ._validation import check_cloud, check_fraction, check_positive_int, check_series
from .exceptions import ConfigError


@dataclass(frozen=True)
class EmbeddingParams:
    m: int
    tau: int = 1

    def __post_init__(self):
        check_positive_int(self.m, "m")
        check_positive_int(self.tau, "tau")

    @property
    def span(self) -> int:
        """Number of samples covered by one window, minus one."""
        return (self.m - 1) * self.tau

    def n_points(self, length: int) -> int:
        return length - self.span


def sliding_window_embed(x, params: EmbeddingParams) -> np.ndarray:
    """Trajectory matrix of ``x``.

    Row ``i`` is ``[x_i, x_{i+tau}, ..., x_{i+(m-1)tau}]`` for
    ``i = 0 .. len(x) - 1 - (m-1)*tau``, so the result has
    ``len(x) - (m-1)*tau`` rows and ``m`` columns.
    """
    x = check_series(x)
    n = params.n_points(len(x))
    if n < 1:
        raise ConfigError(
            f"window (m-1)*tau = {params.span} needs more than {params.span} samples, series has {len(x)}"
        )
    idx = np.arange(n)[:, None] + params.tau * np.arange(params.m)[None, :]
    return x[idx]


def estimate_embedding_dim(X, threshold: float = 0.99) -> int:
    """Smallest ``k`` whose top-``k`` singular values hold ``threshold`` of the squared mass.

    Always at least 1; a cloud of zeros returns 1.
    """
    X = check_cloud(X)
    threshold = check_fraction(threshold, "threshold")
    s2 = np.linalg.svd(X, compute_uv=False) ** 2
    total = s2.sum()
    if total == 0:
        return 1
    cumulative = np.cumsum(s2) / total
    k = int(np.searchsorted(cumulative, threshold - 1e-12) + 1)
    return max(1, min(k, len(s2)))


def autocorrelation(x, max_lag: int) -> np.ndarray:
    """Sample autocorrelation at lags ``0..max_lag`` (biased normalisation)."""
    x = check_series(x)
    xc = x - x.mean()
    denom = float(xc @ xc)
    if denom == 0:
        raise ConfigError("constant series has zero variance; autocorrelation undefined")
    return np.array([xc[: len(x) - k] @ xc[k:] for k in range(max_lag + 1)]) / denom


def estimate_delay_acf(x, max_lag: int = 50) -> int:
    """First lag at which the autocorrelation drops below ``1/e`` (``max_lag`` if never)."""
    x = check_series(x)
    check_positive_int(max_lag, "max_lag")
    if not len(x) > max_lag:
        raise ConfigError(f"max_lag must be smaller than the series length {len(x)}")
    acf = autocorrelation(x, max_lag)
    below = np.nonzero(acf[1:] < math.exp(-1))[0]
    return int(below[0] + 1) if len(below) else max_lag


def resolve_params(x, m="auto", tau="auto", threshold: float = 0.99, max_lag: int = 50, probe_m: int = 10):
    """Fill ``"auto"`` entries of ``(m, tau)`` from the series itself.

    The delay comes from the autocorrelation rule.  The dimension comes from
    the singular spectrum of a probe embedding with ``probe_m`` columns,
    capped so the window fits in the series.
    """
    x = check_series(x)
    if tau == "auto":
        tau = estimate_delay_acf(x, min(max_lag, len(x) - 1))
    tau = int(tau)
    if m == "auto":
        probe = max(1, min(probe_m, (len(x) - 1) // tau + 1))
        m = estimate_embedding_dim(sliding_window_embed(x, EmbeddingParams(probe, tau)), threshold)
    return EmbeddingParams(int(m), tau)


class SlidingWindowEmbedder(TransformerMixin, BaseEstimator):
    """Delay-embed each input series.

    ``transform`` accepts one series (1-D array) or a sequence of series and
    returns a point cloud or a list of point clouds.  With ``m="auto"`` or
    ``tau="auto"`` the parameters are estimated in ``fit`` from the first
    series.
    """

    def __init__(self, m=3, tau=1, threshold=0.99, max_lag=50):
        self.m = m
        self.tau = tau
        self.threshold = threshold
        self.max_lag = max_lag

    def fit(self, X, y=None):
        first = _first_series(X)
        self.params_ = resolve_params(first, self.m, self.tau, self.threshold, self.max_lag)
        return self

    def transform(self, X):
        params = getattr(self, "params_", None)
        if params is None:
            if "auto" in (self.m, self.tau):
                raise ConfigError("fit the embedder before transforming with automatic parameters")
            params = EmbeddingParams(int(self.m), int(self.tau))
        if _is_single(X):
            return sliding_window_embed(X, params)
        return [sliding_window_embed(x, params) for x in X]


def _is_single(X) -> bool:
    arr = getattr(X, "values", X)
    return isinstance(arr, np.ndarray) and arr.ndim == 1 or (
        isinstance(arr, (list, tuple)) and len(arr) > 0 and np.isscalar(arr[0])
    )


def _first_series(X):
    return X if _is_single(X) else X[0]
