"""Price-pattern labels over a forward horizon and a rolling train/test evaluator.

Patterns, for a price path ``p`` with one-period returns ``r_t = (p_t - p_{t-1}) / p_{t-1}``:

* ``P1``: the next return ``r_{t+1}``, split into down / neutral / up.
* ``P2``: whether some return in ``(t, t+k]`` exceeds the ``1 - alpha``
  quantile of returns (a rare jump).
* ``P3``: whether some return in ``(t, t+k]`` falls below the ``alpha``
  quantile (a rare drop).
* ``P4``: average slope of the trailing ``k``-point moving average over
  ``[t, t+k]``, split into down / neutral / up.

Thresholds are fitted on each training window only: tertiles of the
statistic for the three-class patterns, return quantiles for the binary
ones.  Labels in the following test window reuse those thresholds.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from ._validation import check_fraction, check_positive_int, check_series
from .exceptions import ConfigError

PATTERNS = ("P1", "P2", "P3", "P4")
N_CLASSES = {"P1": 3, "P2": 2, "P3": 2, "P4": 3}


@dataclass(frozen=True)
class PatternConfig:
    k: int = 6
    alpha: float = 0.1
    n_training: int = 336
    n_test: int = 24

    def __post_init__(self):
        check_positive_int(self.k, "k")
        check_fraction(self.alpha, "alpha")
        if self.alpha >= 0.5:
            raise ConfigError("alpha must be < 0.5")
        check_positive_int(self.n_training, "n_training", minimum=2 * self.k + 3)
        check_positive_int(self.n_test, "n_test")


def _returns(prices: np.ndarray) -> np.ndarray:
    if np.any(prices <= 0):
        raise ConfigError("prices must be strictly positive")
    r = np.full(len(prices), np.nan)
    r[1:] = np.diff(prices) / prices[:-1]
    return r


def _forward(values: np.ndarray, k: int, reduce) -> np.ndarray:
    """``reduce(values[t+1 : t+k+1])`` at each ``t``; NaN where the horizon runs past the end."""
    out = np.full(len(values), np.nan)
    n = len(values) - k
    if n > 0:
        windows = np.lib.stride_tricks.sliding_window_view(values[1:], k)[:n]
        out[:n] = reduce(windows, axis=1)
    return out


def moving_average(prices: np.ndarray, k: int) -> np.ndarray:
    """Trailing mean of ``k`` prices ending at each ``t``; NaN for the first ``k - 1``."""
    out = np.full(len(prices), np.nan)
    if len(prices) >= k:
        out[k - 1:] = np.lib.stride_tricks.sliding_window_view(prices, k).mean(axis=1)
    return out


def pattern_statistic(prices, pattern: str, k: int = 6) -> np.ndarray:
    """Per-time statistic whose thresholding gives the pattern label."""
    p = check_series(prices, "prices", min_length=2)
    r = _returns(p)
    if pattern == "P1":
        out = np.full(len(p), np.nan)
        out[:-1] = r[1:]
        return out
    if pattern == "P2":
        return _forward(r, k, np.max)
    if pattern == "P3":
        return _forward(r, k, np.min)
    if pattern == "P4":
        ma = moving_average(p, k)
        out = np.full(len(p), np.nan)
        out[: len(p) - k] = (ma[k:] - ma[:-k]) / k
        return out
    raise ConfigError(f"unknown pattern {pattern!r}; expected one of {PATTERNS}")


def fit_thresholds(stat: np.ndarray, returns: np.ndarray, pattern: str, alpha: float):
    """Thresholds from one training window's statistic and returns."""
    stat = stat[np.isfinite(stat)]
    returns = returns[np.isfinite(returns)]
    if pattern in ("P1", "P4"):
        if len(stat) < 3:
            raise ConfigError("training window too short for tertile thresholds")
        return tuple(np.quantile(stat, [1 / 3, 2 / 3]))
    if len(returns) == 0:
        raise ConfigError("training window has no returns")
    q = 1 - alpha if pattern == "P2" else alpha
    return (float(np.quantile(returns, q)),)


def apply_thresholds(stat: np.ndarray, thresholds, pattern: str) -> np.ndarray:
    """Integer labels; -1 where the statistic is undefined.

    Three-class patterns use 0 = down, 1 = neutral, 2 = up; binary ones use
    1 = the rare move occurs.
    """
    labels = np.full(len(stat), -1, dtype=int)
    ok = np.isfinite(stat)
    if pattern in ("P1", "P4"):
        lo, hi = thresholds
        labels[ok] = np.where(stat[ok] <= lo, 0, np.where(stat[ok] <= hi, 1, 2))
    elif pattern == "P2":
        labels[ok] = (stat[ok] > thresholds[0]).astype(int)
    else:
        labels[ok] = (stat[ok] < thresholds[0]).astype(int)
    return labels


def rolling_windows(n: int, n_training: int, n_test: int):
    """``(train, test)`` index slices rolling forward by ``n_test``."""
    start = 0
    while start + n_training + n_test <= n:
        yield slice(start, start + n_training), slice(start + n_training, start + n_training + n_test)
        start += n_test


@dataclass
class PatternLabels:
    pattern: str
    times: np.ndarray
    labels: np.ndarray
    thresholds: list = field(default_factory=list)

    @property
    def n_classes(self) -> int:
        return N_CLASSES[self.pattern]

    @property
    def balance(self) -> list[float]:
        valid = self.labels[self.labels >= 0]
        if len(valid) == 0:
            return [0.0] * self.n_classes
        return [float(np.mean(valid == c)) for c in range(self.n_classes)]

    def max_imbalance(self) -> float:
        """Largest absolute gap between a class fraction and ``1 / n_classes``."""
        return max(abs(b - 1 / self.n_classes) for b in self.balance)


def label_patterns(prices, cfg: PatternConfig = PatternConfig(), patterns=PATTERNS) -> dict[str, PatternLabels]:
    """Label every test point of the rolling protocol with thresholds from its training window.

    Training statistics whose horizon reaches into the test window are
    excluded from threshold fitting.
    """
    p = check_series(prices, "prices", min_length=2)
    if len(p) < cfg.n_training + cfg.n_test:
        raise ConfigError(f"need at least {cfg.n_training + cfg.n_test} prices, got {len(p)}")
    r = _returns(p)
    out = {}
    for pattern in patterns:
        stat = pattern_statistic(p, pattern, cfg.k)
        times, labels, thresholds = [], [], []
        for train, test in rolling_windows(len(p), cfg.n_training, cfg.n_test):
            usable = slice(train.start, train.stop - cfg.k)
            thr = fit_thresholds(stat[usable], r[train], pattern, cfg.alpha)
            lab = apply_thresholds(stat[test], thr, pattern)
            idx = np.arange(test.start, test.stop)
            keep = lab >= 0
            times.append(idx[keep])
            labels.append(lab[keep])
            thresholds.append([float(v) for v in thr])
        out[pattern] = PatternLabels(pattern, np.concatenate(times), np.concatenate(labels), thresholds)
    return out


def balance_report(results: dict[str, PatternLabels]) -> dict:
    return {
        name: {"n": int(len(res.labels)), "balance": res.balance, "max_imbalance": res.max_imbalance()}
        for name, res in results.items()
    }


def synthetic_ou_prices(n: int, seed: int = 0, theta: float = 0.05, sigma: float = 0.02, p0: float = 100.0) -> np.ndarray:
    """Price path ``p0 * exp(x)`` with ``x`` a mean-reverting OU log-deviation started at 0."""
    check_positive_int(n, "n", minimum=2)
    rng = np.random.Generator(np.random.PCG64(seed))
    x = np.zeros(n)
    z = rng.standard_normal(n - 1)
    for t in range(n - 1):
        x[t + 1] = x[t] - theta * x[t] + sigma * z[t]
    return p0 * np.exp(x)


@dataclass
class WindowScore:
    train: tuple
    test: tuple
    error_rate: float


def rolling_evaluate(features, labels, estimator, n_training: int = 336, n_test: int = 24, embargo: int = 0):
    """Fit a fresh clone of ``estimator`` per training window and score the next test window.

    Rows with negative labels are skipped.  ``embargo`` drops that many rows
    from the end of each training window (labels there can see into the
    test period).
    """
    from sklearn.base import clone

    X = np.asarray(features, dtype=float)
    y = np.asarray(labels)
    if len(X) != len(y):
        raise ConfigError("features and labels differ in length")
    scores = []
    for train, test in rolling_windows(len(X), n_training, n_test):
        tr = np.arange(train.start, train.stop - embargo)
        tr = tr[y[tr] >= 0]
        te = np.arange(test.start, test.stop)
        te = te[y[te] >= 0]
        if len(tr) == 0 or len(te) == 0 or len(np.unique(y[tr])) < 2:
            continue
        model = clone(estimator).fit(X[tr], y[tr])
        err = float(np.mean(model.predict(X[te]) != y[te]))
        scores.append(WindowScore((train.start, train.stop), (test.start, test.stop), err))
    return scores


def mean_error(scores: list[WindowScore]) -> float:
    return float(np.mean([s.error_rate for s in scores])) if scores else math.nan


def to_json(results: dict[str, PatternLabels]) -> str:
    return json.dumps(balance_report(results))
