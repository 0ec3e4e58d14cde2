import math

import numpy as np
import pytest

from toposeries.embedding import (
    EmbeddingParams,
    SlidingWindowEmbedder,
    autocorrelation,
    estimate_delay_acf,
    estimate_embedding_dim,
    resolve_params,
    sliding_window_embed,
)
from toposeries.exceptions import ConfigError


def test_six_samples_m3_tau1():
    x = np.arange(6.0)
    X = sliding_window_embed(x, EmbeddingParams(3, 1))
    assert X.shape == (4, 3)
    assert X[0].tolist() == [0.0, 1.0, 2.0]
    assert X[3].tolist() == [3.0, 4.0, 5.0]


@pytest.mark.parametrize("tau", [1, 3, 9])
def test_m1_is_identity(tau):
    x = np.random.default_rng(0).normal(size=20)
    X = sliding_window_embed(x, EmbeddingParams(1, tau))
    np.testing.assert_array_equal(X[:, 0], x)


def test_default_demo_shape():
    X = sliding_window_embed(np.zeros(250), EmbeddingParams(25, 5))
    assert X.shape == (130, 25)


def test_window_too_long():
    assert sliding_window_embed(np.zeros(10), EmbeddingParams(4, 3)).shape == (1, 4)
    with pytest.raises(ConfigError):
        sliding_window_embed(np.zeros(10), EmbeddingParams(4, 4))
    with pytest.raises(ConfigError):
        EmbeddingParams(0, 1)


def test_rows_match_definition():
    x = np.random.default_rng(1).normal(size=40)
    X = sliding_window_embed(x, EmbeddingParams(4, 3))
    for i in range(len(X)):
        assert X[i].tolist() == [x[i], x[i + 3], x[i + 6], x[i + 9]]


def test_rank_two_cloud():
    rng = np.random.default_rng(2)
    basis = rng.normal(size=(2, 5))
    X = rng.normal(size=(40, 2)) @ basis
    assert estimate_embedding_dim(X, 0.99) == 2


def test_origin_cloud_returns_one():
    assert estimate_embedding_dim(np.zeros((7, 4))) == 1


@pytest.mark.parametrize("d", [2, 3, 4, 6, 7])
def test_orthonormal_rows_half_threshold(d):
    assert estimate_embedding_dim(np.eye(d), 0.5) == math.ceil(d / 2)


def test_white_noise_delay_is_one():
    x = np.random.default_rng(5).normal(size=2000)
    assert estimate_delay_acf(x, 20) == 1


def test_cosine_delay_near_quarter_period():
    P = 40
    t = np.arange(4000)
    x = np.cos(2 * np.pi * t / P)
    # first lag with cos(2 pi lag / P) < 1/e
    expected = next(k for k in range(1, P) if math.cos(2 * math.pi * k / P) < 1 / math.e)
    got = estimate_delay_acf(x, 30)
    assert abs(got - expected) <= 1
    assert abs(got - P / 4) <= 3


def test_constant_series_delay_error():
    with pytest.raises(ConfigError, match="variance"):
        estimate_delay_acf(np.ones(30), 5)


def test_delay_returns_max_lag_when_no_crossing():
    x = np.arange(200.0)
    assert estimate_delay_acf(x, 5) == 5


def test_autocorrelation_direct():
    x = np.random.default_rng(8).normal(size=100)
    acf = autocorrelation(x, 3)
    xc = x - x.mean()
    for k in range(4):
        assert acf[k] == pytest.approx(np.sum(xc[: len(x) - k] * xc[k:]) / np.sum(xc * xc))


def test_resolve_params_fixed_and_auto():
    x = np.sin(np.arange(300) * 2 * np.pi / 24)
    assert resolve_params(x, 3, 2) == EmbeddingParams(3, 2)
    p = resolve_params(x)
    assert p.tau == estimate_delay_acf(x, 50)
    assert p.m == 2


def test_embedder_estimator():
    x = np.random.default_rng(2).normal(size=50)
    emb = SlidingWindowEmbedder(m=3, tau=2)
    assert emb.get_params()["m"] == 3
    np.testing.assert_array_equal(emb.fit_transform(x), sliding_window_embed(x, EmbeddingParams(3, 2)))
    out = emb.transform([x, x[:20]])
    assert [len(c) for c in out] == [46, 16]
    with pytest.raises(ConfigError):
        SlidingWindowEmbedder(m="auto").transform(x)
