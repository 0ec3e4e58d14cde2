import math

import numpy as np
import pytest

from oracles import dense_circle_h1_death
from toposeries.embedding import EmbeddingParams, sliding_window_embed
from toposeries.exceptions import ConfigError
from toposeries.metrics import bottleneck
from toposeries.persistence import RADIUS, cloud_persistence
from toposeries.stability import (
    StabilityConfig,
    build_signal,
    dense_diagram,
    exact_diagram,
    resonant_orders,
    run_stability_suite,
)
from toposeries.summaries import truncate_infinite


def test_resonant_signal_embeds_as_round_circle():
    cfg = StabilityConfig(N=120, m=4, tau=5)
    rng = np.random.default_rng(0)
    for _ in range(5):
        omega, A, phase = build_signal(cfg, rng)
        x = A * np.sin(omega * np.arange(cfg.N) * cfg.dt + phase)
        X = sliding_window_embed(x, EmbeddingParams(cfg.m, cfg.tau))
        np.testing.assert_allclose(np.linalg.norm(X, axis=1), A * math.sqrt(cfg.m / 2), rtol=1e-12)
        assert np.linalg.matrix_rank(X, tol=1e-8) == 2
        assert omega * A == pytest.approx(cfg.L_f)


def test_resonant_orders_skip_multiples_of_m():
    cfg = StabilityConfig(N=400, m=4, tau=5)
    orders = resonant_orders(cfg)
    assert orders and all(j % 4 for j in orders)
    assert all(2 * 20 / j <= 400 - 1 - 15 for j in orders)


def test_exact_diagram_is_circle():
    cfg = StabilityConfig(m=4)
    dgm = exact_diagram(cfg, 2.0)
    R = 2.0 * math.sqrt(2)
    assert dgm.multiset() == [(0, 0.0, math.inf), (1, 0.0, dense_circle_h1_death(R))]


def test_dense_circle_sample_approaches_exact_death():
    t = 2 * np.pi * np.arange(60) / 60
    X = np.c_[np.cos(t), np.sin(t)]
    h1 = cloud_persistence(X, n_dim=1).in_dim(1)
    top = h1[np.argmax(h1[:, 1] - h1[:, 0])]
    assert abs(top[1] - dense_circle_h1_death(1.0)) < 0.05


def test_dense_reference_within_slack_of_exact():
    cfg = StabilityConfig(N=30, m=2, tau=2, oversample=4, reference="dense")
    omega, A, phase = build_signal(cfg, np.random.default_rng(3))
    R = A * math.sqrt(cfg.m / 2)
    d_max = 0.5 * R
    dense, slack = dense_diagram(cfg, omega, A, phase, d_max)
    exact = exact_diagram(cfg, A)
    a = truncate_infinite(dense, d_max).to_scale(RADIUS)
    b = truncate_infinite(exact, d_max).to_scale(RADIUS)
    assert slack == pytest.approx(math.sqrt(2) * cfg.T / (4 * cfg.N))
    for k in (0, 1):
        assert bottleneck(a, b, k) <= slack


def test_noise_free_bottleneck_below_sampling_term():
    cfg = StabilityConfig(N=100, noise_sup=0.0, trials=10, seed=4)
    rep = run_stability_suite(cfg)
    term = math.sqrt(cfg.m) * cfg.L_f * cfg.T / cfg.N
    assert all(t.bottleneck <= term for t in rep.trials)
    assert rep.all_passed


def test_noisy_suite_passes_and_reports():
    rep = run_stability_suite(StabilityConfig(N=100, noise_sup=0.05, trials=5, seed=1))
    assert rep.all_passed
    d = rep.to_dict()
    assert d["trials_run"] == 5 and d["passed"] == 5
    for t in d["trials"]:
        assert t["passed"] == (max(t["bottleneck"], t["landscape"], t["silhouette"]) <= t["rhs"] + t["slack"] + 1e-9)
        assert t["lambda_l"] > 0 and t["noise"] <= 0.05


def test_dense_reference_suite():
    rep = run_stability_suite(StabilityConfig(N=30, m=2, tau=2, trials=2, oversample=4, reference="dense"))
    assert rep.all_passed
    assert all(t.slack > 0 for t in rep.trials)


def test_degenerate_smoke_case():
    rep = run_stability_suite(StabilityConfig(N=2, m=1, trials=3))
    assert len(rep.trials) == 3
    assert rep.all_passed


def test_suite_is_deterministic():
    cfg = StabilityConfig(N=60, m=2, tau=3, noise_sup=0.02, trials=3, seed=9)
    assert run_stability_suite(cfg).to_json() == run_stability_suite(cfg).to_json()


def test_config_validation():
    with pytest.raises(ConfigError):
        StabilityConfig(trials=0)
    with pytest.raises(ConfigError):
        StabilityConfig(noise_sup=-1)
    with pytest.raises(ConfigError):
        StabilityConfig(m=2, l=3)
    with pytest.raises(ConfigError):
        StabilityConfig.from_dict({"N": 10, "bogus": 1})
    with pytest.raises(ConfigError):
        run_stability_suite(StabilityConfig(N=17, m=4, tau=5, trials=1))


def test_bound_uses_radius_convention():
    cfg = StabilityConfig(N=100, m=4, T=1.0)
    assert cfg.bound(1.0, 0.1) == pytest.approx(3.58)
