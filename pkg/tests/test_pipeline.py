import json
import math

import numpy as np
import pytest

from toposeries.embedding import EmbeddingParams, sliding_window_embed
from toposeries.exceptions import ConfigError, PipelineError, SimplexBudgetError
from toposeries.pca import pca_project
from toposeries.persistence import PersistenceDiagram, rips_persistence, distance_matrix
from toposeries.pipeline import (
    ClassifyDemoConfig,
    PipelineConfig,
    TopologicalFeaturizer,
    classify_demo,
    emit_plot_data,
    env_seed,
    featurize,
    featurize_many,
    h1_mass,
    parse_grid,
)
from toposeries.summaries import landscape, truncate_infinite, vectorize
from toposeries.timeseries import GeneratorSpec, generate


@pytest.fixture(scope="module")
def sinusoid():
    return generate(GeneratorSpec("sinusoid", 250, 0, {}))


def test_default_parameters_give_sixty_features(sinusoid):
    fv = featurize(PipelineConfig(concat=True), sinusoid)
    assert fv.flat.shape == (60,)
    assert fv.dims == (0, 1, 2)
    assert fv.metadata["n_points"] == 250 - 24 * 5


def test_matches_direct_composition(sinusoid):
    cfg = PipelineConfig(m=10, tau=3, pca_dims=3, n_dim=1, d_max=1.0, kappa=0.1)
    cloud = sliding_window_embed(sinusoid, EmbeddingParams(10, 3))
    proj = pca_project(cloud, 3).projected
    dgm = rips_persistence(distance_matrix(proj), 1, 1.0)
    direct = vectorize(truncate_infinite(dgm, 1.0), cfg.summary_spec)
    assert np.array_equal(featurize(cfg, sinusoid).flat, direct.flat)


def test_deterministic_bytes(sinusoid):
    cfg = PipelineConfig(n_dim=1)
    assert featurize(cfg, sinusoid).to_json() == featurize(cfg, sinusoid).to_json()


def test_constant_series_has_only_the_truncated_component():
    cfg = PipelineConfig()
    fv = featurize(cfg, np.full(250, 5.0))
    h0, h1, h2 = fv.vectors()
    np.testing.assert_array_equal(h1, 0.0)
    np.testing.assert_array_equal(h2, 0.0)
    np.testing.assert_allclose(h0, landscape([(0.0, 1.0)], 1, cfg.summary_spec.grid))


def test_errors_carry_step_labels():
    with pytest.raises(PipelineError) as info:
        featurize(PipelineConfig(m=50, tau=10), np.zeros(100))
    assert info.value.step == "embed"
    with pytest.raises(PipelineError) as info:
        featurize(PipelineConfig(m=5, tau=1, d_max=100.0, simplex_cap=100), np.sin(np.arange(80.0)))
    assert info.value.step == "persistence"
    assert isinstance(info.value.cause, SimplexBudgetError)


def test_featurize_many_concatenates_in_order(sinusoid):
    cfg = PipelineConfig(n_dim=1, kappa=0.1)
    other = generate(GeneratorSpec("arima112", 250, 1, {}))
    both = featurize_many(cfg, [sinusoid, other])
    a, b = featurize(cfg, sinusoid), featurize(cfg, other)
    assert len(both) == len(a) + len(b)
    np.testing.assert_array_equal(both.flat, np.concatenate([a.flat, b.flat]))


def test_estimator_wrapper(sinusoid):
    est = TopologicalFeaturizer(m=10, tau=3, n_dim=1, kappa=0.1)
    F = est.fit_transform([sinusoid.values, sinusoid.values[::-1]])
    assert F.shape == (2, 20)
    assert est.get_params()["m"] == 10


def test_plot_data_rows(sinusoid):
    fv = featurize(PipelineConfig(concat=True), sinusoid)
    lines = emit_plot_data(fv).splitlines()
    assert lines[0] == "dim,t,value" and len(lines) == 61
    assert emit_plot_data(PersistenceDiagram([], 1)).splitlines() == ["birth,death,dim"]
    rows = emit_plot_data(PersistenceDiagram([(1, 0.2, 0.8)], 1)).splitlines()
    assert rows[1:] == ["0.2,0.8,1"]
    assert emit_plot_data(PersistenceDiagram([(0, 0.0, math.inf)])).splitlines()[1] == "0.0,inf,0"


def test_config_roundtrip_and_validation():
    cfg = PipelineConfig(m="auto", n_dim=1)
    assert PipelineConfig.from_dict(json.loads(cfg.to_json())) == cfg
    with pytest.raises(ConfigError):
        PipelineConfig.from_dict({"version": 2})
    with pytest.raises(ConfigError):
        PipelineConfig.from_dict({"embed_dim": 3})
    with pytest.raises(ConfigError):
        PipelineConfig(m="seven")
    assert cfg.merged(m=4, tau=None).m == 4


def test_parse_grid():
    assert parse_grid("m=10,25,tau=1,5") == [(10, 1), (10, 5), (25, 1), (25, 5)]
    for bad in ("10,25", "m=1", "k=3,tau=1", "m=a,tau=1"):
        with pytest.raises(ConfigError):
            parse_grid(bad)


def test_env_seed(monkeypatch):
    monkeypatch.delenv("TDA_SEED", raising=False)
    assert env_seed(4) == 4
    monkeypatch.setenv("TDA_SEED", "11")
    assert env_seed(4) == 11
    monkeypatch.setenv("TDA_SEED", "x")
    with pytest.raises(ConfigError):
        env_seed(4)


def test_demo_empty_test_split_is_config_error():
    with pytest.raises(ConfigError, match="no test"):
        classify_demo(ClassifyDemoConfig(sequences_per_class=1, train_fraction=0.9, knn_k=1))


def test_small_demo_report():
    small = PipelineConfig(m=5, tau=2, n_dim=1, kappa=0.1)
    cfg = ClassifyDemoConfig(sequences_per_class=6, N=60, knn_k=1, train_fraction=0.5, pipeline=small,
                             grid=[(4, 1), (5, 2)])
    rep = classify_demo(cfg)
    assert rep.n_train == 9 and rep.n_test == 9
    assert np.sum(rep.confusion) == 9
    assert rep.error_rate == pytest.approx(1 - rep.accuracy)
    assert len(rep.grid_scores) == 2
    assert (rep.m, rep.tau) in {(4, 1), (5, 2)}
    assert set(rep.h1_mass) == {"arima112", "sinusoid", "ou"}
    again = ClassifyDemoConfig.from_dict(json.loads(json.dumps(cfg.to_dict())))
    assert again.pipeline == small


def test_h1_mass(sinusoid):
    fv = featurize(PipelineConfig(n_dim=1), sinusoid)
    assert h1_mass(fv) == pytest.approx(fv.vectors()[1].sum() * 0.05)
    assert h1_mass(featurize(PipelineConfig(n_dim=0), sinusoid)) == 0.0
