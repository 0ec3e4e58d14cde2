"""Topological feature vectors for noisy time series.

Delay embedding, uncentered PCA, Vietoris-Rips persistence and
landscape/silhouette summaries, plus an empirical check of the
stability bounds that tie them together.
"""
from .embedding import EmbeddingParams, SlidingWindowEmbedder, estimate_delay_acf, estimate_embedding_dim, sliding_window_embed
from .exceptions import ComputationError, ConfigError, PipelineError, ScaleMismatchError, SimplexBudgetError
from .metrics import bottleneck, bottleneck_all, hausdorff, linf_grid, prop51_bound
from .pca import PcaResult, UncenteredPCA, cor_bound_rhs, pca_bound_rhs, pca_project
from .persistence import DIAMETER, RADIUS, PersistenceDiagram, cloud_persistence, rips_persistence
from .pipeline import ClassifyDemoConfig, PipelineConfig, TopologicalFeaturizer, classify_demo, emit_plot_data, featurize
from .stability import StabilityConfig, StabilityReport, run_stability_suite
from .summaries import DiagramVectorizer, FeatureVector, SummarySpec, landscape_eval, silhouette_eval, truncate_infinite, vectorize
from .timeseries import GeneratorSpec, TimeSeries, generate, load_csv, returns

__version__ = "0.1.0"
