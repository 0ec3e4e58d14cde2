"""PCA projection of a point cloud and the bottleneck bounds it supports.

By default the second-moment matrix ``X.T @ X / n`` is decomposed without
centering, so the retained subspace passes through the origin.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_cloud, check_positive_int
from .exceptions import ConfigError

EIGEN_CLAMP = 1e-12


@dataclass
class PcaResult:
    projected: np.ndarray
    eigenvalues: np.ndarray
    explained: np.ndarray
    components: np.ndarray
    l: int
    center: bool = False
    mean: np.ndarray | None = None

    @property
    def n_positive(self) -> int:
        """Number of strictly positive eigenvalues after clamping."""
        return int(np.count_nonzero(self.eigenvalues > 0))

    @property
    def smallest_positive(self) -> float:
        """Smallest positive eigenvalue among the top ``l``, or 0 if none."""
        pos = self.eigenvalues[: self.l][self.eigenvalues[: self.l] > 0]
        return float(pos[-1]) if len(pos) else 0.0

    def to_dict(self) -> dict:
        return {
            "l": self.l,
            "center": self.center,
            "eigenvalues": self.eigenvalues.tolist(),
            "explained": self.explained.tolist(),
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)


def second_moment_spectrum(X, center: bool = False):
    """Eigenvalues (descending, clamped) and eigenvectors of ``X.T @ X / n``."""
    X = check_cloud(X)
    mean = X.mean(axis=0) if center else None
    Xc = X - mean if center else X
    gram = Xc.T @ Xc / len(Xc)
    vals, vecs = np.linalg.eigh(gram)
    order = np.argsort(vals)[::-1]
    vals, vecs = vals[order], vecs[:, order]
    scale = max(1.0, float(vals[0])) if len(vals) else 1.0
    vals = np.where(vals <= EIGEN_CLAMP * scale, 0.0, vals)
    # deterministic sign: largest-magnitude entry of each eigenvector is positive
    pivot = np.argmax(np.abs(vecs), axis=0)
    signs = np.sign(vecs[pivot, np.arange(vecs.shape[1])])
    signs[signs == 0] = 1.0
    return vals, vecs * signs, mean


def pca_project(X, l: int, center: bool = False) -> PcaResult:
    """Coordinates of ``X`` in the basis of its top-``l`` eigenvectors.

    Because the basis is orthonormal, pairwise distances of the output equal
    those of the orthogonal projections of the rows of ``X`` onto that span.
    """
    X = check_cloud(X)
    check_positive_int(l, "l")
    if l > X.shape[1]:
        raise ConfigError(f"l = {l} exceeds the ambient dimension {X.shape[1]}")
    vals, vecs, mean = second_moment_spectrum(X, center)
    total = vals.sum()
    explained = vals / total if total > 0 else np.zeros_like(vals)
    basis = vecs[:, :l]
    projected = ((X - mean) if center else X) @ basis
    return PcaResult(projected, vals, explained, basis, l, center, mean)


def pca_bound_rhs(sup_err: float, sup_norm: float, lambda_l: float) -> float:
    """Bottleneck bound between a clean subspace cloud and PCA of its contaminated copy.

    ``sup_err * (1 + 2 sup_norm (sup_err + 2 sup_norm) / lambda_l)``, in the
    radius convention.
    """
    _check_bound_inputs(lambda_l, sup_err, sup_norm)
    return sup_err * (1.0 + 2.0 * sup_norm * (sup_err + 2.0 * sup_norm) / lambda_l)


def cor_bound_rhs(d_hv: float, sup_err: float, sup_norm: float, lambda_l: float) -> float:
    """Bound when the clean cloud is only near the subspace (Hausdorff gap ``d_hv``).

    ``d_hv + (d_hv + sup_err) * (1 + 2 sup_norm (d_hv + sup_err + sup_norm) / lambda_l)``
    """
    _check_bound_inputs(lambda_l, d_hv, sup_err, sup_norm)
    gap = d_hv + sup_err
    return d_hv + gap * (1.0 + 2.0 * sup_norm * (gap + sup_norm) / lambda_l)


def _check_bound_inputs(lambda_l, *nonneg):
    if not lambda_l > 0:
        raise ConfigError(f"lambda_l must be > 0, got {lambda_l}")
    if any(v < 0 for v in nonneg):
        raise ConfigError("bound inputs must be nonnegative")


class UncenteredPCA(TransformerMixin, BaseEstimator):
    """PCA on the second-moment matrix, usable inside sklearn pipelines.

    Parameters
    ----------
    n_components : int
        Target dimension ``l``.
    center : bool
        Subtract the fitted mean first (ordinary PCA).
    """

    def __init__(self, n_components=3, center=False):
        self.n_components = n_components
        self.center = center

    def fit(self, X, y=None):
        res = pca_project(X, self.n_components, self.center)
        self.components_ = res.components
        self.eigenvalues_ = res.eigenvalues
        self.explained_variance_ratio_ = res.explained[: self.n_components]
        self.mean_ = res.mean
        self.n_features_in_ = res.components.shape[0]
        return self

    def transform(self, X):
        check_is_fitted(self, "components_")
        X = check_cloud(X)
        if X.shape[1] != self.n_features_in_:
            raise ConfigError(f"expected {self.n_features_in_} features, got {X.shape[1]}")
        return ((X - self.mean_) if self.center else X) @ self.components_
