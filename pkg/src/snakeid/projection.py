"""2D exploration of embedding clouds via PCA, emitting plot-ready scatter CSV.

Power iteration with deflation on the sample covariance; deterministic start
vectors and a sign convention (first nonzero coordinate positive) make the
fitted axes reproducible, which stochastic layouts would not be.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DimensionError, InsufficientData, ShapeError
from .manifest import ManifestRow

SCATTER_HEADER = "image_id,x,y,class_id,venomous"

_SIGN_EPS = 1e-12


@dataclass(frozen=True, eq=False)
class PcaModel:
    mean: np.ndarray  # (D,)
    components: np.ndarray  # (k, D), orthonormal rows
    explained_variance: np.ndarray  # (k,), non-increasing


def _sign_normalize(v: np.ndarray) -> np.ndarray:
    for x in v:
        if abs(x) > _SIGN_EPS:
            return v if x > 0 else -v
    return v


def fit_pca(
    vectors,
    k: int = 2,
    tol: float = 1e-9,
    max_iter: int = 1000,
    seed: int = 0,
) -> PcaModel:
    """Top-k principal axes of the sample covariance of mean-centered data."""
    X = np.asarray(vectors, dtype=np.float64)
    if X.ndim != 2:
        raise DimensionError(f"expected an N x D matrix, got shape {X.shape}")
    n, d = X.shape
    if n < 2:
        raise InsufficientData(f"PCA needs at least 2 vectors, got {n}")
    if d < k:
        raise DimensionError(f"cannot extract {k} components from dimension {d}")

    mean = X.mean(axis=0)
    centered = X - mean
    cov = centered.T @ centered / (n - 1)

    rng = np.random.default_rng(seed)
    components = np.zeros((k, d))
    variances = np.zeros(k)
    for j in range(k):
        norm = 0.0
        while norm < 1e-9:  # redraw if the start collides with previous axes
            v = rng.standard_normal(d)
            v -= components[:j].T @ (components[:j] @ v)
            norm = np.linalg.norm(v)
        v /= norm
        for _ in range(max_iter):
            w = cov @ v
            # re-orthogonalize against converged components to stop drift
            w -= components[:j].T @ (components[:j] @ w)
            norm = np.linalg.norm(w)
            if norm < _SIGN_EPS:
                break  # remaining spectrum is (numerically) zero
            w /= norm
            if np.linalg.norm(w - v) < tol:
                v = w
                break
            v = w
        components[j] = v
        variances[j] = max(float(v @ cov @ v), 0.0)

    # power iteration can leave near-equal eigenvalues slightly out of order
    order = np.argsort(-variances, kind="stable")
    components = components[order]
    variances = variances[order]
    components = np.array([_sign_normalize(c) for c in components])
    return PcaModel(mean=mean, components=components, explained_variance=variances)


def project(model: PcaModel, vectors) -> np.ndarray:
    """Coordinates of vectors in the fitted axes: (x - mean) @ components.T"""
    X = np.asarray(vectors, dtype=np.float64)
    if X.ndim == 1:
        X = X.reshape(1, -1)
    if X.ndim != 2 or X.shape[1] != model.mean.shape[0]:
        raise DimensionError(
            f"vectors shape {X.shape} does not match model dimension {model.mean.shape[0]}"
        )
    return (X - model.mean) @ model.components.T


def export_scatter(coords, rows: Sequence[ManifestRow]) -> str:
    """Scatter CSV with one line per projected image."""
    c = np.asarray(coords, dtype=np.float64)
    if c.ndim != 2 or c.shape[1] != 2:
        raise ShapeError(f"coords must be N x 2, got shape {c.shape}")
    if len(c) != len(rows):
        raise ShapeError(f"{len(c)} coordinates for {len(rows)} manifest rows")
    lines = [SCATTER_HEADER]
    for (x, y), row in zip(c, rows):
        lines.append(
            f"{row.image_id},{float(x)!r},{float(y)!r},{row.class_id},{int(row.venomous)}"
        )
    return "\n".join(lines) + "\n"
