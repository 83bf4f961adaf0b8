"""Orthonormal 2D DCT-II and the top-left block compression of patch grids.

The transform of an M x N matrix X is

    C[u, v] = a(u) a(v) sum_{m,n} X[m, n] cos(pi (2m+1) u / 2M) cos(pi (2n+1) v / 2N)

with a(0) = sqrt(1/M) and a(k>0) = sqrt(2/M) along rows (same with N along
columns). This normalization makes the basis orthonormal, so the transform
preserves the Frobenius norm and idct2 is just the transpose pass.

Implementation is separable: a 1D basis matrix per axis, applied as two
matrix products. A naive quadruple-sum oracle lives in the test suite only.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .errors import DimensionError, NumericalError

# patch-grid defaults: ViT base patch tokens and an 8x8 coefficient block
DEFAULT_GRID_SHAPE = (256, 768)
DEFAULT_BLOCK_SIZE = 8


@lru_cache(maxsize=None)
def dct_basis(n: int) -> np.ndarray:
    """Orthonormal DCT-II basis; row k is the k-th cosine basis vector."""
    if n < 1:
        raise DimensionError(f"basis size must be >= 1, got {n}")
    m = np.arange(n)
    k = np.arange(n).reshape(-1, 1)
    basis = np.cos(np.pi * (2 * m + 1) * k / (2 * n))
    basis *= np.sqrt(2.0 / n)
    basis[0] *= np.sqrt(0.5)
    basis.setflags(write=False)
    return basis


def _as_matrix(x, name: str) -> np.ndarray:
    a = np.asarray(x, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise DimensionError(f"{name} must be a non-empty 2D matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise NumericalError(f"{name} contains non-finite values")
    return a


def dct2(matrix) -> np.ndarray:
    """Orthonormal 2D DCT-II coefficients of a real M x N matrix."""
    x = _as_matrix(matrix, "matrix")
    rows, cols = x.shape
    return dct_basis(rows) @ x @ dct_basis(cols).T


def idct2(coeffs) -> np.ndarray:
    """Inverse of dct2 under the orthonormal convention."""
    c = _as_matrix(coeffs, "coeffs")
    rows, cols = c.shape
    return dct_basis(rows).T @ c @ dct_basis(cols)


def compress_patch_grid(
    grid,
    block_size: int = DEFAULT_BLOCK_SIZE,
    grid_shape: tuple[int, int] = DEFAULT_GRID_SHAPE,
) -> np.ndarray:
    """Top-left block_size x block_size DCT coefficients, flattened row-major.

    Equivalent to dct2(grid)[:block_size, :block_size].ravel() but computed
    with the truncated basis, so only the kept coefficients are evaluated.
    """
    x = _as_matrix(grid, "grid")
    if x.shape != tuple(grid_shape):
        raise DimensionError(f"grid shape {x.shape} != expected {tuple(grid_shape)}")
    rows, cols = x.shape
    if block_size < 1 or block_size > min(rows, cols):
        raise DimensionError(
            f"block_size {block_size} does not fit a {rows}x{cols} grid"
        )
    top = dct_basis(rows)[:block_size] @ x @ dct_basis(cols)[:block_size].T
    return top.ravel()
