"""Seeded synthetic fixtures: Gaussian class blobs plus a fabricated manifest.

Lets the whole pipeline run and be tested without any real dataset. Class ids
are deliberately sparse (far from 0..K-1) so that a contiguous model index
leaking into a submission is always detectable.
"""

from __future__ import annotations

import numpy as np

from .dct import idct2
from .embedstore import GridStore, VectorStore
from .manifest import Manifest, ManifestRow

_CLASS_ID_BASE = 100
_CLASS_ID_STEP = 97
_IMAGE_ID_BASE = 1000


def sparse_class_ids(n_classes: int) -> list[int]:
    return [_CLASS_ID_BASE + _CLASS_ID_STEP * i for i in range(n_classes)]


def blob_fixture(
    n_classes: int = 10,
    dim: int = 768,
    train_observations: int = 500,
    test_observations: int = 100,
    images_per_observation: tuple[int, int] = (1, 3),
    center_scale: float = 1.0,
    noise: float = 1.0,
    venomous_fraction: float = 0.2,
    seed: int = 0,
    centers: np.ndarray | None = None,
) -> tuple[Manifest, VectorStore]:
    """Gaussian blobs in feature space with a matching manifest.

    Observations are assigned to classes round-robin, so every class appears
    in both splits. Each observation draws 1..n images around its class
    center; all vectors are float32 as a real embedding store would hold.
    """
    rng = np.random.default_rng(seed)
    class_ids = sparse_class_ids(n_classes)
    n_venomous = int(round(venomous_fraction * n_classes))
    venomous = {cid: i < n_venomous for i, cid in enumerate(class_ids)}
    if centers is None:
        centers = rng.standard_normal((n_classes, dim)) * center_scale
    centers = np.asarray(centers, dtype=np.float64)
    if centers.shape != (n_classes, dim):
        raise ValueError(f"centers shape {centers.shape} != ({n_classes}, {dim})")

    lo, hi = images_per_observation
    rows: list[ManifestRow] = []
    ids: list[int] = []
    vectors: list[np.ndarray] = []
    image_id = _IMAGE_ID_BASE
    total = train_observations + test_observations
    for obs in range(total):
        cls = obs % n_classes
        split = "train" if obs < train_observations else "test"
        n_images = int(rng.integers(lo, hi + 1))
        for _ in range(n_images):
            image_id += 1
            vec = centers[cls] + noise * rng.standard_normal(dim)
            rows.append(
                ManifestRow(
                    observation_id=obs + 1,
                    image_id=image_id,
                    relative_path=f"images/img_{image_id:06d}.jpg",
                    class_id=class_ids[cls],
                    venomous=venomous[class_ids[cls]],
                    split=split,
                )
            )
            ids.append(image_id)
            vectors.append(vec)
    store = VectorStore(
        dim,
        np.array(ids, dtype=np.int64),
        np.array(vectors, dtype=np.float32),
    )
    return Manifest(tuple(rows)), store


def grid_fixture(
    n_classes: int = 3,
    block_size: int = 4,
    grid_shape: tuple[int, int] = (12, 16),
    train_observations: int = 30,
    test_observations: int = 9,
    images_per_observation: tuple[int, int] = (1, 3),
    center_scale: float = 4.0,
    noise: float = 0.5,
    venomous_fraction: float = 0.2,
    seed: int = 0,
) -> tuple[Manifest, GridStore, VectorStore]:
    """Patch-grid fixture whose top DCT block carries separable blob features.

    Each image's blob vector is planted as the top-left block of a coefficient
    matrix and inverse-transformed, so compressing the grid recovers the
    feature (up to float32 rounding). Returns the planted vectors too.
    """
    manifest, vstore = blob_fixture(
        n_classes=n_classes,
        dim=block_size * block_size,
        train_observations=train_observations,
        test_observations=test_observations,
        images_per_observation=images_per_observation,
        center_scale=center_scale,
        noise=noise,
        venomous_fraction=venomous_fraction,
        seed=seed,
    )
    rows_n, cols_n = grid_shape
    grids = np.empty((len(vstore), rows_n, cols_n), dtype=np.float32)
    for i in range(len(vstore)):
        coeffs = np.zeros(grid_shape)
        coeffs[:block_size, :block_size] = vstore.vectors[i].reshape(block_size, block_size)
        grids[i] = idct2(coeffs).astype(np.float32)
    gstore = GridStore(rows_n, cols_n, vstore.image_ids.copy(), grids)
    return manifest, gstore, vstore
