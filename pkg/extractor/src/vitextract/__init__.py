"""Embedding extraction adapter for the classification pipeline.

Reads an image folder plus manifest, runs a frozen ViT, and writes the
pipeline's SEB1 (CLS vectors, dim 768) and SPG1 (patch grids, 256x768) files.
"""

from .backends import Dinov2Backend, ModelShapeError, StubBackend, make_backend
from .extract import ExtractSummary, extract

__all__ = [
    "Dinov2Backend",
    "ModelShapeError",
    "StubBackend",
    "make_backend",
    "ExtractSummary",
    "extract",
]

__version__ = "0.1.0"
