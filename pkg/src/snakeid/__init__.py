"""Species-observation classification on precomputed ViT embeddings.

Pipeline stages: binary embedding stores (SEB1/SPG1), DCT compression of
patch-token grids, a linear NLL classifier trained with Adam, observation
level inference with a species-id bijection, and competition metrics.
"""

from . import errors
from .classifier import LinearModel, TrainConfig, train
from .dct import compress_patch_grid, dct2, idct2
from .embedstore import GridStore, VectorStore
from .inference import Submission, predict_observations
from .manifest import ClassIndexMap, Manifest, build_class_index_map, parse_manifest
from .metrics import CostTable, MetricReport, Track1Weights, metric_report
from .projection import PcaModel, fit_pca, project

__all__ = [
    "errors",
    "LinearModel",
    "TrainConfig",
    "train",
    "compress_patch_grid",
    "dct2",
    "idct2",
    "GridStore",
    "VectorStore",
    "Submission",
    "predict_observations",
    "ClassIndexMap",
    "Manifest",
    "build_class_index_map",
    "parse_manifest",
    "CostTable",
    "MetricReport",
    "Track1Weights",
    "metric_report",
    "PcaModel",
    "fit_pca",
    "project",
]

__version__ = "0.1.0"
