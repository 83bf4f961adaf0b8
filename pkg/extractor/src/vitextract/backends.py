"""Embedding backends: the real ViT and a deterministic stand-in.

Both return, per image, a CLS vector of width 768 and a 256 x 768 patch-token
grid. Shapes are asserted at runtime; a checkpoint with a different token
layout aborts extraction instead of silently writing junk.
"""

from __future__ import annotations

import numpy as np
from PIL import Image

HIDDEN_SIZE = 768
NUM_PATCHES = 256
SEQUENCE_LENGTH = NUM_PATCHES + 1  # patch tokens plus one CLS token

DEFAULT_MODEL = "facebook/dinov2-base"

_STUB_INPUT_SIZE = 224
_STUB_PATCH = 14  # 224 / 14 = 16 patches per side, 256 total


class ModelShapeError(RuntimeError):
    """The loaded checkpoint does not produce 257 x 768 token outputs."""


def _check_shapes(cls_batch: np.ndarray, patch_batch: np.ndarray) -> None:
    if cls_batch.ndim != 2 or cls_batch.shape[1] != HIDDEN_SIZE:
        raise ModelShapeError(
            f"CLS output has width {cls_batch.shape[-1]}, expected {HIDDEN_SIZE}; "
            "wrong model variant?"
        )
    if patch_batch.ndim != 3 or patch_batch.shape[1:] != (NUM_PATCHES, HIDDEN_SIZE):
        raise ModelShapeError(
            f"patch output has shape {patch_batch.shape[1:]}, expected "
            f"({NUM_PATCHES}, {HIDDEN_SIZE}); wrong model variant?"
        )


class Dinov2Backend:
    """Pre-trained base ViT via HuggingFace transformers, eval mode, CPU or GPU.

    The model must be available locally (cached or a local path); extraction
    itself performs no network access.
    """

    name = "dinov2"

    def __init__(self, model_name: str = DEFAULT_MODEL, device: str = "cpu"):
        import torch
        from transformers import AutoImageProcessor, AutoModel

        self._torch = torch
        self._processor = AutoImageProcessor.from_pretrained(model_name)
        self._model = AutoModel.from_pretrained(model_name).eval().to(device)
        self._device = device

    def embed(self, images: list[Image.Image]) -> tuple[np.ndarray, np.ndarray]:
        inputs = self._processor(images=images, return_tensors="pt").to(self._device)
        with self._torch.no_grad():
            tokens = self._model(**inputs).last_hidden_state
        out = tokens.cpu().numpy().astype(np.float32)
        if out.shape[1] != SEQUENCE_LENGTH:
            raise ModelShapeError(
                f"model emitted {out.shape[1]} tokens, expected {SEQUENCE_LENGTH}; "
                "wrong model variant?"
            )
        cls_batch = out[:, 0, :]
        patch_batch = out[:, 1:, :]
        _check_shapes(cls_batch, patch_batch)
        return cls_batch, patch_batch


class StubBackend:
    """Deterministic pixel-driven embedder with the real output geometry.

    Fixed-seed random projections of 14 x 14 RGB patches from a 224 x 224
    resize. No learned weights, so it is only useful for exercising the
    extraction plumbing (shapes, ordering, file writing, determinism).
    """

    name = "stub"

    def __init__(self, seed: int = 0):
        rng = np.random.default_rng(seed)
        patch_pixels = _STUB_PATCH * _STUB_PATCH * 3
        self._patch_proj = (
            rng.standard_normal((patch_pixels, HIDDEN_SIZE)) / np.sqrt(patch_pixels)
        ).astype(np.float32)
        self._cls_proj = (
            rng.standard_normal((HIDDEN_SIZE, HIDDEN_SIZE)) / np.sqrt(HIDDEN_SIZE)
        ).astype(np.float32)

    def _tokens(self, image: Image.Image) -> tuple[np.ndarray, np.ndarray]:
        resized = image.convert("RGB").resize(
            (_STUB_INPUT_SIZE, _STUB_INPUT_SIZE), Image.BILINEAR
        )
        pixels = np.asarray(resized, dtype=np.float32) / 255.0
        side = _STUB_INPUT_SIZE // _STUB_PATCH
        patches = (
            pixels.reshape(side, _STUB_PATCH, side, _STUB_PATCH, 3)
            .transpose(0, 2, 1, 3, 4)
            .reshape(NUM_PATCHES, -1)
        )
        grid = patches @ self._patch_proj
        cls = np.tanh(grid.mean(axis=0)) @ self._cls_proj
        return cls.astype(np.float32), grid.astype(np.float32)

    def embed(self, images: list[Image.Image]) -> tuple[np.ndarray, np.ndarray]:
        pairs = [self._tokens(img) for img in images]
        cls_batch = np.stack([c for c, _ in pairs])
        patch_batch = np.stack([g for _, g in pairs])
        _check_shapes(cls_batch, patch_batch)
        return cls_batch, patch_batch


def make_backend(name: str, model_name: str = DEFAULT_MODEL, device: str = "cpu"):
    if name == "dinov2":
        return Dinov2Backend(model_name=model_name, device=device)
    if name == "stub":
        return StubBackend()
    raise ValueError(f"unknown backend {name!r}")
