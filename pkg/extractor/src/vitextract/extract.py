"""Batch extraction: image folder + manifest -> SEB1 CLS vectors (+ SPG1 grids).

Undecodable or missing images are logged and skipped. Images are decoded and
embedded one batch at a time in manifest order; each output file has exactly
one writer, streaming records as batches complete. Record count therefore
equals manifest image count minus skips.
"""

from __future__ import annotations

import argparse
import logging
import sys
from contextlib import ExitStack
from dataclasses import dataclass
from pathlib import Path

from PIL import Image, UnidentifiedImageError

from .backends import DEFAULT_MODEL, HIDDEN_SIZE, NUM_PATCHES, make_backend
from .formats import GridFileWriter, VectorFileWriter, read_manifest_entries

log = logging.getLogger("vitextract")


@dataclass(frozen=True)
class ExtractSummary:
    written: int
    skipped: int


def extract(
    image_dir,
    manifest_path,
    out_cls_path,
    out_grid_path=None,
    batch_size: int = 8,
    backend=None,
) -> ExtractSummary:
    if backend is None:
        backend = make_backend("dinov2")
    entries = read_manifest_entries(manifest_path)
    image_dir = Path(image_dir)

    written = 0
    skipped = 0
    with ExitStack() as stack:
        cls_writer = stack.enter_context(VectorFileWriter(out_cls_path, HIDDEN_SIZE))
        grid_writer = (
            stack.enter_context(GridFileWriter(out_grid_path, NUM_PATCHES, HIDDEN_SIZE))
            if out_grid_path is not None
            else None
        )

        batch_ids: list[int] = []
        batch_images: list[Image.Image] = []

        def flush() -> None:
            nonlocal written
            if not batch_images:
                return
            cls_batch, patch_batch = backend.embed(batch_images)
            for i, image_id in enumerate(batch_ids):
                cls_writer.append(image_id, cls_batch[i])
                if grid_writer is not None:
                    grid_writer.append(image_id, patch_batch[i])
            written += len(batch_ids)
            batch_ids.clear()
            batch_images.clear()

        for entry in entries:
            path = image_dir / entry.relative_path
            try:
                with Image.open(path) as img:
                    batch_images.append(img.convert("RGB"))
            except (FileNotFoundError, UnidentifiedImageError, OSError) as exc:
                log.warning("skipping image_id %d (%s): %s", entry.image_id, path, exc)
                skipped += 1
                continue
            batch_ids.append(entry.image_id)
            if len(batch_images) >= batch_size:
                flush()
        flush()
    return ExtractSummary(written=written, skipped=skipped)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="vitextract",
        description="extract CLS vectors and patch-token grids from an image folder",
    )
    parser.add_argument("--images", required=True, help="image directory (manifest paths are relative to it)")
    parser.add_argument("--manifest", required=True)
    parser.add_argument("--out-cls", required=True, help="output SEB1 file (dim 768)")
    parser.add_argument("--out-grids", help="optional output SPG1 file (256x768)")
    parser.add_argument("--batch-size", type=int, default=8)
    parser.add_argument("--backend", choices=("dinov2", "stub"), default="dinov2")
    parser.add_argument("--model", default=DEFAULT_MODEL, help="checkpoint name or local path")
    parser.add_argument("--device", default="cpu")
    args = parser.parse_args(argv)

    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    try:
        backend = make_backend(args.backend, model_name=args.model, device=args.device)
        summary = extract(
            args.images,
            args.manifest,
            args.out_cls,
            out_grid_path=args.out_grids,
            batch_size=args.batch_size,
            backend=backend,
        )
    except Exception as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {summary.written} records, skipped {summary.skipped} images")
    return 0


if __name__ == "__main__":
    sys.exit(main())
