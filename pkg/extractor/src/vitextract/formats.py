"""Writers for the pipeline's binary embedding formats, plus a manifest reader.

The layouts mirror the classification pipeline's documented contract (see the
main README): little-endian, dtype code 1 = f32.

  SEB1: magic | u32 count | u32 dim | u8 dtype, then [u64 image_id][dim f32]*
  SPG1: magic | u32 count | u32 rows | u32 cols | u8 dtype,
        then [u64 image_id][rows*cols f32 row-major]*

Writers stream: records are appended as they arrive and the count is patched
into the header on close, so grids never have to sit in memory all at once.
This package deliberately does not import the pipeline: the files are the
interface.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

VECTOR_MAGIC = b"SEB1"
GRID_MAGIC = b"SPG1"
DTYPE_F32 = 1

MANIFEST_HEADER = "observation_id,image_id,relative_path,class_id,venomous,split"


@dataclass(frozen=True)
class ManifestEntry:
    image_id: int
    relative_path: str


def read_manifest_entries(path) -> list[ManifestEntry]:
    """(image_id, relative_path) per row, in file order."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0].strip() != MANIFEST_HEADER:
        raise ValueError(f"{path}: expected manifest header {MANIFEST_HEADER!r}")
    entries = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 6:
            raise ValueError(f"{path}:{lineno}: expected 6 fields, got {len(parts)}")
        entries.append(ManifestEntry(int(parts[1]), parts[2]))
    return entries


class _StreamWriter:
    """Append records to an embedding file; the count is fixed up on close."""

    def __init__(self, path, header: bytes, record_shape: tuple[int, ...]):
        self._fh = open(path, "wb")
        self._fh.write(header)
        self._shape = record_shape
        self._count = 0

    def append(self, image_id: int, values: np.ndarray) -> None:
        values = np.ascontiguousarray(values, dtype="<f4")
        if values.shape != self._shape:
            raise ValueError(f"record shape {values.shape} != expected {self._shape}")
        self._fh.write(struct.pack("<Q", image_id))
        self._fh.write(values.tobytes())
        self._count += 1

    def close(self) -> None:
        self._fh.seek(4)
        self._fh.write(struct.pack("<I", self._count))
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


class VectorFileWriter(_StreamWriter):
    def __init__(self, path, dim: int):
        header = struct.pack("<4sIIB", VECTOR_MAGIC, 0, dim, DTYPE_F32)
        super().__init__(path, header, (dim,))


class GridFileWriter(_StreamWriter):
    def __init__(self, path, rows: int, cols: int):
        header = struct.pack("<4sIIIB", GRID_MAGIC, 0, rows, cols, DTYPE_F32)
        super().__init__(path, header, (rows, cols))


def write_vector_file(path, image_ids, vectors: np.ndarray) -> None:
    with VectorFileWriter(path, vectors.shape[1]) as writer:
        for image_id, vec in zip(image_ids, vectors):
            writer.append(image_id, vec)


def write_grid_file(path, image_ids, grids: np.ndarray) -> None:
    with GridFileWriter(path, grids.shape[1], grids.shape[2]) as writer:
        for image_id, grid in zip(image_ids, grids):
            writer.append(image_id, grid)
