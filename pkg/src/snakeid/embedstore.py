"""Bit-exact binary storage for embedding vectors and patch-token grids.

Two little-endian formats, trivially parseable from any language:

  vectors (magic SEB1):  4s magic | u32 count | u32 dim | u8 dtype
                         then count records of [u64 image_id][dim f32]
  grids   (magic SPG1):  4s magic | u32 count | u32 rows | u32 cols | u8 dtype
                         then count records of [u64 image_id][rows*cols f32 row-major]

dtype code 1 is 32-bit IEEE-754 float and is the only code defined.
These layouts are the contract with the embedding-extraction adapter; see the
README for a hex dump of a minimal file.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import CorruptValue, FormatError, TruncatedFile

VECTOR_MAGIC = b"SEB1"
GRID_MAGIC = b"SPG1"
DTYPE_F32 = 1

_VEC_HEADER = struct.Struct("<4sIIB")
_GRID_HEADER = struct.Struct("<4sIIIB")


@dataclass(frozen=True, eq=False)
class VectorStore:
    """Fixed-dimension f32 vectors keyed by unique image id, in file order."""

    dim: int
    image_ids: np.ndarray  # (N,) int64
    vectors: np.ndarray  # (N, dim) float32

    def __post_init__(self):
        if self.dim < 1:
            raise FormatError(f"dim must be positive, got {self.dim}")
        ids = np.asarray(self.image_ids, dtype=np.int64)
        vecs = np.ascontiguousarray(np.asarray(self.vectors, dtype=np.float32))
        if vecs.shape != (len(ids), self.dim):
            raise FormatError(f"vectors shape {vecs.shape} != ({len(ids)}, {self.dim})")
        if len(np.unique(ids)) != len(ids):
            raise FormatError("image_ids are not unique")
        if not np.all(np.isfinite(vecs)):
            raise CorruptValue("non-finite value in vector store")
        object.__setattr__(self, "image_ids", ids)
        object.__setattr__(self, "vectors", vecs)

    def __len__(self) -> int:
        return len(self.image_ids)

    @cached_property
    def _index(self) -> dict[int, int]:
        return {int(i): pos for pos, i in enumerate(self.image_ids)}

    def __contains__(self, image_id: int) -> bool:
        return image_id in self._index

    def vector_for(self, image_id: int) -> np.ndarray:
        return self.vectors[self._index[image_id]]

    @classmethod
    def from_records(cls, dim: int, records) -> "VectorStore":
        records = list(records)
        ids = np.array([r[0] for r in records], dtype=np.int64)
        if records:
            vecs = np.array([r[1] for r in records], dtype=np.float32)
        else:
            vecs = np.zeros((0, dim), dtype=np.float32)
        return cls(dim, ids, vecs)


@dataclass(frozen=True, eq=False)
class GridStore:
    """rows x cols f32 matrices keyed by unique image id, in file order."""

    rows: int
    cols: int
    image_ids: np.ndarray  # (N,) int64
    grids: np.ndarray  # (N, rows, cols) float32

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise FormatError(f"grid shape must be positive, got {self.rows}x{self.cols}")
        ids = np.asarray(self.image_ids, dtype=np.int64)
        grids = np.ascontiguousarray(np.asarray(self.grids, dtype=np.float32))
        if grids.shape != (len(ids), self.rows, self.cols):
            raise FormatError(
                f"grids shape {grids.shape} != ({len(ids)}, {self.rows}, {self.cols})"
            )
        if len(np.unique(ids)) != len(ids):
            raise FormatError("image_ids are not unique")
        if not np.all(np.isfinite(grids)):
            raise CorruptValue("non-finite value in grid store")
        object.__setattr__(self, "image_ids", ids)
        object.__setattr__(self, "grids", grids)

    def __len__(self) -> int:
        return len(self.image_ids)

    @cached_property
    def _index(self) -> dict[int, int]:
        return {int(i): pos for pos, i in enumerate(self.image_ids)}

    def __contains__(self, image_id: int) -> bool:
        return image_id in self._index

    def grid_for(self, image_id: int) -> np.ndarray:
        return self.grids[self._index[image_id]]


def _record_dtype(values_len: int) -> np.dtype:
    return np.dtype([("id", "<u8"), ("values", "<f4", (values_len,))])


def write_vectors(store: VectorStore) -> bytes:
    header = _VEC_HEADER.pack(VECTOR_MAGIC, len(store), store.dim, DTYPE_F32)
    rec = np.empty(len(store), dtype=_record_dtype(store.dim))
    rec["id"] = store.image_ids.astype(np.uint64)
    rec["values"] = store.vectors.reshape(len(store), store.dim)
    return header + rec.tobytes()


def read_vectors(data: bytes) -> VectorStore:
    if len(data) < _VEC_HEADER.size:
        raise TruncatedFile(f"file too short for header: {len(data)} bytes")
    magic, count, dim, dtype = _VEC_HEADER.unpack_from(data)
    if magic != VECTOR_MAGIC:
        raise FormatError(f"bad magic {magic!r}, expected {VECTOR_MAGIC!r}")
    if dtype != DTYPE_F32:
        raise FormatError(f"unknown dtype code {dtype}")
    if dim < 1:
        raise FormatError(f"dim must be positive, got {dim}")
    expected = _VEC_HEADER.size + count * (8 + 4 * dim)
    if len(data) != expected:
        raise TruncatedFile(
            f"declared {count} records of dim {dim} need {expected} bytes, file has {len(data)}"
        )
    rec = np.frombuffer(data, dtype=_record_dtype(dim), count=count, offset=_VEC_HEADER.size)
    ids = rec["id"].astype(np.int64)
    vecs = rec["values"].reshape(count, dim).copy()
    if not np.all(np.isfinite(vecs)):
        raise CorruptValue("non-finite value in vector file")
    return VectorStore(dim, ids, vecs)


def write_grids(store: GridStore) -> bytes:
    header = _GRID_HEADER.pack(GRID_MAGIC, len(store), store.rows, store.cols, DTYPE_F32)
    per = store.rows * store.cols
    rec = np.empty(len(store), dtype=_record_dtype(per))
    rec["id"] = store.image_ids.astype(np.uint64)
    rec["values"] = store.grids.reshape(len(store), per)
    return header + rec.tobytes()


def read_grids(data: bytes) -> GridStore:
    if len(data) < _GRID_HEADER.size:
        raise TruncatedFile(f"file too short for header: {len(data)} bytes")
    magic, count, rows, cols, dtype = _GRID_HEADER.unpack_from(data)
    if magic != GRID_MAGIC:
        raise FormatError(f"bad magic {magic!r}, expected {GRID_MAGIC!r}")
    if dtype != DTYPE_F32:
        raise FormatError(f"unknown dtype code {dtype}")
    if rows < 1 or cols < 1:
        raise FormatError(f"grid shape must be positive, got {rows}x{cols}")
    per = rows * cols
    expected = _GRID_HEADER.size + count * (8 + 4 * per)
    if len(data) != expected:
        raise TruncatedFile(
            f"declared {count} records of {rows}x{cols} need {expected} bytes, "
            f"file has {len(data)}"
        )
    rec = np.frombuffer(data, dtype=_record_dtype(per), count=count, offset=_GRID_HEADER.size)
    ids = rec["id"].astype(np.int64)
    grids = rec["values"].reshape(count, rows, cols).copy()
    if not np.all(np.isfinite(grids)):
        raise CorruptValue("non-finite value in grid file")
    return GridStore(rows, cols, ids, grids)


def load_vectors(path) -> VectorStore:
    with open(path, "rb") as fh:
        return read_vectors(fh.read())


def save_vectors(store: VectorStore, path) -> None:
    with open(path, "wb") as fh:
        fh.write(write_vectors(store))


def load_grids(path) -> GridStore:
    with open(path, "rb") as fh:
        return read_grids(fh.read())


def save_grids(store: GridStore, path) -> None:
    with open(path, "wb") as fh:
        fh.write(write_grids(store))
