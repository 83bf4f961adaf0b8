"""Dataset manifest, train/test splits and the species-id <-> index bijection.

The manifest is the single table driving every pipeline stage: one row per
image, grouped into observations (one animal encounter, possibly several
images). Labels, venomous flags and the train/test split are attached to
observations; images inherit them.

A trained classifier works on contiguous indices 0..K-1. ClassIndexMap is the
bijection between those indices and the sparse species class ids, and it is
persisted next to every trained model so inference can never emit a raw index
by accident.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

from .errors import (
    DuplicateImage,
    EmptyTrainingSet,
    InconsistentObservation,
    InconsistentVenomFlag,
    LabelRangeError,
    ParseError,
)

MANIFEST_HEADER = "observation_id,image_id,relative_path,class_id,venomous,split"
CLASSMAP_HEADER = "class_id,index"
SPLITS = ("train", "test")


@dataclass(frozen=True)
class ManifestRow:
    observation_id: int
    image_id: int
    relative_path: str
    class_id: int
    venomous: bool
    split: str


@dataclass(frozen=True)
class Manifest:
    """Immutable manifest; row order is file order and is canonical."""

    rows: tuple[ManifestRow, ...]

    def __post_init__(self):
        _check_invariants(self.rows)

    def __len__(self) -> int:
        return len(self.rows)

    def split_rows(self, split: str) -> list[ManifestRow]:
        return [r for r in self.rows if r.split == split]

    def observation_ids(self, split: str | None = None) -> list[int]:
        """Distinct observation ids in first-appearance (manifest) order."""
        seen: dict[int, None] = {}
        for r in self.rows:
            if split is None or r.split == split:
                seen.setdefault(r.observation_id, None)
        return list(seen)

    @cached_property
    def _by_observation(self) -> dict[int, tuple[ManifestRow, ...]]:
        grouped: dict[int, list[ManifestRow]] = {}
        for r in self.rows:
            grouped.setdefault(r.observation_id, []).append(r)
        return {k: tuple(v) for k, v in grouped.items()}

    def observation_rows(self, observation_id: int) -> tuple[ManifestRow, ...]:
        return self._by_observation[observation_id]

    def observation_class(self, observation_id: int) -> int:
        return self._by_observation[observation_id][0].class_id

    def venom_map(self) -> dict[int, bool]:
        """class_id -> venomous flag, covering every class in the manifest."""
        return {r.class_id: r.venomous for r in self.rows}

    def to_csv(self) -> str:
        lines = [MANIFEST_HEADER]
        for r in self.rows:
            lines.append(
                f"{r.observation_id},{r.image_id},{r.relative_path},"
                f"{r.class_id},{int(r.venomous)},{r.split}"
            )
        return "\n".join(lines) + "\n"


def _check_invariants(rows: tuple[ManifestRow, ...]) -> None:
    seen_images: set[int] = set()
    obs_attrs: dict[int, tuple[int, bool, str]] = {}
    class_venom: dict[int, bool] = {}
    for r in rows:
        if r.image_id in seen_images:
            raise DuplicateImage(f"image_id {r.image_id} appears more than once")
        seen_images.add(r.image_id)
        if r.split not in SPLITS:
            raise ParseError(f"split must be one of {SPLITS}, got {r.split!r}")
        attrs = (r.class_id, r.venomous, r.split)
        prev = obs_attrs.setdefault(r.observation_id, attrs)
        if prev != attrs:
            raise InconsistentObservation(
                f"observation {r.observation_id} mixes "
                f"(class_id, venomous, split) {prev} and {attrs}"
            )
        prev_venom = class_venom.setdefault(r.class_id, r.venomous)
        if prev_venom != r.venomous:
            raise InconsistentVenomFlag(
                f"class_id {r.class_id} is flagged both venomous and harmless"
            )


def parse_manifest(text: str) -> Manifest:
    """Parse manifest CSV. Raises ParseError with the offending line number."""
    lines = text.splitlines()
    if not lines or lines[0].strip() != MANIFEST_HEADER:
        raise ParseError(f"line 1: expected header {MANIFEST_HEADER!r}")
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 6:
            raise ParseError(f"line {lineno}: expected 6 fields, got {len(parts)}")
        obs_s, img_s, path, cls_s, venom_s, split = parts
        try:
            obs_id = int(obs_s)
            img_id = int(img_s)
            cls_id = int(cls_s)
        except ValueError as exc:
            raise ParseError(f"line {lineno}: {exc}") from None
        if venom_s not in ("0", "1"):
            raise ParseError(f"line {lineno}: venomous must be 0 or 1, got {venom_s!r}")
        if split not in SPLITS:
            raise ParseError(f"line {lineno}: split must be train or test, got {split!r}")
        rows.append(ManifestRow(obs_id, img_id, path, cls_id, venom_s == "1", split))
    return Manifest(tuple(rows))


def load_manifest(path) -> Manifest:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_manifest(fh.read())


@dataclass(frozen=True)
class ClassIndexMap:
    """Bijection between sparse class ids and contiguous model indices.

    backward[i] is the class id at index i, sorted ascending by class id;
    forward inverts it. Forgetting to apply `backward` when emitting
    predictions is exactly the failure this type exists to prevent.
    """

    backward: tuple[int, ...]
    forward: dict[int, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        fwd = {c: i for i, c in enumerate(self.backward)}
        if len(fwd) != len(self.backward):
            raise LabelRangeError("class ids in backward array are not unique")
        if list(self.backward) != sorted(self.backward):
            raise LabelRangeError("backward array must be sorted ascending by class_id")
        object.__setattr__(self, "forward", fwd)

    @property
    def num_classes(self) -> int:
        return len(self.backward)

    def to_index(self, class_id: int) -> int:
        try:
            return self.forward[class_id]
        except KeyError:
            raise LabelRangeError(f"class_id {class_id} not in training label set") from None

    def from_index(self, index: int) -> int:
        if not 0 <= index < len(self.backward):
            raise LabelRangeError(f"index {index} outside 0..{len(self.backward) - 1}")
        return self.backward[index]

    def to_csv(self) -> str:
        lines = [CLASSMAP_HEADER]
        lines.extend(f"{c},{i}" for i, c in enumerate(self.backward))
        return "\n".join(lines) + "\n"


def build_class_index_map(manifest: Manifest) -> ClassIndexMap:
    """Index the distinct train-split class ids in ascending order."""
    train_classes = {r.class_id for r in manifest.rows if r.split == "train"}
    if not train_classes:
        raise EmptyTrainingSet("manifest has no train rows")
    return ClassIndexMap(tuple(sorted(train_classes)))


def parse_class_index_map(text: str) -> ClassIndexMap:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0].strip() != CLASSMAP_HEADER:
        raise ParseError(f"line 1: expected header {CLASSMAP_HEADER!r}")
    backward = []
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.split(",")
        if len(parts) != 2:
            raise ParseError(f"line {lineno}: expected 2 fields, got {len(parts)}")
        try:
            class_id, index = int(parts[0]), int(parts[1])
        except ValueError as exc:
            raise ParseError(f"line {lineno}: {exc}") from None
        if index != lineno - 2:
            raise ParseError(f"line {lineno}: rows must be sorted by index, expected {lineno - 2}")
        backward.append(class_id)
    return ClassIndexMap(tuple(backward))


def load_class_index_map(path) -> ClassIndexMap:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_class_index_map(fh.read())


def save_class_index_map(cmap: ClassIndexMap, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(cmap.to_csv())
