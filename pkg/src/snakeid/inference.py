"""Offline prediction: per-image argmax, observation-level mode aggregation,
and the index -> species-id inverse mapping.

predict_observations never emits a contiguous model index: every output row
passes through ClassIndexMap.from_index, and validate_submission re-checks a
finished submission against the map. Keep both in place; a submission full of
raw indices scores zero on a leaderboard while looking plausible locally.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .classifier import LinearModel, forward
from .embedstore import VectorStore
from .errors import (
    DuplicateObservation,
    EmptyObservation,
    LabelRangeError,
    MissingFeature,
    ParseError,
)
from .manifest import ClassIndexMap, Manifest

SUBMISSION_HEADER = "observation_id,class_id"


@dataclass(frozen=True)
class Submission:
    """(observation_id, predicted species class_id) rows, one per observation."""

    rows: tuple[tuple[int, int], ...]

    def __post_init__(self):
        seen: set[int] = set()
        for obs_id, _ in self.rows:
            if obs_id in seen:
                raise DuplicateObservation(f"observation_id {obs_id} appears twice")
            seen.add(obs_id)

    def __len__(self) -> int:
        return len(self.rows)

    def as_dict(self) -> dict[int, int]:
        return dict(self.rows)

    def to_csv(self) -> str:
        lines = [SUBMISSION_HEADER]
        lines.extend(f"{obs},{cls}" for obs, cls in self.rows)
        return "\n".join(lines) + "\n"


def predict_image(model: LinearModel, x) -> int:
    """Argmax class index for one feature vector; ties go to the lowest index."""
    logits = forward(model, x)
    return int(np.argmax(logits))


def aggregate_observation(per_image_predictions) -> int:
    """Most frequent prediction; any tie for max frequency returns the first
    image's prediction (manifest order)."""
    preds = list(per_image_predictions)
    if not preds:
        raise EmptyObservation("no per-image predictions to aggregate")
    counts: dict[int, int] = {}
    for p in preds:
        counts[p] = counts.get(p, 0) + 1
    best = max(counts.values())
    tied = [p for p, c in counts.items() if c == best]
    if len(tied) == 1:
        return tied[0]
    return preds[0]


def predict_observations(
    model: LinearModel,
    features: VectorStore,
    manifest: Manifest,
    cmap: ClassIndexMap,
) -> Submission:
    """Predict every test observation and map indices back to species ids."""
    per_obs: dict[int, list[int]] = {}
    for r in manifest.rows:
        if r.split != "test":
            continue
        if r.image_id not in features:
            raise MissingFeature(f"no feature vector for image_id {r.image_id}")
        per_obs.setdefault(r.observation_id, []).append(
            predict_image(model, features.vector_for(r.image_id))
        )
    rows = []
    for obs_id in sorted(per_obs):
        index = aggregate_observation(per_obs[obs_id])
        assert 0 <= index < cmap.num_classes
        rows.append((obs_id, cmap.from_index(index)))
    return Submission(tuple(rows))


def validate_submission(submission: Submission, cmap: ClassIndexMap) -> None:
    """Reject any emitted class_id outside the training label set."""
    known = set(cmap.backward)
    for obs_id, class_id in submission.rows:
        if class_id not in known:
            raise LabelRangeError(
                f"observation {obs_id}: class_id {class_id} is not a training label "
                "(a contiguous index leaked through?)"
            )


def parse_submission(text: str) -> Submission:
    lines = text.splitlines()
    if not lines or lines[0].strip() != SUBMISSION_HEADER:
        raise ParseError(f"line 1: expected header {SUBMISSION_HEADER!r}")
    rows = []
    seen: set[int] = set()
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise ParseError(f"line {lineno}: expected 2 fields, got {len(parts)}")
        try:
            obs_id, class_id = int(parts[0]), int(parts[1])
        except ValueError as exc:
            raise ParseError(f"line {lineno}: {exc}") from None
        if obs_id in seen:
            raise DuplicateObservation(f"line {lineno}: observation_id {obs_id} appears twice")
        seen.add(obs_id)
        rows.append((obs_id, class_id))
    return Submission(tuple(rows))


def load_submission(path) -> Submission:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_submission(fh.read())


def save_submission(submission: Submission, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(submission.to_csv())
