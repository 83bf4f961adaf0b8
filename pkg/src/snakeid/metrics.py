"""Competition scoring: macro-F1, accuracy, and the two venom-aware tracks.

The exact official weights and error costs are not published in the material
this pipeline reproduces, so CostTable and Track1Weights are configuration
with conservative defaults, and every report records the parameters it used.

All metrics operate on observations, the submission unit.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from .errors import (
    ExtraObservation,
    MissingObservation,
    ShapeError,
    UnknownClass,
)
from .inference import Submission
from .manifest import Manifest

BREAKDOWN_KEYS = ("correct", "wrong_hh", "wrong_vv", "h_as_v", "v_as_h")


@dataclass(frozen=True)
class CostTable:
    """Per-observation error costs for the cumulative (track 2) score.

    Categories: correct species; wrong species, both harmless; wrong species,
    both venomous; harmless truth predicted venomous; venomous truth predicted
    harmless. The last is the worst error and must carry the largest cost.
    """

    c_correct: float = 0.0
    c_wrong_hh: float = 1.0
    c_wrong_vv: float = 2.0
    c_h_as_v: float = 2.0
    c_v_as_h: float = 5.0

    def __post_init__(self):
        if self.c_correct != 0.0:
            raise ValueError("c_correct must be 0")
        costs = (self.c_wrong_hh, self.c_wrong_vv, self.c_h_as_v, self.c_v_as_h)
        if any(c < 0 for c in costs):
            raise ValueError("costs must be non-negative")
        if any(self.c_v_as_h < c for c in costs):
            raise ValueError("c_v_as_h must be >= every other cost")


@dataclass(frozen=True)
class Track1Weights:
    w_f1: float = 1.0
    w_venom_kept: float = 1.0
    w_harmless_kept: float = 1.0

    def __post_init__(self):
        if min(self.w_f1, self.w_venom_kept, self.w_harmless_kept) <= 0:
            raise ValueError("track 1 weights must be positive")


@dataclass(frozen=True)
class MetricReport:
    macro_f1: float
    accuracy: float
    track1: float
    track2: float
    breakdown: dict[str, int]
    n_observations: int
    costs: CostTable
    weights: Track1Weights

    def to_dict(self) -> dict:
        return {
            "macro_f1": self.macro_f1,
            "accuracy": self.accuracy,
            "track1": self.track1,
            "track2": self.track2,
            "breakdown": dict(self.breakdown),
            "n_observations": self.n_observations,
            "costs": {
                "c_correct": self.costs.c_correct,
                "c_wrong_hh": self.costs.c_wrong_hh,
                "c_wrong_vv": self.costs.c_wrong_vv,
                "c_h_as_v": self.costs.c_h_as_v,
                "c_v_as_h": self.costs.c_v_as_h,
            },
            "weights": {
                "w_f1": self.weights.w_f1,
                "w_venom_kept": self.weights.w_venom_kept,
                "w_harmless_kept": self.weights.w_harmless_kept,
            },
        }


def _check_lengths(truth: Sequence[int], pred: Sequence[int]) -> None:
    if len(truth) != len(pred):
        raise ShapeError(f"truth has {len(truth)} entries, pred has {len(pred)}")
    if len(truth) == 0:
        raise ShapeError("cannot score zero observations")


def macro_f1(truth: Sequence[int], pred: Sequence[int]) -> float:
    """Mean per-class F1 over the union of classes in truth and pred.

    Per-class F1 = 2PR/(P+R), taken as 0 when P+R = 0 (standard convention,
    so an all-wrong run scores exactly 0).
    """
    _check_lengths(truth, pred)
    classes = sorted(set(truth) | set(pred))
    total = 0.0
    for c in classes:
        tp = sum(1 for t, p in zip(truth, pred) if t == c and p == c)
        fp = sum(1 for t, p in zip(truth, pred) if t != c and p == c)
        fn = sum(1 for t, p in zip(truth, pred) if t == c and p != c)
        denom = 2 * tp + fp + fn
        total += 2 * tp / denom if denom else 0.0
    return total / len(classes)


def accuracy(truth: Sequence[int], pred: Sequence[int]) -> float:
    _check_lengths(truth, pred)
    return sum(1 for t, p in zip(truth, pred) if t == p) / len(truth)


def _venom_lookup(venom: Mapping[int, bool], class_id: int) -> bool:
    try:
        return venom[class_id]
    except KeyError:
        raise UnknownClass(f"class_id {class_id} missing from venom map") from None


def _category(t: int, p: int, venom: Mapping[int, bool]) -> str:
    tv = _venom_lookup(venom, t)
    pv = _venom_lookup(venom, p)
    if t == p:
        return "correct"
    if tv and pv:
        return "wrong_vv"
    if not tv and not pv:
        return "wrong_hh"
    if tv and not pv:
        return "v_as_h"
    return "h_as_v"


def confusion_breakdown(
    truth: Sequence[int], pred: Sequence[int], venom: Mapping[int, bool]
) -> dict[str, int]:
    """Observation counts per cost category; values sum to len(truth)."""
    _check_lengths(truth, pred)
    counts = {k: 0 for k in BREAKDOWN_KEYS}
    for t, p in zip(truth, pred):
        counts[_category(t, p, venom)] += 1
    return counts


def track2_score(
    truth: Sequence[int],
    pred: Sequence[int],
    venom: Mapping[int, bool],
    costs: CostTable = CostTable(),
) -> float:
    """Cumulative venom-aware error cost; 0 is perfect, lower is better."""
    counts = confusion_breakdown(truth, pred, venom)
    return (
        counts["correct"] * costs.c_correct
        + counts["wrong_hh"] * costs.c_wrong_hh
        + counts["wrong_vv"] * costs.c_wrong_vv
        + counts["h_as_v"] * costs.c_h_as_v
        + counts["v_as_h"] * costs.c_v_as_h
    )


def track1_score(
    truth: Sequence[int],
    pred: Sequence[int],
    venom: Mapping[int, bool],
    weights: Track1Weights = Track1Weights(),
) -> float:
    """Weighted average percentage of macro-F1 and venom-status retention.

    100 * (w_f1*F1 + w_v*A_v + w_h*A_h) / (w_f1 + w_v + w_h) where A_v is the
    fraction of venomous observations predicted as a venomous species and A_h
    the harmless counterpart; an empty group counts as perfectly retained.
    """
    _check_lengths(truth, pred)
    f1 = macro_f1(truth, pred)
    venom_total = venom_kept = harmless_total = harmless_kept = 0
    for t, p in zip(truth, pred):
        tv = _venom_lookup(venom, t)
        pv = _venom_lookup(venom, p)
        if tv:
            venom_total += 1
            venom_kept += pv
        else:
            harmless_total += 1
            harmless_kept += not pv
    a_v = venom_kept / venom_total if venom_total else 1.0
    a_h = harmless_kept / harmless_total if harmless_total else 1.0
    w = weights
    total = w.w_f1 + w.w_venom_kept + w.w_harmless_kept
    return 100.0 * (w.w_f1 * f1 + w.w_venom_kept * a_v + w.w_harmless_kept * a_h) / total


def metric_report(
    manifest: Manifest,
    submission: Submission,
    costs: CostTable = CostTable(),
    weights: Track1Weights = Track1Weights(),
) -> MetricReport:
    """Score a submission against the manifest's test observations.

    The submission must cover exactly the test observation ids. The venom map
    is taken from the whole manifest so predictions of train-only species are
    still classifiable.
    """
    truth_obs = manifest.observation_ids("test")
    if not truth_obs:
        raise MissingObservation("manifest has no test observations to score")
    predicted = submission.as_dict()
    missing = [o for o in truth_obs if o not in predicted]
    if missing:
        raise MissingObservation(f"submission missing observation_id {missing[0]}")
    extra = sorted(set(predicted) - set(truth_obs))
    if extra:
        raise ExtraObservation(f"submission has unknown observation_id {extra[0]}")

    order = sorted(truth_obs)
    truth = [manifest.observation_class(o) for o in order]
    pred = [predicted[o] for o in order]
    venom = manifest.venom_map()
    breakdown = confusion_breakdown(truth, pred, venom)
    return MetricReport(
        macro_f1=macro_f1(truth, pred),
        accuracy=accuracy(truth, pred),
        track1=track1_score(truth, pred, venom, weights),
        track2=track2_score(truth, pred, venom, costs),
        breakdown=breakdown,
        n_observations=len(order),
        costs=costs,
        weights=weights,
    )
