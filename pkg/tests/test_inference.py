from itertools import product

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import mode_first_tiebreak
from snakeid.classifier import LinearModel
from snakeid.embedstore import VectorStore
from snakeid.errors import (
    DuplicateObservation,
    EmptyObservation,
    LabelRangeError,
    MissingFeature,
    ParseError,
)
from snakeid.inference import (
    Submission,
    aggregate_observation,
    parse_submission,
    predict_image,
    predict_observations,
    validate_submission,
)
from snakeid.manifest import ClassIndexMap, Manifest, ManifestRow

rng = np.random.default_rng(99)


# --- per-image argmax -----------------------------------------------------------


def model_with_logits_equal_input(k):
    return LinearModel(np.eye(k), np.zeros(k))


def test_predict_image_argmax():
    model = model_with_logits_equal_input(3)
    assert predict_image(model, [0.1, 0.9, 0.3]) == 1


def test_predict_image_tie_lowest_index():
    model = model_with_logits_equal_input(2)
    assert predict_image(model, [1.0, 1.0]) == 0


def test_predict_image_matches_scan():
    model = LinearModel(rng.standard_normal((7, 5)), rng.standard_normal(7))
    for _ in range(50):
        x = rng.standard_normal(5)
        logits = model.W @ x + model.b
        best, best_i = -np.inf, -1
        for i, v in enumerate(logits):
            if v > best:
                best, best_i = v, i
        assert predict_image(model, x) == best_i


# --- aggregation ----------------------------------------------------------------


def test_aggregate_unique_mode():
    assert aggregate_observation([3, 3, 5]) == 3


def test_aggregate_tie_uses_first_image():
    assert aggregate_observation([5, 3, 3, 5]) == 5


def test_aggregate_singleton():
    assert aggregate_observation([7]) == 7


def test_aggregate_empty():
    with pytest.raises(EmptyObservation):
        aggregate_observation([])


def test_aggregate_exhaustive_vs_oracle():
    for length in range(1, 5):
        for preds in product(range(3), repeat=length):
            assert aggregate_observation(list(preds)) == mode_first_tiebreak(list(preds))


@given(st.lists(st.integers(0, 5), min_size=1, max_size=12), st.randoms())
def test_aggregate_result_in_input_and_tail_permutation_invariant(preds, shuffler):
    result = aggregate_observation(preds)
    assert result in preds
    tail = preds[1:]
    shuffler.shuffle(tail)
    assert aggregate_observation([preds[0]] + tail) == result


# --- observation prediction ------------------------------------------------------


def fixture_manifest_and_features():
    """5 test observations, hand-traceable with the identity-logits model.

    Feature dim = 2, map {12 -> 0, 1754 -> 1}. Each image's prediction is the
    argmax of its own feature vector.
    """
    rows = [
        # obs 1: predictions [0] -> 12
        ManifestRow(1, 10, "a.jpg", 12, False, "test"),
        # obs 2: [1, 1, 0] -> mode 1 -> 1754
        ManifestRow(2, 20, "b.jpg", 1754, True, "test"),
        ManifestRow(2, 21, "c.jpg", 1754, True, "test"),
        ManifestRow(2, 22, "d.jpg", 1754, True, "test"),
        # obs 3: [1, 0] -> tie, first image says 1 -> 1754
        ManifestRow(3, 30, "e.jpg", 12, False, "test"),
        ManifestRow(3, 31, "f.jpg", 12, False, "test"),
        # obs 4: [0, 0] -> 12
        ManifestRow(4, 40, "g.jpg", 12, False, "test"),
        ManifestRow(4, 41, "h.jpg", 12, False, "test"),
        # obs 5: tie with equal logits -> index 0 per image -> 12
        ManifestRow(5, 50, "i.jpg", 1754, True, "test"),
        # train rows so both classes exist in training
        ManifestRow(6, 60, "j.jpg", 12, False, "train"),
        ManifestRow(7, 70, "k.jpg", 1754, True, "train"),
    ]
    vectors = {
        10: [1.0, 0.0],
        20: [0.0, 1.0],
        21: [0.0, 2.0],
        22: [3.0, 0.0],
        30: [0.0, 1.0],
        31: [1.0, 0.0],
        40: [2.0, 0.0],
        41: [5.0, 1.0],
        50: [1.0, 1.0],
        60: [1.0, 0.0],
        70: [0.0, 1.0],
    }
    store = VectorStore.from_records(2, sorted(vectors.items()))
    return Manifest(tuple(rows)), store


def test_predict_observations_hand_traced():
    manifest, store = fixture_manifest_and_features()
    cmap = ClassIndexMap((12, 1754))
    sub = predict_observations(model_with_logits_equal_input(2), store, manifest, cmap)
    assert sub.rows == ((1, 12), (2, 1754), (3, 1754), (4, 12), (5, 12))


def test_predicted_ids_are_species_not_indices():
    manifest, store = fixture_manifest_and_features()
    cmap = ClassIndexMap((12, 1754))
    sub = predict_observations(model_with_logits_equal_input(2), store, manifest, cmap)
    for _, class_id in sub.rows:
        assert class_id in (12, 1754)
        assert class_id not in (0, 1)  # raw indices must never leak
    validate_submission(sub, cmap)


def test_single_image_observation_equals_composition():
    manifest, store = fixture_manifest_and_features()
    cmap = ClassIndexMap((12, 1754))
    model = model_with_logits_equal_input(2)
    sub = predict_observations(model, store, manifest, cmap).as_dict()
    idx = predict_image(model, store.vector_for(10))
    assert sub[1] == cmap.from_index(idx)


def test_missing_feature():
    manifest, store = fixture_manifest_and_features()
    partial = VectorStore(2, store.image_ids[:-3], store.vectors[:-3])
    with pytest.raises(MissingFeature):
        predict_observations(
            model_with_logits_equal_input(2), partial, manifest, ClassIndexMap((12, 1754))
        )


def test_validate_submission_catches_raw_indices():
    cmap = ClassIndexMap((12, 1754))
    bad = Submission(((1, 0), (2, 1)))
    with pytest.raises(LabelRangeError):
        validate_submission(bad, cmap)


# --- submission csv ---------------------------------------------------------------


def test_submission_round_trip():
    sub = Submission(((1, 12), (2, 1754)))
    assert parse_submission(sub.to_csv()) == sub


def test_empty_submission_is_header_only():
    sub = Submission(())
    assert sub.to_csv() == "observation_id,class_id\n"
    assert parse_submission(sub.to_csv()) == sub


def test_duplicate_observation_rejected():
    with pytest.raises(DuplicateObservation):
        parse_submission("observation_id,class_id\n1,5\n1,6\n")
    with pytest.raises(DuplicateObservation):
        Submission(((1, 5), (1, 6)))


def test_submission_bad_header():
    with pytest.raises(ParseError):
        parse_submission("obs,cls\n1,5\n")
