import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cardsmith.cards import COLOR_LABELS, TYPE_LABELS
from cardsmith.errors import LabelSetError
from cardsmith.prediction import PredictionVector, from_probabilities, label_distance, normalize

# Published example vectors (percent): an image-side color prediction for a
# multicolored card and a text-side color prediction for an existing card.
IMAGE_COLOR_PERCENT = {"White": 27.49, "Blue": 9.73, "Black": 27.14, "Red": 8.49, "Green": 27.15, "Colorless": 0.00}
TEXT_COLOR_PERCENT = {"White": 17.79, "Blue": 26.37, "Black": 16.34, "Red": 12.16, "Green": 27.34, "Colorless": 0.00}
# The owl example's type vector, with its impossible negative entry.
NEGATIVE_TYPE_PERCENT = {"Creature": 55.11, "Artifact": 26.66, "Enchantment": -5.36, "InstantSorcery": 12.87, "Land": 0.00}
# Text-side type prediction for the same existing card: near-tie on top, zero floor.
TEXT_TYPE_PERCENT = {"Creature": 36.44, "Artifact": 18.44, "Enchantment": 37.65, "InstantSorcery": 7.48, "Land": 0.00}


def unit_vectors(labels):
    return st.lists(st.floats(0.0, 1.0, allow_nan=False), min_size=len(labels), max_size=len(labels)) \
        .filter(lambda xs: sum(xs) > 1e-9) \
        .map(lambda xs: normalize(dict(zip(labels, xs))))


class TestPredictionVector:
    def test_invariants_enforced(self):
        with pytest.raises(LabelSetError):
            PredictionVector(("a", "b"), (0.9, 0.2))
        with pytest.raises(LabelSetError):
            PredictionVector(("a", "b"), (-0.1, 1.1))
        with pytest.raises(LabelSetError):
            PredictionVector(("a", "a"), (0.5, 0.5))

    def test_argmax_label(self):
        v = normalize({"x": 1.0, "y": 3.0})
        assert v.argmax_label() == "y"

    def test_from_probabilities_validates_length(self):
        with pytest.raises(LabelSetError):
            from_probabilities([0.5, 0.5], "color")
        v = from_probabilities([1, 0, 0, 0, 0], "type")
        assert v.labels == TYPE_LABELS

    def test_published_vector_shapes_are_valid(self):
        # Shape fixtures only: the published example vectors satisfy every
        # invariant as-is, near-ties and zero floors included.
        color = normalize(IMAGE_COLOR_PERCENT)
        assert color.argmax_label() == "White"
        top3 = sorted(color.scores, reverse=True)[:3]
        assert top3[0] - top3[2] < 0.005           # three-way near-tie
        assert min(color.scores) == 0.0            # hard zero floor
        type_vec = normalize(TEXT_TYPE_PERCENT)
        assert type_vec.argmax_label() == "Enchantment"
        assert type_vec.as_dict()["Land"] == 0.0


class TestNormalize:
    def test_idempotent_on_normalized_input(self):
        v = normalize({"a": 0.25, "b": 0.75})
        again = normalize(v.as_dict())
        assert np.allclose(v.as_array(), again.as_array(), atol=1e-9)

    def test_negative_entry_clamped_then_renormalized(self):
        v = normalize(NEGATIVE_TYPE_PERCENT)
        d = v.as_dict()
        assert d["Enchantment"] == 0.0
        remaining = 55.11 + 26.66 + 12.87
        assert d["Creature"] == pytest.approx(55.11 / remaining)
        assert d["Artifact"] == pytest.approx(26.66 / remaining)
        assert sum(d.values()) == pytest.approx(1.0, abs=1e-9)

    def test_all_zero_becomes_uniform(self):
        v = normalize({l: 0.0 for l in TYPE_LABELS})
        assert all(s == pytest.approx(0.2) for s in v.scores)

    def test_empty_label_set_is_error(self):
        with pytest.raises(LabelSetError):
            normalize({})

    @given(st.lists(st.floats(-5, 5, allow_nan=False, allow_infinity=False), min_size=1, max_size=8))
    def test_always_emits_valid_vector(self, xs):
        labels = tuple(f"l{i}" for i in range(len(xs)))
        v = normalize(dict(zip(labels, xs)))
        assert sum(v.scores) == pytest.approx(1.0, abs=1e-6)
        assert all(s >= 0 for s in v.scores)


class TestLabelDistance:
    def test_identical_vectors_distance_zero(self):
        v = normalize({l: p for l, p in IMAGE_COLOR_PERCENT.items()})
        assert label_distance(v, v) == 0.0

    def test_disjoint_point_masses_distance_two(self):
        a = normalize({"x": 1.0, "y": 0.0})
        b = normalize({"x": 0.0, "y": 1.0})
        assert label_distance(a, b) == pytest.approx(2.0)

    def test_published_color_pair_hand_sum(self):
        # Hand-summed oracle over the two published color vectors:
        # |27.49-17.79| + |9.73-26.37| + |27.14-16.34| + |8.49-12.16|
        # + |27.15-27.34| + |0-0| = 41.00 percent = 0.4100.
        image = normalize(IMAGE_COLOR_PERCENT)
        text = normalize(TEXT_COLOR_PERCENT)
        assert label_distance(image, text) == pytest.approx(0.4100, abs=1e-4)

    def test_label_set_mismatch(self):
        with pytest.raises(LabelSetError):
            label_distance(normalize({"a": 1.0}), normalize({"b": 1.0}))

    def test_alignment_is_by_label_not_position(self):
        a = normalize({"x": 0.7, "y": 0.3})
        b = normalize({"y": 0.3, "x": 0.7})
        assert label_distance(a, b) == pytest.approx(0.0)

    @settings(max_examples=150)
    @given(unit_vectors(COLOR_LABELS), unit_vectors(COLOR_LABELS), unit_vectors(COLOR_LABELS))
    def test_metric_properties(self, a, b, c):
        dab = label_distance(a, b)
        assert dab >= 0
        assert dab == pytest.approx(label_distance(b, a))
        assert label_distance(a, a) == pytest.approx(0.0, abs=1e-12)
        assert dab + label_distance(b, c) >= label_distance(a, c) - 1e-9
