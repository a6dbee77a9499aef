import json

import numpy as np
import pytest

from shared.errors import (ConfigurationError, NormalizationError, ParseError, SketchLengthError,
                           ValidationError)
from stroke_core import (AffinityKind, AffinityMatrix, GroupLabels, PenState, SegmentDelta, Sketch,
                         augment, canonicalize, gen_dataset, gen_synthetic, normalize,
                         parse_stroke3, serialize_stroke3, split_by_category, to_group_matrix)


class TestSketch:
    def test_last_segment_must_lift_pen(self):
        with pytest.raises(ValidationError):
            Sketch(np.array([[1.0, 0.0, 0], [1.0, 0.0, 0]]))

    def test_pen_values_checked(self):
        with pytest.raises(ValidationError):
            Sketch(np.array([[1.0, 0.0, 2]]))

    def test_length_limit(self):
        deltas = np.tile([1.0, 0.0, 1.0], (5, 1))
        with pytest.raises(SketchLengthError):
            Sketch(deltas, max_segments=4)

    def test_from_segments(self):
        sketch = Sketch.from_segments([SegmentDelta(1.0, 2.0, PenState.DOWN),
                                       SegmentDelta(3.0, 4.0, PenState.UP)])
        assert sketch.deltas.tolist() == [[1.0, 2.0, 0.0], [3.0, 4.0, 1.0]]
        assert sketch.segments[1].pen is PenState.UP

    def test_immutable(self, two_stroke_sketch):
        with pytest.raises(ValueError):
            two_stroke_sketch.deltas[0, 0] = 5.0

    def test_strokes_and_points(self, two_stroke_sketch):
        points = two_stroke_sketch.absolute_points()
        assert points.tolist() == [[0, 0], [10, 0], [10, 10], [15, 15], [20, 15]]
        assert two_stroke_sketch.stroke_ids().tolist() == [0, 0, 0, 1, 1]
        assert [len(s) for s in two_stroke_sketch.strokes()] == [3, 2]

    def test_segment_lengths(self, two_stroke_sketch):
        assert two_stroke_sketch.segment_lengths().tolist() == [0.0, 10.0, 10.0, 0.0, 5.0]

    def test_from_strokes_origin(self):
        strokes = [np.array([[3.0, 4.0], [5.0, 4.0]])]
        assert Sketch.from_strokes(strokes).deltas[0].tolist() == [0.0, 0.0, 0.0]
        assert Sketch.from_strokes(strokes, origin=(0, 0)).deltas[0].tolist() == [3.0, 4.0, 0.0]


class TestLabelsAndAffinity:
    def test_canonicalize(self):
        assert canonicalize([5, 5, 2, 9, 2]).tolist() == [0, 0, 1, 2, 1]

    def test_labels_validation(self):
        with pytest.raises(ValidationError):
            GroupLabels(np.array([0, -1]))
        with pytest.raises(ValidationError):
            GroupLabels(np.array([], dtype=int))

    def test_group_matrix(self):
        G = to_group_matrix(GroupLabels(np.array([0, 0, 1])))
        assert G.kind is AffinityKind.GROUND_TRUTH
        assert G.values.tolist() == [[1, 1, 0], [1, 1, 0], [0, 0, 1]]

    @pytest.mark.parametrize("seed", range(20))
    def test_group_matrix_is_transitive_for_random_labels(self, seed):
        rng = np.random.default_rng(seed)
        labels = rng.integers(0, rng.integers(1, 6), size=rng.integers(1, 15))
        G = to_group_matrix(GroupLabels(labels)).values
        assert np.array_equal(G, G.T)
        assert np.all(np.diag(G) == 1.0)
        assert set(np.unique(G)) <= {0.0, 1.0}
        # 对角线为 1 时 G·G > 0 恰好等于 G 当且仅当传递
        assert np.array_equal((G @ G > 0).astype(float), G)
        assert np.array_equal(G, labels[:, None] == labels[None, :])

    def test_ground_truth_must_be_transitive(self):
        values = np.array([[1, 1, 0], [1, 1, 1], [0, 1, 1]], dtype=float)
        with pytest.raises(ValidationError):
            AffinityMatrix(values, AffinityKind.GROUND_TRUTH)
        AffinityMatrix(values * 0.5 + np.eye(3) * 0.5)

    @pytest.mark.parametrize("values", [
        [[1.0, 0.2], [0.3, 1.0]],
        [[0.9, 0.2], [0.2, 1.0]],
        [[1.0, 1.2], [1.2, 1.0]],
    ])
    def test_invalid_predicted(self, values):
        with pytest.raises(ValidationError):
            AffinityMatrix(np.array(values))


class TestStroke3:
    def test_round_trip(self, two_stroke_sketch, two_stroke_labels):
        text = serialize_stroke3([(two_stroke_sketch, two_stroke_labels)])
        [(sketch, labels)] = parse_stroke3(text)
        assert sketch == two_stroke_sketch
        assert labels == two_stroke_labels

    def test_field_order(self, two_stroke_sketch, two_stroke_labels):
        line = serialize_stroke3([(two_stroke_sketch, two_stroke_labels)]).strip()
        assert list(json.loads(line)) == ["points", "labels", "category"]

    def test_bad_json_reports_line(self):
        text = '{"points": [[0, 0, 1]]}\n{oops\n'
        with pytest.raises(ParseError) as info:
            parse_stroke3(text)
        assert info.value.line == 2

    def test_bad_pen(self):
        with pytest.raises(ParseError):
            parse_stroke3('{"points": [[0, 0, 3]]}')

    def test_label_length_mismatch(self):
        with pytest.raises(ValidationError):
            parse_stroke3('{"points": [[0, 0, 0], [1, 1, 1]], "labels": [0]}')

    def test_too_long_names_index(self):
        long = json.dumps({"points": [[1, 0, 0]] * 5 + [[1, 0, 1]]})
        text = '{"points": [[0, 0, 1]]}\n' + long + "\n"
        with pytest.raises(SketchLengthError) as info:
            parse_stroke3(text, max_segments=4)
        assert info.value.index == 1

    def test_empty_text(self):
        assert parse_stroke3("") == []


class TestPreprocessing:
    def test_normalize_unit_std(self, two_stroke_sketch):
        out = normalize(two_stroke_sketch)
        assert np.std(out.offsets) == pytest.approx(1.0)
        assert out.pen.tolist() == two_stroke_sketch.pen.tolist()

    def test_normalize_is_idempotent(self, two_stroke_sketch):
        once = normalize(two_stroke_sketch)
        twice = normalize(once)
        assert np.allclose(twice.deltas, once.deltas, atol=1e-9, rtol=0.0)

    def test_augment_distortion_scales_each_offset(self, rng):
        sketch, labels = gen_synthetic("grid")
        out, _ = augment(sketch, labels, {"removal_prob": 0.0, "distort_scale": 0.1}, rng)
        moved = np.hypot(*sketch.offsets.T) > 0
        ratio = np.hypot(*out.offsets.T)[moved] / np.hypot(*sketch.offsets.T)[moved]
        assert np.all((ratio >= 0.9 - 1e-12) & (ratio <= 1.1 + 1e-12))
        # 同一段的 dx、dy 用同一个系数，方向不变
        cross = out.offsets[:, 0] * sketch.offsets[:, 1] - out.offsets[:, 1] * sketch.offsets[:, 0]
        assert np.allclose(cross, 0.0, atol=1e-9)

    def test_normalize_rejects_degenerate(self):
        with pytest.raises(NormalizationError):
            normalize(Sketch(np.array([[1.0, 1.0, 1]])))
        with pytest.raises(NormalizationError):
            normalize(Sketch(np.zeros((3, 3)) + [0, 0, 1]))

    def test_augment_keeps_labels_aligned(self, rng):
        sketch, labels = gen_synthetic("grid")
        out, out_labels = augment(sketch, labels, {"removal_prob": 0.5, "distort_scale": 0.1}, rng)
        assert len(out) == len(out_labels)
        assert out.deltas[-1, 2] == PenState.UP.value

    def test_augment_without_changes_is_identity(self, rng, two_stroke_sketch, two_stroke_labels):
        out, out_labels = augment(two_stroke_sketch, two_stroke_labels,
                                  {"removal_prob": 0.0, "distort_scale": 0.0}, rng)
        assert out == two_stroke_sketch
        assert out_labels == two_stroke_labels

    def test_augment_removal_preserves_positions(self, rng):
        sketch, labels = gen_synthetic("stick-figure")
        out, _ = augment(sketch, labels, {"removal_prob": 0.4, "distort_scale": 0.0}, rng)
        original = sketch.absolute_points()
        for point in out.absolute_points():
            assert np.min(np.hypot(*(original - point).T)) < 1e-9

    def test_augment_never_empties(self, two_stroke_sketch, two_stroke_labels):
        out, _ = augment(two_stroke_sketch, two_stroke_labels,
                         {"removal_prob": 1.0, "distort_scale": 0.0}, np.random.default_rng(0))
        assert len(out) in (2, 3)

    def test_split_by_category(self):
        records = gen_dataset(8)
        seen, unseen = split_by_category(records, ["grid"])
        assert len(unseen) == 2
        assert all(s.category != "grid" for s, _ in seen)


class TestSynthetic:
    @pytest.mark.parametrize("category,length,groups", [
        ("box-with-lid", 13, 3), ("stick-figure", 19, 4), ("flower", 29, 3), ("grid", 17, 3)])
    def test_shapes(self, category, length, groups):
        sketch, labels = gen_synthetic(category)
        assert len(sketch) == len(labels) == length
        assert labels.num_groups == groups
        assert sketch.category == category

    def test_unknown_category(self):
        with pytest.raises(ConfigurationError):
            gen_synthetic("teapot")

    def test_reproducible(self):
        a = gen_dataset(6, jitter=0.05, rng=np.random.default_rng(3))
        b = gen_dataset(6, jitter=0.05, rng=np.random.default_rng(3))
        assert serialize_stroke3(a) == serialize_stroke3(b)
