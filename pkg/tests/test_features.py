import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from uu_audit.eventlog import Action, ClickEvent
from uu_audit.features import (
    DIMENSION_COUNTS,
    N_INDICATORS,
    REGISTRY,
    REGISTRY_IDS,
    NormStats,
    average_over_weeks,
    build_student_vectors,
    compute_indicators,
    normalize_minmax,
    read_vectors_csv,
    write_vectors_csv,
)
from helpers import NAMED_EXPECTED, fixture_events, fixture_schedule


IDX = {ind: j for j, ind in enumerate(REGISTRY_IDS)}


class TestRegistry:
    def test_dimension_counts(self):
        counts = {}
        for d in REGISTRY:
            counts[d.dimension] = counts.get(d.dimension, 0) + 1
        assert counts == DIMENSION_COUNTS
        assert sum(counts.values()) == 45

    def test_ids_fixed_order(self):
        assert REGISTRY_IDS == tuple(f"F{j:02d}" for j in range(1, 46))

    def test_paper_named_ids_in_expected_dimensions(self):
        dim = {d.id: d.dimension for d in REGISTRY}
        assert dim["F02"] == "Control"
        assert all(dim[f"F{j}"] == "Control" for j in range(10, 16))
        assert dim["F29"] == dim["F30"] == "Effort"
        assert all(dim[f"F{j}"] == "Proactivity" for j in range(36, 40))


@pytest.fixture(scope="module")
def matrices():
    mats, diag = compute_indicators(fixture_events(), fixture_schedule())
    assert diag.unknown_object_events == 0
    return mats


class TestNamedIndicators:
    @pytest.mark.parametrize("key", sorted(NAMED_EXPECTED))
    def test_hand_computed_values(self, matrices, key):
        user, week = key
        row = matrices[user][week - 1]
        for ind, expected in NAMED_EXPECTED[key].items():
            assert row[IDX[ind]] == expected, f"{ind} for {user} week {week}"

    def test_inactive_week_all_zero(self, matrices):
        assert not matrices["s2"][1].any()

    def test_unknown_objects_in_totals_not_alignment(self):
        events = fixture_events() + [
            ClickEvent("s1", Action.VIDEO_PLAY, "ghost", fixture_events()[0].timestamp)
        ]
        mats, diag = compute_indicators(events, fixture_schedule())
        assert diag.unknown_object_events == 1
        assert diag.unknown_object_ids == ["ghost"]
        base = compute_indicators(fixture_events(), fixture_schedule())[0]
        row, base_row = mats["s1"][0], base["s1"][0]
        assert row[IDX["F30"]] == base_row[IDX["F30"]] + 1  # counted in totals
        assert row[IDX["F02"]] == base_row[IDX["F02"]]  # excluded from alignment
        assert row[IDX["F39"]] == base_row[IDX["F39"]]

    def test_doubling_video_clicks_raises_f30_not_f29(self):
        events = fixture_events()
        vid_s3_w1 = [
            e for e in events
            if e.user_id == "s3" and e.action is not Action.PROBLEM_CHECK
            and e.timestamp < fixture_schedule().start.replace(day=11)
        ]
        doubled = events + vid_s3_w1
        base = compute_indicators(events, fixture_schedule())[0]["s3"][0]
        more = compute_indicators(doubled, fixture_schedule())[0]["s3"][0]
        assert more[IDX["F30"]] > base[IDX["F30"]]
        assert more[IDX["F29"]] == base[IDX["F29"]]

    def test_permuting_students_leaves_vectors_unchanged(self):
        events = fixture_events()
        fwd, _ = compute_indicators(events, fixture_schedule())
        rev, _ = compute_indicators(list(reversed(events)), fixture_schedule())
        for user in fwd:
            np.testing.assert_array_equal(fwd[user], rev[user])


class TestAverageAndNormalize:
    def test_identical_rows_average_to_that_row(self):
        row = np.arange(45, dtype=float)
        W = np.vstack([row, row, row])
        np.testing.assert_array_equal(average_over_weeks(W), row)

    def test_zero_one_averages_to_half(self):
        W = np.zeros((2, 45))
        W[1, :] = 1.0
        np.testing.assert_array_equal(average_over_weeks(W), np.full(45, 0.5))

    def test_single_week_identity(self):
        W = np.random.default_rng(0).random((1, 45))
        np.testing.assert_array_equal(average_over_weeks(W), W[0])

    def test_minmax_example(self):
        X = np.array([[2.0], [4.0], [10.0]])
        normed, stats = normalize_minmax(X)
        np.testing.assert_array_equal(normed.ravel(), [0.0, 0.25, 1.0])
        assert (stats.mins[0], stats.maxs[0]) == (2.0, 10.0)

    def test_constant_feature_maps_to_zero(self):
        normed, _ = normalize_minmax(np.array([[7.0], [7.0]]))
        np.testing.assert_array_equal(normed.ravel(), [0.0, 0.0])

    def test_heldout_clipped_with_training_stats(self):
        _, stats = normalize_minmax(np.array([[2.0], [10.0]]))
        out = stats.apply(np.array([[12.0], [0.0], [6.0]]))
        np.testing.assert_array_equal(out.ravel(), [1.0, 0.0, 0.5])

    @given(
        st.lists(
            st.lists(st.floats(-1e6, 1e6, allow_nan=False), min_size=3, max_size=3),
            min_size=1,
            max_size=30,
        )
    )
    def test_normalized_outputs_in_unit_interval(self, rows):
        normed, _ = normalize_minmax(np.array(rows))
        assert (normed >= 0.0).all() and (normed <= 1.0).all()

    def test_norm_stats_roundtrip(self):
        X = np.random.default_rng(3).random((10, N_INDICATORS))
        _, stats = normalize_minmax(X)
        again = NormStats.from_dict(stats.to_dict())
        np.testing.assert_array_equal(stats.mins, again.mins)
        np.testing.assert_array_equal(stats.maxs, again.maxs)


class TestVectors:
    def test_build_student_vectors_shape_and_range(self):
        events = fixture_events()
        vectors, stats, _ = build_student_vectors(
            events, fixture_schedule(), ["s1", "s2", "s3", "s4"]
        )
        assert [v.user_id for v in vectors] == ["s1", "s2", "s3", "s4"]
        for v in vectors:
            assert v.values.shape == (45,)
            assert (v.values >= 0).all() and (v.values <= 1).all()
            assert v.weekly.shape == (2, 45)
        # s4 has no events at all
        assert not vectors[3].weekly.any()

    def test_vectors_csv_roundtrip(self, tmp_path):
        vectors, _, _ = build_student_vectors(
            fixture_events(), fixture_schedule(), ["s1", "s2", "s3"],
            demographics={"s1": {"gender": "female", "provenience": "coastal"}},
        )
        path = tmp_path / "vectors.csv"
        write_vectors_csv(vectors, path)
        back = read_vectors_csv(path)
        assert [v.user_id for v in back] == ["s1", "s2", "s3"]
        np.testing.assert_array_equal(back[0].values, vectors[0].values)
        assert back[0].demographics == {"gender": "female", "provenience": "coastal"}
        assert back[1].demographics is None
