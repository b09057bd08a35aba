import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from oncograde.core import RngStream, derive_stream
from oncograde.dataset import synth_generate
from oncograde.preprocess import (
    CorrelationReport,
    append_pair_means,
    apply_minmax,
    correlation_to_csv,
    correlation_to_json,
    engineer_features,
    fit_minmax,
    pearson_matrix,
    run_pipeline,
    smote,
    stratified_split,
)

finite_matrices = hnp.arrays(
    np.float64,
    st.tuples(st.integers(2, 12), st.integers(1, 5)),
    elements=st.floats(-1e6, 1e6),
)


class TestMinMax:
    def test_fit_single_column(self):
        p = fit_minmax(np.array([[2.0], [4.0], [6.0]]))
        assert p.col_min[0] == 2 and p.col_max[0] == 6

    def test_fit_two_columns(self):
        p = fit_minmax(np.array([[0.0, 10.0], [5.0, 20.0]]))
        assert list(p.col_min) == [0, 10] and list(p.col_max) == [5, 20]

    def test_apply_midpoint(self):
        p = fit_minmax(np.array([[2.0], [4.0], [6.0]]))
        assert apply_minmax(np.array([[4.0]]), p)[0, 0] == 0.5

    def test_constant_column_maps_to_zero(self):
        p = fit_minmax(np.array([[3.0], [3.0]]))
        assert apply_minmax(np.array([[999.0]]), p)[0, 0] == 0.0

    def test_no_clamping(self):
        p = fit_minmax(np.array([[0.0], [10.0]]))
        assert apply_minmax(np.array([[12.0]]), p)[0, 0] == pytest.approx(1.2)

    def test_empty_fit_errors(self):
        with pytest.raises(ValueError):
            fit_minmax(np.zeros((0, 3)))

    def test_column_mismatch_errors(self):
        p = fit_minmax(np.zeros((2, 3)))
        with pytest.raises(ValueError, match="column count mismatch"):
            apply_minmax(np.zeros((2, 4)), p)

    @given(finite_matrices)
    def test_scaled_range_and_roundtrip(self, X):
        p = fit_minmax(X)
        S = apply_minmax(X, p)
        assert (S >= 0).all() and (S <= 1).all()
        span = p.col_max - p.col_min
        restored = S * np.where(span == 0, 1.0, span) + p.col_min
        # constant columns lose their offset in scaling; restore it
        restored[:, span == 0] = p.col_min[span == 0]
        assert np.allclose(restored, X, atol=1e-9 * np.maximum(1, np.abs(X)).max())


class TestPearson:
    def test_self_correlation(self):
        X = np.array([[1.0, 1.0], [2.0, 2.0], [5.0, 5.0]])
        r = pearson_matrix(X).matrix
        assert r[0, 1] == pytest.approx(1.0)

    def test_anticorrelation(self):
        x = np.array([1.0, 2.0, 5.0])
        X = np.column_stack([x, -x])
        assert pearson_matrix(X).matrix[0, 1] == pytest.approx(-1.0)

    def test_frozen_example(self):
        X = np.column_stack([[1.0, 2.0, 3.0], [1.0, 2.0, 4.0]])
        r = pearson_matrix(X).matrix[0, 1]
        assert r == pytest.approx(9 / np.sqrt(84), abs=1e-12)

    def test_zero_variance_convention(self):
        X = np.column_stack([[1.0, 2.0, 3.0], [5.0, 5.0, 5.0]])
        rep = pearson_matrix(X)
        assert rep.zero_variance_columns == [1]
        assert rep.matrix[0, 1] == 0.0 and rep.matrix[1, 1] == 1.0

    def test_too_few_rows(self):
        with pytest.raises(ValueError, match="at least 2 rows"):
            pearson_matrix(np.ones((1, 2)))

    @given(finite_matrices)
    @settings(max_examples=50)
    def test_bounded(self, X):
        r = pearson_matrix(X).matrix
        assert (np.abs(r) <= 1 + 1e-12).all()
        assert np.allclose(r, r.T)

    def test_affine_invariance(self):
        rng = np.random.default_rng(0)
        X = rng.normal(size=(40, 3))
        X2 = X.copy()
        X2[:, 0] = 3.5 * X2[:, 0] + 11.0
        assert np.allclose(pearson_matrix(X).matrix, pearson_matrix(X2).matrix, atol=1e-9)


def _report_for(matrix, names=None):
    m = np.asarray(matrix, dtype=float)
    names = names or [f"col_{j}" for j in range(m.shape[0])]
    return CorrelationReport(m, names, [])


class TestEngineerFeatures:
    def test_no_pairs_unchanged(self):
        X = np.random.default_rng(1).normal(size=(10, 3))
        rep = pearson_matrix(X)
        X2, rep2 = engineer_features(X, rep, hi=0.999999, lo=-0.999999)
        assert np.array_equal(X, X2)
        assert rep2.engineered_pairs == []

    def test_duplicate_columns_mean(self):
        a = np.array([0.1, 0.5, 0.9, 0.3])
        X = np.column_stack([a, a])
        X2, rep = engineer_features(X, pearson_matrix(X, ["a", "b"]))
        assert X2.shape[1] == 3
        assert np.allclose(X2[:, 2], a)
        assert rep.engineered_names == ["a+b"]

    def test_pair_selection_and_order(self):
        matrix = [[1.0, 0.9, 0.6], [0.9, 1.0, 0.3], [0.6, 0.3, 1.0]]
        X = np.random.default_rng(2).uniform(size=(6, 3))
        X2, rep = engineer_features(X, _report_for(matrix), hi=0.5, lo=-0.4)
        assert [(i, j) for i, j, _ in rep.engineered_pairs] == [(0, 1), (0, 2)]
        assert X2.shape[1] == 5
        assert np.allclose(X2[:, 3], (X[:, 0] + X[:, 1]) / 2)
        assert np.allclose(X2[:, 4], (X[:, 0] + X[:, 2]) / 2)

    def test_thresholds_strict(self):
        matrix = [[1.0, 0.5, -0.4], [0.5, 1.0, 0.0], [-0.4, 0.0, 1.0]]
        X = np.zeros((4, 3))
        _, rep = engineer_features(X, _report_for(matrix))
        assert rep.engineered_pairs == [] and rep.flagged_pairs == []

    def test_flagged_not_dropped(self):
        matrix = [[1.0, -0.8], [-0.8, 1.0]]
        X = np.ones((4, 2))
        X2, rep = engineer_features(X, _report_for(matrix))
        assert X2.shape[1] == 2
        assert [(i, j) for i, j, _ in rep.flagged_pairs] == [(0, 1)]

    def test_shape_mismatch(self):
        with pytest.raises(ValueError, match="shape mismatch"):
            engineer_features(np.zeros((4, 3)), _report_for(np.eye(2)))


class TestSmote:
    def test_balanced_identity(self, stream):
        X = np.random.default_rng(3).normal(size=(9, 2))
        y = np.array([0, 0, 0, 1, 1, 1, 2, 2, 2])
        X2, y2 = smote(X, y, 5, stream)
        assert np.array_equal(X2, X) and np.array_equal(y2, y)

    def test_segment_geometry(self, stream):
        X = np.array([[0.0, 0.0], [1.0, 1.0], [5.0, 5.0], [6.0, 5.0], [5.0, 6.0], [6.0, 6.0]])
        y = np.array([0, 0, 1, 1, 1, 1])
        X2, y2 = smote(X, y, 1, stream)
        assert np.bincount(y2).tolist() == [4, 4]
        assert np.array_equal(X2[:6], X)
        synth = X2[6:]
        assert (y2[6:] == 0).all()
        # members of class 0 sit on the diagonal, so synthetics must too
        assert np.allclose(synth[:, 0], synth[:, 1])
        assert (synth >= 0).all() and (synth < 1 + 1e-12).all()

    def test_paper_scale_counts(self):
        d = synth_generate(1000, 4, (0.303, 0.332, 0.365))
        X2, y2 = smote(d.X, d.y, 5, RngStream(1))
        assert np.bincount(y2).tolist() == [365, 365, 365]
        assert len(y2) == 1095
        assert np.array_equal(X2[:1000], d.X)

    def test_small_class_errors(self, stream):
        X = np.zeros((4, 2))
        y = np.array([0, 1, 1, 1])
        with pytest.raises(ValueError, match="class too small for SMOTE"):
            smote(X, y, 5, stream)

    def test_bad_k(self, stream):
        with pytest.raises(ValueError, match="k must be"):
            smote(np.zeros((4, 2)), np.array([0, 0, 1, 1]), 0, stream)

    def test_deterministic(self):
        X = np.random.default_rng(5).normal(size=(12, 3))
        y = np.array([0] * 3 + [1] * 4 + [2] * 5)
        a = smote(X, y, 2, RngStream(10))
        b = smote(X, y, 2, RngStream(10))
        assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])


class TestStratifiedSplit:
    def test_paper_arithmetic(self):
        y = np.repeat([0, 1, 2], 365)
        split = stratified_split(y, 0.2, RngStream(0))
        assert len(split.train) == 876 and len(split.test) == 219
        for cls in range(3):
            assert sum(1 for i in split.test if y[i] == cls) == 73

    def test_single_class_rounding(self):
        split = stratified_split(np.zeros(10, dtype=int), 0.2, RngStream(1))
        assert len(split.train) == 8 and len(split.test) == 2

    def test_deterministic(self):
        y = np.repeat([0, 1, 2], 20)
        a = stratified_split(y, 0.25, RngStream(6))
        b = stratified_split(y, 0.25, RngStream(6))
        assert a.train == b.train and a.test == b.test

    def test_partition_property(self):
        y = np.array([0, 0, 0, 1, 1, 2, 2, 2, 2, 2, 1])
        split = stratified_split(y, 0.3, RngStream(2))
        assert sorted(split.train + split.test) == list(range(len(y)))
        assert set(split.train).isdisjoint(split.test)

    def test_min_one_test_sample(self):
        y = np.array([0, 0, 1, 1, 2, 2])
        split = stratified_split(y, 0.05, RngStream(3))
        for cls in range(3):
            assert sum(1 for i in split.test if y[i] == cls) == 1

    @pytest.mark.parametrize("fraction", [0.0, 1.0, -0.2, 1.5])
    def test_bad_fraction(self, fraction):
        with pytest.raises(ValueError, match="test_fraction"):
            stratified_split(np.array([0, 1, 2]), fraction, RngStream(0))


class TestRunPipeline:
    def test_paper_order_arithmetic(self):
        d = synth_generate(1000, 42, (0.303, 0.332, 0.365))
        prep = run_pipeline(d, "paper_order", stream=derive_stream(42, 1))
        assert prep.X_train.shape[0] == 876
        assert prep.X_test.shape[0] == 219
        assert prep.order == "paper_order"
        assert len(prep.feature_names) == prep.X_train.shape[1]

    def test_leak_safe_no_synthetic_test_rows(self):
        d = synth_generate(300, 8, (0.2, 0.3, 0.5))
        prep = run_pipeline(d, "leak_safe", stream=derive_stream(8, 1))
        # every test row must be an original (scaled+engineered) dataset row
        scaled = apply_minmax(d.X, prep.minmax)
        originals = append_pair_means(scaled, prep.report.engineered_pairs)
        for row in prep.X_test:
            assert (np.abs(originals - row) < 1e-12).all(axis=1).any()
        # train is balanced by SMOTE
        counts = np.bincount(prep.y_train)
        assert counts.min() == counts.max()

    def test_deterministic(self):
        d = synth_generate(200, 3)
        for order in ("paper_order", "leak_safe"):
            a = run_pipeline(d, order, stream=derive_stream(3, 1))
            b = run_pipeline(d, order, stream=derive_stream(3, 1))
            assert np.array_equal(a.X_train, b.X_train)
            assert np.array_equal(a.X_test, b.X_test)

    def test_unknown_order(self):
        d = synth_generate(60, 1)
        with pytest.raises(ValueError, match="order must be"):
            run_pipeline(d, "bogus", stream=RngStream(1))


class TestReportSerialization:
    def test_csv_layout(self):
        X = np.random.default_rng(1).normal(size=(20, 3))
        rep = pearson_matrix(X, ["a", "b", "c"])
        text = correlation_to_csv(rep)
        lines = text.strip().split("\n")
        assert lines[0] == ",a,b,c"
        assert len(lines) == 4
        assert lines[1].split(",")[0] == "a"
        assert float(lines[1].split(",")[1]) == 1.0

    def test_json_pairs(self):
        matrix = [[1.0, 0.7, -0.6], [0.7, 1.0, 0.1], [-0.6, 0.1, 1.0]]
        X = np.zeros((4, 3))
        _, rep = engineer_features(X, _report_for(matrix, ["a", "b", "c"]))
        doc = correlation_to_json(rep)
        assert doc["engineered"][0]["feature_i"] == "a"
        assert doc["engineered"][0]["feature_j"] == "b"
        assert doc["flagged"][0]["r"] == -0.6
        assert doc["hi_threshold"] == 0.5
