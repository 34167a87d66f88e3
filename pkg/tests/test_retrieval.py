"""Rank-based retrieval metrics against hand cases and a linear-scan oracle."""

import numpy as np
import pytest

from hubkit import (
    DataError,
    GroundTruth,
    IndexOutOfRange,
    RetrievalReport,
    ShapeMismatch,
    SimilarityMatrix,
    best_rank,
    evaluate,
    row_argsort_desc,
)


def _ranks(V):
    return row_argsort_desc(SimilarityMatrix(V))


class TestGroundTruth:
    def test_identity(self):
        gt = GroundTruth.identity(3)
        assert len(gt) == 3
        assert gt.pairs[2] == frozenset({2})

    def test_from_indices(self):
        gt = GroundTruth.from_indices([4, 0, 2])
        assert gt.pairs == (frozenset({4}), frozenset({0}), frozenset({2}))

    def test_rejects_empty_target_set(self):
        with pytest.raises(DataError):
            GroundTruth((frozenset({1}), frozenset()))

    def test_rejects_negative_index(self):
        with pytest.raises(IndexOutOfRange):
            GroundTruth.from_indices([-1])


class TestBestRank:
    def test_correct_target_first(self):
        ranks = _ranks(np.eye(5))
        np.testing.assert_array_equal(best_rank(ranks, GroundTruth.identity(5)), 1)

    def test_hand_order(self):
        # ranked order is [2, 0, 1]; target 1 sits at 1-based position 3
        ranks = _ranks(np.array([[0.5, 0.1, 0.9]]))
        np.testing.assert_array_equal(ranks.order, [[2, 0, 1]])
        assert best_rank(ranks, GroundTruth.from_indices([1]))[0] == 3

    def test_multi_target_takes_best(self):
        ranks = _ranks(np.array([[0.5, 0.1, 0.9]]))
        gt = GroundTruth((frozenset({0, 1}),))
        assert best_rank(ranks, gt)[0] == 2  # target 0 outranks target 1

    def test_matches_linear_scan(self):
        rng = np.random.default_rng(54)
        V = rng.uniform(-1, 1, (25, 40))
        correct = rng.integers(0, 40, size=25)
        out = best_rank(_ranks(V), GroundTruth.from_indices(correct))
        for i in range(25):
            # count strictly better scores, plus earlier-index ties
            better = sum(
                V[i, j] > V[i, correct[i]] or (V[i, j] == V[i, correct[i]] and j < correct[i])
                for j in range(40)
            )
            assert out[i] == better + 1

    def test_target_index_out_of_range(self):
        ranks = _ranks(np.eye(3))
        with pytest.raises(IndexOutOfRange):
            best_rank(ranks, GroundTruth.from_indices([0, 1, 3]))

    def test_row_count_mismatch(self):
        ranks = _ranks(np.eye(3))
        with pytest.raises(ShapeMismatch):
            best_rank(ranks, GroundTruth.identity(4))


class TestEvaluate:
    def test_identity_is_perfect(self):
        report = evaluate(SimilarityMatrix(np.eye(6)), GroundTruth.identity(6), Ks=[1, 5])
        assert report.r_at[1] == 100.0
        assert report.r_at[5] == 100.0
        assert report.mdr == 1.0
        assert report.mnr == 1.0

    def test_staircase_ranks(self):
        # rows engineered so the best ranks are exactly 1, 2, 3, 4
        V = np.zeros((4, 5))
        for i in range(4):
            V[i, i] = 1.0
            for step in range(i):
                V[i, (i + 1 + step) % 5] = 2.0
        report = evaluate(SimilarityMatrix(V), GroundTruth.identity(4), Ks=[1, 5])
        assert report.r_at[1] == 25.0
        assert report.r_at[5] == 100.0
        assert report.mdr == 2.0  # lower median of [1, 2, 3, 4]
        assert report.mnr == 2.5

    def test_correct_target_always_last(self):
        report = evaluate(SimilarityMatrix(-np.eye(10)), GroundTruth.identity(10), Ks=[5, 10])
        assert report.r_at[5] == 0.0
        assert report.r_at[10] == 100.0
        assert report.mnr == 10.0

    def test_recall_monotone_in_k(self):
        rng = np.random.default_rng(55)
        S = SimilarityMatrix(rng.uniform(-1, 1, (30, 30)))
        report = evaluate(S, GroundTruth.identity(30), Ks=[1, 2, 5, 10, 30])
        values = [report.r_at[k] for k in sorted(report.r_at)]
        assert all(lo <= hi for lo, hi in zip(values, values[1:]))

    def test_metadata_passthrough(self):
        report = evaluate(
            SimilarityMatrix(np.eye(2)),
            GroundTruth.identity(2),
            Ks=[1],
            skew=0.5,
            normalization="is",
            params={"tau": 0.02},
        )
        assert report.normalization == "is"
        assert report.skew == 0.5
        assert report.params["tau"] == 0.02

    def test_k_validation(self):
        S = SimilarityMatrix(np.eye(3))
        with pytest.raises(DataError):
            evaluate(S, GroundTruth.identity(3), Ks=[])
        with pytest.raises(DataError):
            evaluate(S, GroundTruth.identity(3), Ks=[4])


class TestReportValidation:
    def test_rejects_decreasing_recall(self):
        with pytest.raises(DataError):
            RetrievalReport(r_at={1: 50.0, 5: 25.0}, mdr=1.0, mnr=1.0)

    def test_rejects_out_of_range_recall(self):
        with pytest.raises(DataError):
            RetrievalReport(r_at={1: 101.0}, mdr=1.0, mnr=1.0)

    def test_rejects_sub_one_ranks(self):
        with pytest.raises(DataError):
            RetrievalReport(r_at={1: 50.0}, mdr=0.5, mnr=1.0)
