"""
Tests for the discrete information measures
"""
import math
from collections import Counter

import numpy as np
import pytest

from src.errors import DegenerateDataError, InputValidationError
from src.hypercube_io import GroundTruth, QuantizedImage
from src.infotheory import (
    FanoBounds,
    conditional_entropy,
    entropy,
    fano_bounds,
    joint_histogram,
    mutual_information,
)


def brute_force_mi(a, b):
    """Textbook MI over paired samples, via probability dictionaries"""
    n = len(a)
    p_ab = Counter(zip(a, b))
    p_a = Counter(a)
    p_b = Counter(b)
    return sum(
        (c / n) * math.log2((c / n) / ((p_a[x] / n) * (p_b[y] / n)))
        for (x, y), c in p_ab.items()
    )


def _q(values, n_bins):
    return QuantizedImage(bins=np.asarray(values), n_bins=n_bins)


def test_matches_brute_force_on_random_pairs():
    rng = np.random.default_rng(7)
    for _ in range(200):
        h, w = rng.integers(1, 9, size=2)
        n_bins = int(rng.integers(2, 9))
        a = rng.integers(0, n_bins, size=(h, w))
        b = rng.integers(0, n_bins, size=(h, w))

        expected = brute_force_mi(a.reshape(-1).tolist(), b.reshape(-1).tolist())
        got = mutual_information(_q(a, n_bins), _q(b, n_bins))
        assert got == pytest.approx(max(expected, 0.0), abs=1e-12)


def test_ground_truth_excludes_unlabeled_pixels():
    rng = np.random.default_rng(11)
    labels = rng.integers(0, 5, size=(12, 12))
    labels[0, 0], labels[0, 1] = 1, 2
    x = rng.integers(0, 6, size=(12, 12))
    gt = GroundTruth(labels=labels, n_classes=4)

    keep = labels.reshape(-1) > 0
    expected = brute_force_mi(
        labels.reshape(-1)[keep].tolist(), x.reshape(-1)[keep].tolist()
    )
    assert mutual_information(gt, _q(x, 6)) == pytest.approx(expected, abs=1e-9)


def test_labeled_only_off_counts_background():
    labels = np.array([[0, 0], [1, 2]])
    x = np.array([[0, 0], [1, 1]])
    gt = GroundTruth(labels=labels, n_classes=2)

    assert mutual_information(gt, _q(x, 2)) == 0.0
    assert mutual_information(gt, _q(x, 2), labeled_only=False) == pytest.approx(1.0)


def test_symmetry_is_exact():
    rng = np.random.default_rng(5)
    for _ in range(50):
        a = _q(rng.integers(0, 7, size=(6, 9)), 7)
        b = _q(rng.integers(0, 4, size=(6, 9)), 4)
        assert mutual_information(a, b) == mutual_information(b, a)


def test_relabeling_invariance_is_exact():
    rng = np.random.default_rng(9)
    a = rng.integers(0, 8, size=(10, 10))
    b = rng.integers(0, 8, size=(10, 10))
    perm = rng.permutation(8)

    base = mutual_information(_q(a, 8), _q(b, 8))
    assert mutual_information(_q(perm[a], 8), _q(b, 8)) == base
    assert mutual_information(_q(a, 8), _q(perm[b], 8)) == base


def test_self_information_equals_entropy():
    rng = np.random.default_rng(2)
    x = rng.integers(0, 16, size=(20, 20))
    q = _q(x, 16)
    assert mutual_information(q, q) == entropy(np.bincount(x.reshape(-1)))


def test_constant_image_has_zero_information():
    rng = np.random.default_rng(4)
    q = _q(rng.integers(0, 8, size=(5, 5)), 8)
    assert mutual_information(q, _q(np.zeros((5, 5), dtype=int), 8)) == 0.0


def test_mi_is_bounded_by_marginal_entropies():
    rng = np.random.default_rng(6)
    for _ in range(30):
        a = rng.integers(0, 5, size=(7, 7))
        b = (a + rng.integers(0, 2, size=(7, 7))) % 5
        mi = mutual_information(_q(a, 5), _q(b, 5))
        assert 0.0 <= mi <= min(
            entropy(np.bincount(a.reshape(-1))), entropy(np.bincount(b.reshape(-1)))
        ) + 1e-12


def test_joint_histogram_counts_and_marginals():
    a = _q([[0, 1], [1, 1]], 2)
    b = _q([[2, 2], [0, 2]], 3)
    hist = joint_histogram(a, b)

    assert hist.total == 4
    assert hist.counts.tolist() == [[0, 0, 1], [1, 0, 2]]
    assert hist.row_marginal.tolist() == [1, 3]
    assert hist.col_marginal.tolist() == [1, 0, 3]


def test_explicit_mask():
    a = _q([[0, 1], [0, 1]], 2)
    b = _q([[0, 1], [1, 0]], 2)
    top_row = np.array([[True, True], [False, False]])
    assert mutual_information(a, b, mask=top_row) == pytest.approx(1.0)
    assert mutual_information(a, b) == 0.0


def test_empty_mask_is_degenerate():
    a = _q([[0, 1]], 2)
    with pytest.raises(DegenerateDataError):
        joint_histogram(a, a, mask=np.zeros((1, 2), dtype=bool))

    unlabeled = GroundTruth(labels=np.zeros((1, 2), dtype=int), n_classes=1)
    with pytest.raises(DegenerateDataError):
        mutual_information(unlabeled, a)


def test_size_mismatch_rejected():
    with pytest.raises(InputValidationError):
        mutual_information(_q([[0, 1]], 2), _q([[0], [1]], 2))


def test_entropy_values():
    assert entropy([5, 5]) == pytest.approx(1.0)
    assert entropy([1, 1, 1, 1]) == pytest.approx(2.0)
    assert entropy([7, 0]) == 0.0
    with pytest.raises(DegenerateDataError):
        entropy([0, 0, 0])


def test_perfect_predictor_has_no_residual_uncertainty():
    labels = np.array([[1, 1, 2, 2], [3, 3, 4, 4]])
    x = np.array([[0, 1, 2, 2], [5, 5, 7, 7]])
    gt = GroundTruth(labels=labels, n_classes=4)

    assert conditional_entropy(gt, _q(x, 8)) == pytest.approx(0.0, abs=1e-12)
    bounds = fano_bounds(gt, _q(x, 8))
    assert bounds.lower == 0.0
    assert bounds.upper == pytest.approx(0.0, abs=1e-12)


def test_independent_image_leaves_full_uncertainty():
    gt = GroundTruth(labels=np.array([[1, 2], [1, 2]]), n_classes=2)
    x = _q([[0, 0], [1, 1]], 2)

    bounds = fano_bounds(gt, x)
    assert bounds.mi == 0.0
    assert bounds.h_c == pytest.approx(1.0)
    assert bounds.h_c_given_x == pytest.approx(1.0)
    assert bounds.lower == pytest.approx(0.0)
    assert bounds.upper == pytest.approx(1.0)


def test_fano_lower_bound_with_four_classes():
    gt = GroundTruth(labels=np.array([[1, 2], [3, 4]]), n_classes=4)
    bounds = fano_bounds(gt, _q(np.zeros((2, 2), dtype=int), 2))

    assert bounds.n_classes == 4
    assert bounds.h_c_given_x == pytest.approx(2.0)
    assert bounds.lower == pytest.approx(0.5)
    assert bounds.upper == pytest.approx(2.0)
    assert bounds.lower <= bounds.upper


def test_fano_counts_only_classes_present():
    gt = GroundTruth(labels=np.array([[1, 3], [1, 3]]), n_classes=16)
    assert fano_bounds(gt, _q([[0, 1], [0, 1]], 2)).n_classes == 2


def test_fano_needs_two_classes():
    gt = GroundTruth(labels=np.array([[1, 1], [0, 0]]), n_classes=2)
    with pytest.raises(DegenerateDataError):
        fano_bounds(gt, _q([[0, 1], [0, 1]], 2))
    with pytest.raises(DegenerateDataError):
        FanoBounds.from_entropies(0.0, 0.0, 1)


def test_transposed_histogram_gives_same_mi():
    from src.infotheory import histogram_mutual_information

    rng = np.random.default_rng(8)
    hist = joint_histogram(_q(rng.integers(0, 5, size=(9, 9)), 5), _q(rng.integers(0, 3, size=(9, 9)), 3))
    assert hist.transpose().counts.shape == (3, 5)
    assert histogram_mutual_information(hist.transpose()) == histogram_mutual_information(hist)


def brute_force_entropy(values):
    n = len(values)
    return -sum((c / n) * math.log2(c / n) for c in Counter(values).values())


def test_matches_brute_force_on_small_images():
    rng = np.random.default_rng(13)
    for _ in range(100):
        n_bins = int(rng.integers(2, 5))
        a = rng.integers(0, n_bins, size=(8, 8))
        b = rng.integers(0, n_bins, size=(8, 8))
        expected = brute_force_mi(a.reshape(-1).tolist(), b.reshape(-1).tolist())
        assert mutual_information(_q(a, n_bins), _q(b, n_bins)) == pytest.approx(expected, abs=1e-12)


def test_conditional_entropy_matches_joint_minus_marginal():
    rng = np.random.default_rng(21)
    for _ in range(50):
        labels = rng.integers(1, 5, size=(8, 8))
        x = rng.integers(0, 4, size=(8, 8))
        pairs = list(zip(labels.reshape(-1).tolist(), x.reshape(-1).tolist()))
        expected = brute_force_entropy(pairs) - brute_force_entropy(x.reshape(-1).tolist())

        got = conditional_entropy(GroundTruth(labels=labels, n_classes=4), _q(x, 4))
        assert got == pytest.approx(expected, abs=1e-12)


def test_entropy_of_uneven_counts():
    assert entropy([1, 1, 1, 1, 2, 2]) == pytest.approx(2.5)


def test_fano_identity_over_random_scenes():
    rng = np.random.default_rng(17)
    for _ in range(100):
        h, w = rng.integers(4, 17, size=2)
        labels = rng.integers(0, 6, size=(h, w))
        labels[0, 0], labels[0, 1] = 1, 2
        n_bins = int(rng.integers(2, 17))
        x = _q(rng.integers(0, n_bins, size=(h, w)), n_bins)

        bounds = fano_bounds(GroundTruth(labels=labels, n_classes=5), x)
        assert bounds.h_c_given_x == pytest.approx(bounds.h_c - bounds.mi, abs=1e-9)
        assert 0.0 <= bounds.lower <= bounds.upper


def test_relabeling_the_image_keeps_mi_against_a_fixed_ground_truth():
    rng = np.random.default_rng(23)
    gt = GroundTruth(labels=rng.integers(0, 5, size=(12, 12)), n_classes=4)
    for _ in range(50):
        n_bins = int(rng.integers(2, 9))
        x = rng.integers(0, n_bins, size=(12, 12))
        perm = rng.permutation(n_bins)
        assert mutual_information(gt, _q(perm[x], n_bins)) == mutual_information(gt, _q(x, n_bins))


def test_sparse_labels_only_get_rows_for_values_present():
    x = _q([[0, 1], [1, 0]], 256)
    huge = GroundTruth(labels=np.array([[1, 10**12], [10**12, 1]]), n_classes=10**12)
    small = GroundTruth(labels=np.array([[1, 2], [2, 1]]), n_classes=2)

    assert joint_histogram(huge, x).counts.shape == (2, 256)
    assert mutual_information(huge, x) == mutual_information(small, x) == pytest.approx(1.0)


def test_fano_does_not_count_background_as_a_class():
    x = _q([[0, 1], [0, 1]], 2)
    one_class = GroundTruth(labels=np.array([[1, 1], [0, 0]]), n_classes=1)
    with pytest.raises(DegenerateDataError):
        fano_bounds(one_class, x, labeled_only=False)

    two_classes = GroundTruth(labels=np.array([[1, 2], [0, 0]]), n_classes=2)
    bounds = fano_bounds(two_classes, x, labeled_only=False)
    assert bounds.n_classes == 2
    assert bounds.h_c == pytest.approx(1.5)
