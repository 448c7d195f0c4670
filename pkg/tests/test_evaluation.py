import numpy as np
import pytest

from bandselect.data import (GroundTruth, HyperCube, SyntheticSpec,
                             generate_synthetic)
from bandselect.evaluation import (ClassifierConfig, SplitSpec, accuracy,
                                   classify_knn, classify_map,
                                   export_features, macro_accuracy, split,
                                   sweep, write_report_csv)
from bandselect.selection import MI_FILTER, TMI_FILTER, SelectionConfig

from oracles import oracle_knn, oracle_normalize


def random_dataset(rng, n_pixels=None, n_bands=None, n_classes=None):
    n_pixels = n_pixels or int(rng.integers(12, 201))
    n_bands = n_bands or int(rng.integers(1, 6))
    n_classes = n_classes or int(rng.integers(2, 6))
    # keep at least two pixels of every class (stratified split needs two)
    labels = np.concatenate([np.arange(1, n_classes + 1),
                             np.arange(1, n_classes + 1),
                             rng.integers(1, n_classes + 1,
                                          n_pixels - 2 * n_classes)])
    values = rng.normal(0, 10, (n_bands, 1, n_pixels)).astype(np.float32)
    cube = HyperCube(values)
    gt = GroundTruth(labels.reshape(1, n_pixels).astype(np.int32), n_classes)
    return cube, gt


class TestSplit:
    def test_four_pixels_one_class(self):
        gt = GroundTruth(np.array([[1, 1, 1, 1]], dtype=np.int32), 1)
        train, test = split(gt, SplitSpec(train_fraction=0.5, seed=0))
        assert train.sum() == 2
        assert test.sum() == 2

    def test_deterministic_in_seed(self):
        rng = np.random.default_rng(0)
        _, gt = random_dataset(rng, n_pixels=100)
        spec = SplitSpec(seed=123)
        t1, s1 = split(gt, spec)
        t2, s2 = split(gt, spec)
        np.testing.assert_array_equal(t1, t2)
        np.testing.assert_array_equal(s1, s2)

    def test_masks_partition_labeled_pixels(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            _, gt = random_dataset(rng)
            train, test = split(gt, SplitSpec(seed=7))
            assert train.shape == (gt.labeled_count,)
            assert not (train & test).any()
            assert (train | test).all()

    def test_stratified_counts_within_one(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            _, gt = random_dataset(rng)
            train, _ = split(gt, SplitSpec(train_fraction=0.5, seed=11))
            labels = gt.labels[gt.labeled_mask]
            for cls in range(1, gt.n_classes + 1):
                n_cls = np.count_nonzero(labels == cls)
                n_train = np.count_nonzero(labels[train] == cls)
                assert abs(n_train - 0.5 * n_cls) <= 1

    def test_degenerate_class_named(self):
        gt = GroundTruth(np.array([[1, 1, 2]], dtype=np.int32), 2)
        with pytest.raises(ValueError, match="class 2"):
            split(gt, SplitSpec())

    def test_unstratified_allows_tiny_classes(self):
        gt = GroundTruth(np.array([[1, 1, 2]], dtype=np.int32), 2)
        train, test = split(gt, SplitSpec(stratified=False))
        assert train.sum() + test.sum() == 3

    def test_fraction_validation(self):
        with pytest.raises(ValueError):
            SplitSpec(train_fraction=0.0)
        with pytest.raises(ValueError):
            SplitSpec(train_fraction=1.0)


class TestClassifyKnn:
    def test_exact_training_match_wins_at_k1(self):
        values = np.array([[[0.0, 10.0, 0.0]]], dtype=np.float32)
        gt = GroundTruth(np.array([[1, 2, 1]], dtype=np.int32), 2)
        cube = HyperCube(values)
        train = np.array([True, True, False])
        preds = classify_knn(cube, gt, [1], train, ~train, k=1)
        assert preds.tolist() == [1]

    def test_single_class_training(self):
        rng = np.random.default_rng(3)
        values = rng.normal(0, 1, (2, 1, 6)).astype(np.float32)
        gt = GroundTruth(np.array([[1, 1, 1, 1, 2, 2]], dtype=np.int32), 2)
        cube = HyperCube(values)
        train = np.array([True, True, True, True, False, False])
        preds = classify_knn(cube, gt, [1, 2], train, ~train, k=3)
        assert (preds == 1).all()

    def test_noiseless_informative_band_is_perfect(self):
        spec = SyntheticSpec(width=8, height=8, n_classes=2, n_informative=1,
                             seed=9)
        cube, gt = generate_synthetic(spec)
        train, test = split(gt, SplitSpec(seed=5))
        preds = classify_knn(cube, gt, [1], train, test, k=3)
        truth = gt.labels[gt.labeled_mask][test]
        assert accuracy(preds, truth) == 100.0

    def test_distance_tie_breaks_to_lower_training_index(self):
        # both training pixels sit at distance 0 from the test pixel
        values = np.array([[[5.0, 5.0, 5.0]]], dtype=np.float32)
        gt = GroundTruth(np.array([[2, 1, 1]], dtype=np.int32), 2)
        cube = HyperCube(values)
        train = np.array([True, True, False])
        preds = classify_knn(cube, gt, [1], train, ~train, k=1)
        assert preds.tolist() == [2]  # training pixel 0 carries class 2

    def test_majority_tie_breaks_to_smallest_class(self):
        # neighbors at equal distance carry classes 3 and 1; the vote ties
        values = np.array([[[0.0, 1.0, 2.0, 0.5]]], dtype=np.float32)
        gt = GroundTruth(np.array([[3, 1, 2, 1]], dtype=np.int32), 3)
        cube = HyperCube(values)
        train = np.array([True, True, True, False])
        preds = classify_knn(cube, gt, [1], train, ~train, k=2)
        assert preds.tolist() == [1]

    def test_empty_band_list(self):
        rng = np.random.default_rng(4)
        cube, gt = random_dataset(rng, n_pixels=10)
        train, test = split(gt, SplitSpec(stratified=False))
        with pytest.raises(ValueError):
            classify_knn(cube, gt, [], train, test)

    def test_matches_bruteforce_oracle(self):
        rng = np.random.default_rng(5)
        for _ in range(30):
            cube, gt = random_dataset(rng)
            train, test = split(gt, SplitSpec(stratified=False,
                                              seed=int(rng.integers(1e6))))
            bands = list(range(1, cube.n_bands + 1))
            k = int(rng.choice([1, 3, 5]))
            preds = classify_knn(cube, gt, bands, train, test, k=k)
            feats = np.column_stack(
                [cube.band_values(b)[gt.labeled_mask].astype(np.float64)
                 for b in bands])
            labels = gt.labels[gt.labeled_mask]
            ntr, nte = oracle_normalize(feats[train].tolist(),
                                        feats[test].tolist())
            expected = oracle_knn(ntr, labels[train], nte, k)
            assert preds.tolist() == expected


class TestAccuracy:
    def test_all_correct(self):
        assert accuracy([1, 2, 3], [1, 2, 3]) == 100.0

    def test_none_correct(self):
        assert accuracy([1, 2, 3], [2, 3, 1]) == 0.0

    def test_three_of_four(self):
        assert accuracy([1, 2, 3, 4], [1, 2, 3, 1]) == 75.0

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            accuracy([], [])

    def test_permutation_invariant(self):
        rng = np.random.default_rng(6)
        preds = rng.integers(1, 4, 50)
        truth = rng.integers(1, 4, 50)
        base = accuracy(preds, truth)
        perm = rng.permutation(50)
        assert accuracy(preds[perm], truth[perm]) == base

    def test_macro_weights_classes_equally(self):
        preds = np.array([1, 1, 1, 2])
        truth = np.array([1, 1, 1, 1])
        assert macro_accuracy(preds, truth) == 75.0
        preds = np.array([1, 1, 2, 2])
        truth = np.array([1, 1, 2, 1])
        # class 1: 2/3 correct, class 2: 1/1
        assert macro_accuracy(preds, truth) == pytest.approx(
            100.0 * (2 / 3 + 1.0) / 2)


class TestSweep:
    def test_single_informative_band_row(self):
        spec = SyntheticSpec(width=8, height=8, n_classes=2, n_informative=1,
                             n_noise=1, seed=15)
        cube, gt = generate_synthetic(spec)
        report = sweep(cube, gt,
                       SelectionConfig(k_max=1, algorithm=TMI_FILTER),
                       [1], SplitSpec(seed=3))
        assert len(report.rows) == 1
        assert report.rows[0].n_bands == 1
        assert report.rows[0].accuracy_percent == 100.0

    def test_shortfall_reports_actual_count(self):
        # Th = 0 rejects everything after the seed band here
        spec = SyntheticSpec(width=8, height=8, n_classes=4, n_informative=2,
                             n_redundant=2, seed=15)
        cube, gt = generate_synthetic(spec)
        config = SelectionConfig(k_max=4, algorithm=MI_FILTER,
                                 threshold_th=10.0)
        report = sweep(cube, gt, config, [4], SplitSpec(seed=3))
        row = report.rows[0]
        assert row.shortfall
        assert row.n_bands == 1
        assert row.requested_n == 4

    def test_rows_unique_after_exhaustion_collisions(self):
        spec = SyntheticSpec(width=8, height=8, n_classes=4, n_informative=2,
                             n_redundant=2, seed=15)
        cube, gt = generate_synthetic(spec)
        config = SelectionConfig(k_max=4, algorithm=MI_FILTER,
                                 threshold_th=10.0)
        report = sweep(cube, gt, config, [2, 3, 4], SplitSpec(seed=3))
        keys = [(r.algorithm, r.n_bands) for r in report.rows]
        assert len(keys) == len(set(keys)) == 1

    def test_deterministic_csv_bytes(self, tmp_path):
        spec = SyntheticSpec(width=12, height=12, n_classes=4,
                             n_informative=3, n_noise=3, noise_sigma=1.0,
                             seed=71)
        cube, gt = generate_synthetic(spec)
        config = SelectionConfig(k_max=4, algorithm=TMI_FILTER)
        for name in ("a.csv", "b.csv"):
            report = sweep(cube, gt, config, [2, 4], SplitSpec(seed=13))
            write_report_csv(report, tmp_path / name)
        assert (tmp_path / "a.csv").read_bytes() == \
            (tmp_path / "b.csv").read_bytes()

    def test_monotone_accuracy_on_noiseless_informative(self):
        spec = SyntheticSpec(width=10, height=10, n_classes=4,
                             n_informative=4, seed=77)
        cube, gt = generate_synthetic(spec)
        report = sweep(cube, gt,
                       SelectionConfig(k_max=4, algorithm=TMI_FILTER),
                       [1, 2, 3, 4], SplitSpec(seed=5))
        accs = [row.accuracy_percent for row in report.rows]
        assert all(b >= a for a, b in zip(accs, accs[1:]))

    def test_sizes_validation(self):
        spec = SyntheticSpec(width=8, height=8, n_classes=2, n_informative=1)
        cube, gt = generate_synthetic(spec)
        config = SelectionConfig(k_max=1, algorithm=TMI_FILTER)
        with pytest.raises(ValueError):
            sweep(cube, gt, config, [], SplitSpec())
        with pytest.raises(ValueError):
            sweep(cube, gt, config, [2, 1], SplitSpec())
        with pytest.raises(ValueError):
            sweep(cube, gt, config, [2], SplitSpec())


class TestClassifyMap:
    def test_perfect_classifier_reproduces_gt(self):
        spec = SyntheticSpec(width=8, height=8, n_classes=2, n_informative=1,
                             seed=25)
        cube, gt = generate_synthetic(spec)
        train, _ = split(gt, SplitSpec(seed=2))
        grid = classify_map(cube, gt, [1], train, k=1)
        np.testing.assert_array_equal(grid, gt.labels)

    def test_empty_test_mask_returns_gt(self):
        spec = SyntheticSpec(width=4, height=4, n_classes=2, n_informative=1,
                             n_noise=1, noise_sigma=1.0, seed=26)
        cube, gt = generate_synthetic(spec)
        train = np.ones(gt.labeled_count, dtype=bool)
        grid = classify_map(cube, gt, [2], train, k=3)
        np.testing.assert_array_equal(grid, gt.labels)

    def test_unlabeled_pixels_stay_zero(self):
        values = np.zeros((1, 2, 2), dtype=np.float32)
        values[0] = [[1.0, 2.0], [3.0, 4.0]]
        gt = GroundTruth(np.array([[1, 0], [0, 2]], dtype=np.int32), 2)
        cube = HyperCube(values)
        train = np.array([True, True])
        grid = classify_map(cube, gt, [1], train, k=1)
        assert grid[0, 1] == 0
        assert grid[1, 0] == 0


class TestExportFeatures:
    def test_files_and_normalization(self, tmp_path):
        spec = SyntheticSpec(width=4, height=4, n_classes=2, n_informative=2,
                             noise_sigma=0.5, seed=33)
        cube, gt = generate_synthetic(spec)
        train, test = split(gt, SplitSpec(seed=1))
        train_path, test_path = export_features(cube, gt, [1, 2], train, test,
                                                tmp_path)
        header = "pixel_id,label,b1,b2"
        train_lines = train_path.read_text().splitlines()
        test_lines = test_path.read_text().splitlines()
        assert train_lines[0] == header
        assert test_lines[0] == header
        assert len(train_lines) - 1 == train.sum()
        assert len(test_lines) - 1 == test.sum()
        for line in train_lines[1:] + test_lines[1:]:
            pixel_id, label, *feats = line.split(",")
            assert 0 <= int(pixel_id) < 16
            assert 1 <= int(label) <= 2
            for value in feats:
                assert 0.0 <= float(value) <= 1.0

    def test_deterministic_bytes(self, tmp_path):
        spec = SyntheticSpec(width=4, height=4, n_classes=2, n_informative=1,
                             noise_sigma=0.5, seed=34)
        cube, gt = generate_synthetic(spec)
        train, test = split(gt, SplitSpec(seed=8))
        (tmp_path / "x").mkdir()
        (tmp_path / "y").mkdir()
        export_features(cube, gt, [1], train, test, tmp_path / "x")
        export_features(cube, gt, [1], train, test, tmp_path / "y")
        assert (tmp_path / "x" / "train.csv").read_bytes() == \
            (tmp_path / "y" / "train.csv").read_bytes()

    def test_classifier_config_validation(self):
        with pytest.raises(ValueError):
            ClassifierConfig(kind="svm")
        with pytest.raises(ValueError):
            ClassifierConfig(k=0)
