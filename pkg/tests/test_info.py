import math

import numpy as np
import pytest

from bandselect.data import GroundTruth, HyperCube
from bandselect.info import (GT_RANGE, CodedVariable, DiscretizationConfig,
                             discretize_band, entropy, gt_codes,
                             interaction_info, joint_entropy, joint_histogram,
                             mi_joined, mutual_info)

from oracles import (oracle_entropy, oracle_interaction, oracle_joint_entropy,
                     oracle_mi_joined, oracle_mutual_info, random_coded,
                     random_coded_triple)


def cv(values, alphabet):
    return CodedVariable(np.array(values), alphabet)


def single_band_dataset(band_rows, labels):
    """1-band cube + ground truth from 2-D lists."""
    values = np.array(band_rows, dtype=np.float32)[None, :, :]
    labels = np.array(labels, dtype=np.int32)
    return HyperCube(values), GroundTruth(labels, int(labels.max()))


class TestCodedVariable:
    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            cv([0, 3], 3)
        with pytest.raises(ValueError):
            cv([-1, 0], 2)

    def test_immutable(self):
        x = cv([0, 1], 2)
        with pytest.raises(ValueError):
            x.codes[0] = 1


class TestEntropy:
    def test_uniform_binary(self):
        assert entropy(cv([0, 1], 2)) == 1.0

    def test_constant(self):
        assert entropy(cv([0, 0, 0, 0], 2)) == 0.0

    def test_half_quarter_quarter(self):
        assert entropy(cv([0, 0, 1, 3], 4)) == pytest.approx(1.5, abs=1e-12)

    def test_bounds_on_random(self):
        rng = np.random.default_rng(0)
        for _ in range(200):
            x = random_coded(rng)
            h = entropy(x)
            assert 0.0 <= h <= math.log2(x.alphabet_size) or x.alphabet_size == 1

    def test_alphabet_one(self):
        assert entropy(cv([0, 0], 1)) == 0.0


class TestJointEntropy:
    def test_self_join_adds_nothing(self):
        rng = np.random.default_rng(1)
        for _ in range(50):
            x = random_coded(rng)
            assert joint_entropy(x, x) == pytest.approx(entropy(x), abs=1e-12)

    def test_independent_uniform_bits(self):
        x = cv([0, 0, 1, 1], 2)
        y = cv([0, 1, 0, 1], 2)
        assert joint_entropy(x, y) == pytest.approx(2.0, abs=1e-12)

    def test_xor_triple(self):
        x = cv([0, 0, 1, 1], 2)
        y = cv([0, 1, 0, 1], 2)
        z = cv([0, 1, 1, 0], 2)
        assert joint_entropy(x, y, z) == pytest.approx(2.0, abs=1e-12)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            joint_entropy(cv([0, 1], 2), cv([0, 1, 0], 2))

    def test_arity(self):
        with pytest.raises(ValueError):
            joint_entropy(cv([0], 1))


class TestMutualInfo:
    def test_self_information(self):
        rng = np.random.default_rng(2)
        for _ in range(50):
            x = random_coded(rng)
            assert mutual_info(x, x) == pytest.approx(entropy(x), abs=1e-12)

    def test_independent_pair(self):
        x = cv([0, 0, 1, 1], 2)
        y = cv([0, 1, 0, 1], 2)
        assert mutual_info(x, y) == 0.0

    def test_deterministic_recoding(self):
        # y = f(x) with f = {0: 0, 1: 1, 3: 1}; I(x, f(x)) = H(f(x)),
        # value frozen from the direct-double-sum oracle.
        x = cv([0, 0, 1, 3], 4)
        y = cv([0, 0, 1, 1], 2)
        expected = oracle_mutual_info([0, 0, 1, 3], [0, 0, 1, 1])
        assert expected == pytest.approx(1.0, abs=1e-12)
        assert mutual_info(x, y) == pytest.approx(expected, abs=1e-12)

    def test_exact_symmetry(self):
        rng = np.random.default_rng(3)
        for _ in range(300):
            a, b, _ = random_coded_triple(rng)
            assert mutual_info(a, b) == mutual_info(b, a)

    def test_nonnegative(self):
        rng = np.random.default_rng(4)
        for _ in range(300):
            a, b, _ = random_coded_triple(rng)
            assert mutual_info(a, b) >= 0.0

    def test_data_processing(self):
        rng = np.random.default_rng(5)
        for _ in range(200):
            a, b, _ = random_coded_triple(rng)
            table = rng.integers(0, a.alphabet_size, a.alphabet_size)
            fa = CodedVariable(table[a.codes], a.alphabet_size)
            assert mutual_info(fa, b) <= mutual_info(a, b) + 1e-12

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            mutual_info(cv([0], 2), cv([0, 1], 2))


class TestMiJoined:
    def test_duplicated_second_variable(self):
        rng = np.random.default_rng(6)
        for _ in range(100):
            a, b, _ = random_coded_triple(rng)
            assert mi_joined(a, b, b) == pytest.approx(mutual_info(a, b),
                                                       abs=1e-12)

    def test_xor_pair_determines(self):
        b = cv([0, 0, 1, 1], 2)
        c = cv([0, 1, 0, 1], 2)
        a = cv([0, 1, 1, 0], 2)
        assert mi_joined(a, b, c) == pytest.approx(1.0, abs=1e-12)

    def test_independent_of_pair(self):
        # a varies over the first factor of an exhaustive 3-bit cube slice
        a = cv([0, 0, 0, 0, 1, 1, 1, 1], 2)
        b = cv([0, 0, 1, 1, 0, 0, 1, 1], 2)
        c = cv([0, 1, 0, 1, 0, 1, 0, 1], 2)
        assert mi_joined(a, b, c) == 0.0


class TestInteractionInfo:
    def test_xor_synergy(self):
        b = cv([0, 0, 1, 1], 2)
        c = cv([0, 1, 0, 1], 2)
        a = cv([0, 1, 1, 0], 2)
        assert interaction_info(a, b, c) == pytest.approx(1.0, abs=1e-12)

    def test_pure_redundancy(self):
        a = cv([0, 1], 2)
        assert interaction_info(a, a, a) == pytest.approx(-1.0, abs=1e-12)

    def test_jointly_independent(self):
        a = cv([0, 0, 0, 0, 1, 1, 1, 1], 2)
        b = cv([0, 0, 1, 1, 0, 0, 1, 1], 2)
        c = cv([0, 1, 0, 1, 0, 1, 0, 1], 2)
        assert interaction_info(a, b, c) == pytest.approx(0.0, abs=1e-12)

    def test_duplicate_argument_is_negated_mi(self):
        rng = np.random.default_rng(7)
        for _ in range(100):
            a, _, c = random_coded_triple(rng)
            assert interaction_info(a, a, c) == pytest.approx(
                -mutual_info(a, c), abs=1e-12)

    def test_permutation_symmetry(self):
        import itertools
        rng = np.random.default_rng(8)
        for _ in range(100):
            triple = random_coded_triple(rng)
            values = [interaction_info(*perm)
                      for perm in itertools.permutations(triple)]
            assert max(values) - min(values) < 1e-12

    def test_matches_joined_form(self):
        # I3 == mutual_info(join(a,b), c) - I(a,c) - I(b,c)
        rng = np.random.default_rng(9)
        for _ in range(100):
            a, b, c = random_coded_triple(rng)
            joined = CodedVariable(
                a.codes.astype(np.int64) * b.alphabet_size + b.codes,
                a.alphabet_size * b.alphabet_size)
            direct = (mutual_info(joined, c) - mutual_info(a, c)
                      - mutual_info(b, c))
            assert interaction_info(a, b, c) == pytest.approx(direct,
                                                              abs=1e-12)


class TestOracleEquivalence:
    def test_all_measures_small_suite(self):
        rng = np.random.default_rng(10)
        for _ in range(100):
            a, b, c = random_coded_triple(rng)
            assert entropy(a) == pytest.approx(oracle_entropy(a.codes),
                                               abs=1e-12)
            assert joint_entropy(a, b) == pytest.approx(
                oracle_joint_entropy(a.codes, b.codes), abs=1e-12)
            assert joint_entropy(a, b, c) == pytest.approx(
                oracle_joint_entropy(a.codes, b.codes, c.codes), abs=1e-12)
            assert mutual_info(a, b) == pytest.approx(
                oracle_mutual_info(a.codes, b.codes), abs=1e-12)
            assert mi_joined(a, b, c) == pytest.approx(
                oracle_mi_joined(a.codes, b.codes, c.codes), abs=1e-12)
            assert interaction_info(a, b, c) == pytest.approx(
                oracle_interaction(a.codes, b.codes, c.codes), abs=1e-12)


class TestJointHistogram:
    def test_counts_and_total(self):
        a = cv([0, 0, 1], 2)
        b = cv([1, 1, 0], 2)
        hist = joint_histogram(a, b)
        assert hist.dims == (2, 2)
        assert hist.total == 3
        assert hist.counts.sum() == 3
        assert hist.counts[0, 1] == 2
        assert hist.counts[1, 0] == 1

    def test_refuses_oversized_space(self):
        a = cv([0], 1 << 13)
        with pytest.raises(ValueError):
            joint_histogram(a, a, a)


class TestDiscretizeBand:
    def test_constant_band(self):
        cube, gt = single_band_dataset([[5.0, 5.0], [5.0, 5.0]],
                                       [[1, 1], [1, 2]])
        coded = discretize_band(cube, 1, gt, DiscretizationConfig(n_bins=16))
        assert coded.alphabet_size == 16
        assert (coded.codes == 0).all()

    def test_endpoints_hit_extreme_bins(self):
        cube, gt = single_band_dataset([[0.0, 255.0]], [[1, 2]])
        coded = discretize_band(cube, 1, gt, DiscretizationConfig(n_bins=256))
        assert sorted(coded.codes.tolist()) == [0, 255]

    def test_two_bins_half_open(self):
        # bins [10, 20) and [20, 30] with the max clamped into the top bin
        cube, gt = single_band_dataset([[10.0, 20.0, 30.0]], [[1, 1, 2]])
        coded = discretize_band(cube, 1, gt, DiscretizationConfig(n_bins=2))
        assert coded.codes.tolist() == [0, 1, 1]

    def test_covers_labeled_pixels_in_row_major_order(self):
        cube, gt = single_band_dataset([[1.0, 2.0], [3.0, 4.0]],
                                       [[0, 1], [1, 0]])
        coded = discretize_band(cube, 1, gt, DiscretizationConfig(n_bins=2))
        # labeled values in row-major order are 2.0 then 3.0
        assert len(coded) == 2
        assert coded.codes.tolist() == [0, 1]

    def test_gt_range_recodes_a_labels_band_exactly(self):
        cube, gt = single_band_dataset([[1.0, 2.0, 3.0]], [[1, 2, 3]])
        coded = discretize_band(cube, 1, gt,
                                DiscretizationConfig(strategy=GT_RANGE))
        assert coded.alphabet_size == gt.n_classes
        assert coded.codes.tolist() == [0, 1, 2]

    def test_band_out_of_range(self):
        cube, gt = single_band_dataset([[1.0, 2.0]], [[1, 2]])
        with pytest.raises(ValueError):
            discretize_band(cube, 2, gt, DiscretizationConfig())

    def test_config_validation(self):
        with pytest.raises(ValueError):
            DiscretizationConfig(n_bins=1)
        with pytest.raises(ValueError):
            DiscretizationConfig(strategy="quantile")


class TestGtCodes:
    def test_remaps_and_skips_unlabeled(self):
        gt = GroundTruth(np.array([[1, 2], [0, 2]], dtype=np.int32), 2)
        coded = gt_codes(gt)
        assert coded.codes.tolist() == [0, 1, 1]
        assert coded.alphabet_size == 2

    def test_single_class(self):
        gt = GroundTruth(np.array([[1, 1], [1, 1]], dtype=np.int32), 1)
        coded = gt_codes(gt)
        assert (coded.codes == 0).all()
        assert coded.alphabet_size == 1
