import itertools
from math import prod

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from matgamma.partitions import (as_partition, conjugate, dominates, gen_pochhammer,
                                 is_partition, log_abs_pochhammer, partitions_of,
                                 partitions_upto)

# OEIS A000041
PARTITION_COUNTS = [1, 1, 2, 3, 5, 7, 11, 15, 22, 30, 42, 56, 77, 101, 135]


def brute_partitions(m, max_parts=None):
    out = set()
    for r in range(0, m + 1):
        if max_parts is not None and r > max_parts:
            break
        for combo in itertools.combinations_with_replacement(range(1, m + 1), r):
            if sum(combo) == m:
                out.add(tuple(sorted(combo, reverse=True)))
    return out


class TestEnumeration:
    def test_small_cases(self):
        assert partitions_of(0) == [()]
        assert partitions_of(3) == [(3,), (2, 1), (1, 1, 1)]
        assert partitions_of(4, max_parts=2) == [(4,), (3, 1), (2, 2)]

    @pytest.mark.parametrize("m", range(len(PARTITION_COUNTS)))
    def test_counts(self, m):
        assert len(partitions_of(m)) == PARTITION_COUNTS[m]

    @pytest.mark.parametrize("m,L", [(6, 2), (7, 3), (9, 4), (5, 1)])
    def test_matches_brute_force(self, m, L):
        assert set(partitions_of(m, L)) == brute_partitions(m, L)

    @given(st.integers(0, 14))
    def test_reverse_lexicographic(self, m):
        parts = partitions_of(m)
        assert parts == sorted(parts, reverse=True)
        assert all(is_partition(p) and sum(p) == m for p in parts)

    def test_upto(self):
        assert len(partitions_upto(4)) == sum(PARTITION_COUNTS[:5])

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            partitions_of(-1)


class TestPartitionHelpers:
    def test_is_partition(self):
        assert is_partition((3, 1))
        assert is_partition(())
        assert not is_partition((1, 3))
        assert not is_partition((2, 0, 1))
        assert is_partition(np.array([2, 1]))

    def test_as_partition_strips_zeros(self):
        assert as_partition([2, 1, 0, 0]) == (2, 1)
        with pytest.raises(ValueError):
            as_partition([1, 2])

    @given(st.integers(0, 12).flatmap(lambda m: st.sampled_from(partitions_of(m))))
    def test_conjugate_involution(self, kappa):
        assert conjugate(conjugate(kappa)) == kappa
        assert sum(conjugate(kappa)) == sum(kappa)

    def test_dominance(self):
        assert dominates((3,), (2, 1))
        assert dominates((2, 1), (1, 1, 1))
        assert not dominates((1, 1, 1), (2, 1))


def pochhammer_cells(a, kappa):
    return prod(a - 0.5 * i + j for i, row in enumerate(kappa) for j in range(row))


class TestPochhammer:
    def test_known_values(self):
        assert gen_pochhammer(2.0, (2,)) == 6.0
        assert gen_pochhammer(3.0, (2, 1)) == 3.0 * 4.0 * 2.5
        assert gen_pochhammer(1.5, (1, 1)) == 1.5 * 1.0
        assert gen_pochhammer(5.0, ()) == 1.0

    @settings(max_examples=60)
    @given(st.floats(-4, 6, allow_nan=False),
           st.integers(0, 7).flatmap(lambda m: st.sampled_from(partitions_of(m))))
    def test_cell_product(self, a, kappa):
        ref = pochhammer_cells(a, kappa)
        np.testing.assert_allclose(gen_pochhammer(a, kappa), ref, rtol=1e-12, atol=1e-12)
        if ref != 0:
            la, sg = log_abs_pochhammer(a, kappa)
            np.testing.assert_allclose(sg * np.exp(la), ref, rtol=1e-10)

    def test_one_row_is_rising_factorial(self):
        # (a)_(m) = a (a+1) ... (a+m-1)
        np.testing.assert_allclose(gen_pochhammer(0.7, (4,)), 0.7 * 1.7 * 2.7 * 3.7)
