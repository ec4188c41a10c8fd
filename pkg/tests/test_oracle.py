import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shiftlab import oracle
from shiftlab.classify import windowed_density
from shiftlab.errors import BoundExceeded, Infeasible
from shiftlab.measures import indicator_potential
from shiftlab.shifts import count_periodic, count_words, sft_from_matrix


class TestBruteCounts:
    def test_golden_small(self, golden):
        assert oracle.brute_count_words(golden, 4) == 8
        assert oracle.brute_count_cycles(golden, 4) == 7

    def test_full2(self, full2):
        assert oracle.brute_count_words(full2, 5) == 32
        assert oracle.brute_count_cycles(full2, 5) == 32

    def test_reducible_diagonal(self):
        s = sft_from_matrix(2, [[1, 0], [0, 1]])
        assert oracle.brute_count_words(s, 3) == 2
        assert oracle.brute_count_cycles(s, 3) == 2

    def test_kernel_agreement(self, golden, full2, full3, random4):
        for s in (golden, full2, full3, random4):
            for n in range(1, 13):
                assert count_words(s, n) == oracle.brute_count_words(s, n)
                assert count_periodic(s, n) == oracle.brute_count_cycles(s, n)

    def test_caps(self, golden):
        with pytest.raises(BoundExceeded):
            oracle.brute_count_words(golden, 25)
        with pytest.raises(BoundExceeded):
            oracle.brute_count_cycles(golden, 17)


class TestConstrainedEntropy:
    def test_golden_at_parry_mean(self, golden, phi_golden):
        got = oracle.brute_constrained_entropy(golden, phi_golden, 0.276393, 40)
        assert got == pytest.approx(math.log((1 + 5 ** 0.5) / 2), abs=0.02)

    def test_full2_symmetric(self, full2, phi_full2):
        got = oracle.brute_constrained_entropy(full2, phi_full2, 0.5, 40)
        assert got == pytest.approx(math.log(2), abs=0.02)

    def test_infeasible_outside(self, golden, phi_golden):
        with pytest.raises(Infeasible):
            oracle.brute_constrained_entropy(golden, phi_golden, 0.9, 40)

    def test_grid_cap(self, golden, phi_golden):
        with pytest.raises(BoundExceeded):
            oracle.brute_constrained_entropy(golden, phi_golden, 0.3, 100)


class TestDensity:
    def test_evens(self):
        lo, hi = oracle.brute_density(set(range(0, 4096, 2)), 4096)
        assert lo == pytest.approx(0.5, abs=1e-3)
        assert hi == pytest.approx(0.5, abs=1e-3)

    def test_powers_of_two_thin(self):
        visits = {1 << k for k in range(21)}
        lo, hi = oracle.brute_density(visits, 1 << 20)
        assert hi <= 4e-5

    def test_everything(self):
        lo, hi = oracle.brute_density(lambda n: True, 1024)
        assert lo == hi == 1.0

    def test_cap(self):
        with pytest.raises(BoundExceeded):
            oracle.brute_density(set(), (1 << 22) + 1)

    @given(st.sets(st.integers(0, 9999), max_size=200), st.integers(2000, 10000))
    @settings(max_examples=25, deadline=None)
    def test_windowed_estimator_brackets_exact(self, visits, n_max):
        # low-density sets: the 32-checkpoint scan misses extremes inward by
        # at most (grid ratio - 1) * density < 0.01
        exact_lo, exact_hi = oracle.brute_density(visits, n_max)
        arr = np.array(sorted(v for v in visits if v < n_max), dtype=np.int64)
        est_lo, est_hi = windowed_density(arr, n_max)
        assert exact_lo - 1e-12 <= est_lo <= exact_lo + 0.01
        assert exact_hi - 0.01 <= est_hi <= exact_hi + 1e-12


class TestDominanceInvariant:
    def test_oracle_never_exceeds_variational_sup(self, golden, phi_golden):
        from shiftlab.spectrum import spectrum_point
        for i in range(1, 10):
            a = 0.5 * i / 10
            psi, _ = spectrum_point(golden, phi_golden, a)
            val = oracle.brute_constrained_entropy(golden, phi_golden, a, 40)
            assert val <= psi + 1e-6
            assert abs(val - psi) <= 0.02

    def test_detailed_result(self, full2, phi_full2):
        r = oracle.brute_constrained_entropy(full2, phi_full2, 0.5, 20, detailed=True)
        assert r.enumerated > 0
        assert r.value == pytest.approx(0.6931471805599453, abs=0.02)


class TestThreeSymbolAgreement:
    def test_dominance_and_agreement(self):
        from shiftlab.shifts import sft_from_matrix
        from shiftlab.spectrum import spectrum_point
        s3 = sft_from_matrix(3, [[1, 1, 1], [1, 1, 0], [1, 0, 1]])
        phi = indicator_potential(s3, (1,))
        for a in (0.3, 0.6):
            psi, _ = spectrum_point(s3, phi, a)
            val = oracle.brute_constrained_entropy(s3, phi, a, 10)
            assert val <= psi + 1e-6
            assert abs(val - psi) <= 0.02
