"""Wilcoxon signed-rank: exact DP path against a full sign-pattern enumeration."""

import itertools

import numpy as np
import pytest

from folde.sim.metrics import average_ranks
from folde.sim.stats import wilcoxon_one_sided


def enumeration_oracle(differences) -> float:
    """Brute-force 2^n enumeration of sign patterns on the observed ranks."""
    d = np.asarray(differences, dtype=np.float64)
    d = d[d != 0.0]
    n = len(d)
    ranks = average_ranks(np.abs(d))
    doubled = np.rint(2 * ranks).astype(int)
    observed = int(round(2 * float(ranks[d > 0].sum())))
    count = 0
    for signs in itertools.product((0, 1), repeat=n):
        stat = sum(r for r, s in zip(doubled, signs) if s)
        if stat >= observed:
            count += 1
    return count / 2.0**n


class TestExactAgainstEnumeration:
    def test_all_sizes_up_to_ten(self):
        rng = np.random.default_rng(0)
        for n in range(1, 11):
            for trial in range(8):
                d = rng.standard_normal(n)
                if trial % 2 == 0:
                    d = np.round(d, 1)  # induce ties among |d|
                d = d[d != 0.0]
                if len(d) == 0:
                    continue
                assert wilcoxon_one_sided(d) == enumeration_oracle(d)

    def test_five_all_positive(self):
        assert wilcoxon_one_sided([0.1, 0.2, 0.3, 0.4, 0.5]) == 0.03125

    def test_single_positive(self):
        assert wilcoxon_one_sided([1.0]) == 0.5

    def test_single_negative(self):
        assert wilcoxon_one_sided([-1.0]) == 1.0

    def test_mirror_symmetry(self):
        """p(d) + p(-d) equals 1 plus the probability mass at the observed statistic."""
        rng = np.random.default_rng(1)
        for _ in range(20):
            d = rng.standard_normal(8)
            p_pos = wilcoxon_one_sided(d)
            p_neg = wilcoxon_one_sided(-d)
            ranks = average_ranks(np.abs(d))
            doubled = np.rint(2 * ranks).astype(int)
            observed = int(round(2 * float(ranks[d > 0].sum())))
            at_stat = sum(
                1
                for signs in itertools.product((0, 1), repeat=len(d))
                if sum(r for r, s in zip(doubled, signs) if s) == observed
            ) / 2.0 ** len(d)
            assert p_pos + p_neg == pytest.approx(1.0 + at_stat, abs=1e-12)


class TestEdges:
    def test_zeros_dropped(self):
        assert wilcoxon_one_sided([0.0, 1.0]) == 0.5

    def test_all_zero_rejected(self):
        with pytest.raises(ValueError):
            wilcoxon_one_sided([0.0, 0.0])

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError):
            wilcoxon_one_sided([np.nan, 1.0])

    def test_ties_get_average_ranks(self):
        # |d| = (1,1): ranks 1.5 each; both positive -> W=3, p = 1/4
        assert wilcoxon_one_sided([1.0, 1.0]) == 0.25


class TestNormalApproximation:
    def test_large_n_close_to_exact_shape(self):
        """Above the exact cutoff the approximation tracks the DP closely."""
        from folde.sim.stats import _exact_upper_tail, _normal_upper_tail

        rng = np.random.default_rng(5)
        d = rng.standard_normal(26)  # just above EXACT_MAX_N
        p = wilcoxon_one_sided(d)
        ranks = average_ranks(np.abs(d))
        w_plus = float(ranks[d > 0].sum())
        exact = _exact_upper_tail(ranks, w_plus)
        assert p == _normal_upper_tail(ranks, w_plus, len(d))
        assert abs(p - exact) < 0.01

    def test_strongly_positive_large_sample(self):
        d = np.linspace(0.5, 3.0, 40)
        assert wilcoxon_one_sided(d) < 1e-6
