"""Naturalness scoring and zero-shot selection."""

import numpy as np
import pytest

from folde.core import AA_INDEX, ALPHABET, LogProbMatrix, Mutation, Variant, parse_variant
from folde.zeroshot import NaturalnessTable, naturalness_score, zero_shot_select


def normalized_rows(logits: np.ndarray) -> LogProbMatrix:
    lse = np.log(np.exp(logits).sum(axis=1, keepdims=True))
    return LogProbMatrix(logits - lse)


REF = "ACDEFGHIKL"


def matrix_with(entries: dict[tuple[int, str], float], length: int = 10) -> LogProbMatrix:
    """Build a normalized matrix whose within-row log differences match `entries`."""
    logits = np.zeros((length, 20))
    for (pos, aa), value in entries.items():
        logits[pos - 1, AA_INDEX[aa]] = value
    return normalized_rows(logits)


class TestNaturalnessScore:
    def test_wild_type_scores_zero(self):
        lp = matrix_with({})
        assert naturalness_score(Variant(), lp, REF) == 0.0

    def test_single_site_delta(self):
        # logP(mut) - logP(wt) = -1 - (-3) = 2 after row shifts cancel
        lp = matrix_with({(3, "S"): -1.0, (3, "D"): -3.0})
        v = parse_variant("D3S", REF)
        assert naturalness_score(v, lp, REF) == pytest.approx(2.0, abs=1e-12)

    def test_two_site_additivity(self):
        lp = matrix_with({(3, "S"): 1.0, (3, "D"): 0.0, (5, "W"): -0.5, (5, "F"): 0.0})
        v = parse_variant("D3S:F5W", REF)
        assert naturalness_score(v, lp, REF) == pytest.approx(0.5, abs=1e-12)

    def test_position_out_of_range(self):
        lp = matrix_with({}, length=2)
        with pytest.raises(IndexError):
            naturalness_score(parse_variant("D3S", REF), lp, REF)

    def test_multi_mutant_equals_sum_of_singles(self):
        rng = np.random.default_rng(7)
        lp = normalized_rows(rng.standard_normal((10, 20)))
        for _ in range(300):
            k = int(rng.integers(2, 5))
            positions = rng.choice(10, size=k, replace=False) + 1
            muts = []
            for p in positions:
                to = ALPHABET[int(rng.integers(0, 20))]
                if to == REF[p - 1]:
                    to = "A" if REF[p - 1] != "A" else "C"
                muts.append(Mutation(int(p), REF[p - 1], to))
            multi = Variant(tuple(muts))
            total = sum(naturalness_score(Variant((m,)), lp, REF) for m in muts)
            assert naturalness_score(multi, lp, REF) == pytest.approx(total, abs=1e-12)

    def test_row_shift_invariance(self):
        rng = np.random.default_rng(9)
        logits = rng.standard_normal((10, 20))
        lp = normalized_rows(logits)
        shifted = normalized_rows(logits + rng.standard_normal((10, 1)))
        for _ in range(50):
            p = int(rng.integers(1, 11))
            to = ALPHABET[int(rng.integers(0, 20))]
            if to == REF[p - 1]:
                continue
            v = Variant((Mutation(p, REF[p - 1], to),))
            assert naturalness_score(v, lp, REF) == pytest.approx(
                naturalness_score(v, shifted, REF), abs=1e-9
            )


class TestNaturalnessTable:
    def test_wild_type_entry_is_exactly_zero(self):
        rng = np.random.default_rng(4)
        lp = normalized_rows(rng.standard_normal((10, 20)))
        table = NaturalnessTable.build([Variant()], lp, REF)
        assert table[Variant()] == 0.0

    def test_multi_entries_sum_their_singles(self):
        rng = np.random.default_rng(5)
        lp = normalized_rows(rng.standard_normal((10, 20)))
        multi = parse_variant("D3S:F5W", REF)
        singles = [Variant((m,)) for m in multi.mutations]
        table = NaturalnessTable.build([multi] + singles, lp, REF)
        assert table[multi] == pytest.approx(
            table[singles[0]] + table[singles[1]], abs=1e-12
        )


def single(pos: int, to: str) -> Variant:
    return Variant((Mutation(pos, REF[pos - 1], to),))


class TestZeroShotSelect:
    def test_top_n_by_score(self):
        lp = matrix_with({(1, "S"): 0.9, (2, "S"): 0.8, (3, "S"): 0.7})
        chosen = zero_shot_select([single(3, "S"), single(1, "S"), single(2, "S")], lp, 2)
        assert chosen == [single(1, "S"), single(2, "S")]

    def test_per_locus_cap(self):
        entries = {(3, aa): s for aa, s in [("M", 9.0), ("N", 8.0), ("P", 7.0), ("Q", 6.0), ("R", 5.0)]}
        entries[(5, "M")] = 4.0
        lp = matrix_with(entries)
        candidates = [single(3, aa) for aa in "MNPQR"] + [single(5, "M")]
        chosen = zero_shot_select(candidates, lp, 4, per_locus_cap=3)
        assert chosen == [single(3, "M"), single(3, "N"), single(3, "P"), single(5, "M")]

    def test_tie_break_position_then_letter(self):
        lp = matrix_with({(2, "S"): 1.0, (2, "T"): 1.0, (4, "S"): 1.0})
        candidates = [single(4, "S"), single(2, "T"), single(2, "S")]
        chosen = zero_shot_select(candidates, lp, 3)
        assert chosen == [single(2, "S"), single(2, "T"), single(4, "S")]

    def test_permutation_invariance(self):
        rng = np.random.default_rng(3)
        lp = normalized_rows(rng.standard_normal((10, 20)))
        candidates = [
            single(p, aa)
            for p in range(1, 11)
            for aa in "MNP"
            if aa != REF[p - 1]
        ]
        base = zero_shot_select(candidates, lp, 10)
        for _ in range(10):
            shuffled = list(candidates)
            rng.shuffle(shuffled)
            assert zero_shot_select(shuffled, lp, 10) == base

    def test_empty_candidates_rejected(self):
        lp = matrix_with({})
        with pytest.raises(ValueError):
            zero_shot_select([], lp, 1)

    def test_n_larger_than_pool_rejected(self):
        lp = matrix_with({})
        with pytest.raises(ValueError):
            zero_shot_select([single(1, "S")], lp, 2)
