"""Constant-liar updates against an exact Gaussian-conditioning oracle."""

import numpy as np
import pytest

from folde.selector import (
    CLState,
    SingularUpdateError,
    cl_update,
    constant_liar_select,
    top_n_select,
    ucb_score,
)


def gaussian_condition_oracle(mean, cov, observed_index, observed_value, noise):
    """Posterior of the others given one noisy observation, via the joint form.

    Independent of the incremental implementation: builds the full joint,
    treats the observation as y_i + noise, and applies the textbook
    conditional-Gaussian formulas with explicit solves.
    """
    mean = np.asarray(mean, dtype=np.float64)
    cov = np.asarray(cov, dtype=np.float64)
    n = len(mean)
    others = [j for j in range(n) if j != observed_index]
    sigma_oo = cov[np.ix_(others, others)]
    sigma_oi = cov[others, observed_index]
    sigma_ii = cov[observed_index, observed_index] + noise
    gain = sigma_oi / sigma_ii
    post_mean = mean[others] + gain * (observed_value - mean[observed_index])
    post_cov = sigma_oo - np.outer(gain, sigma_oi)
    return post_mean, post_cov


def random_psd(rng, n):
    a = rng.standard_normal((n, max(1, n - rng.integers(0, n))))
    cov = a @ a.T + 1e-3 * np.eye(n)
    return (cov + cov.T) / 2.0


class TestTopN:
    def test_basic(self):
        assert top_n_select([3.0, 1.0, 2.0], 2) == [0, 2]

    def test_full_argsort(self):
        assert top_n_select([3.0, 1.0, 2.0], 3) == [0, 2, 1]

    def test_ties_lower_index_first(self):
        assert top_n_select([1.0, 1.0, 1.0], 2) == [0, 1]

    def test_too_many_requested(self):
        with pytest.raises(ValueError):
            top_n_select([1.0], 2)


class TestUcb:
    def test_mean_plus_scaled_sd(self):
        out = ucb_score([1.0], [[4.0]], beta=1.0)
        assert out[0] == pytest.approx(3.0, abs=1e-15)

    def test_beta_zero_is_mean(self):
        out = ucb_score([1.0, -2.0], np.diag([4.0, 9.0]), beta=0.0)
        assert np.allclose(out, [1.0, -2.0])

    def test_zero_covariance_preserves_mean_order(self):
        mean = np.array([0.3, -1.0, 2.0, 0.9])
        out = ucb_score(mean, np.zeros((4, 4)), beta=5.0)
        assert np.array_equal(np.argsort(out), np.argsort(mean))

    def test_tiny_negative_variance_clamped(self):
        out = ucb_score([0.0], [[-1e-13]], beta=1.0)
        assert out[0] == 0.0

    def test_large_negative_variance_rejected(self):
        with pytest.raises(ValueError):
            ucb_score([0.0], [[-1e-6]], beta=1.0)


class TestClUpdate:
    def test_worked_example_alpha_zero(self):
        state = CLState.create([1.0, 0.0], [[2.0, 1.0], [1.0, 2.0]], alpha=0.0)
        assert state.lie_value == 0.0
        new = cl_update(state, 0)
        assert new.cov.shape == (1, 1)
        assert new.cov[0, 0] == pytest.approx(1.5, abs=1e-12)
        assert new.mean[0] == pytest.approx(-0.5, abs=1e-12)

    def test_worked_example_alpha_six(self):
        # median diag = 2, effective variance = 2 + 6*2 = 14
        state = CLState.create([1.0, 0.0], [[2.0, 1.0], [1.0, 2.0]], alpha=6.0)
        new = cl_update(state, 0)
        assert new.cov[0, 0] == pytest.approx(2.0 - 1.0 / 14.0, abs=1e-12)
        assert new.mean[0] == pytest.approx(-1.0 / 14.0, abs=1e-12)

    def test_uncorrelated_choice_leaves_rest_unchanged(self):
        cov = np.diag([1.0, 2.0, 3.0])
        state = CLState.create([3.0, 1.0, 2.0], cov, alpha=0.5)
        new = cl_update(state, 0)
        assert np.array_equal(new.mean, [1.0, 2.0])
        assert np.array_equal(new.cov, np.diag([2.0, 3.0]))

    def test_matches_gaussian_conditioning_oracle(self):
        rng = np.random.default_rng(11)
        for trial in range(100):
            n = int(rng.integers(2, 33))
            cov = random_psd(rng, n)
            mean = rng.standard_normal(n)
            alpha = float(rng.choice([0.0, 0.5, 1.0, 6.0, 100.0]))
            state = CLState.create(mean, cov, alpha)
            chosen = int(rng.integers(0, n))
            new = cl_update(state, chosen)
            noise = alpha * float(np.median(np.diagonal(cov)))
            exp_mean, exp_cov = gaussian_condition_oracle(
                mean, cov, chosen, state.lie_value, noise
            )
            scale = max(1.0, np.abs(exp_cov).max())
            assert np.abs(new.cov - exp_cov).max() <= 1e-9 * scale
            mscale = max(1.0, np.abs(exp_mean).max())
            assert np.abs(new.mean - exp_mean).max() <= 1e-9 * mscale

    def test_covariance_update_independent_of_lie(self):
        rng = np.random.default_rng(3)
        cov = random_psd(rng, 8)
        mean = rng.standard_normal(8)
        a = CLState.create(mean, cov, alpha=1.0)
        b = CLState.create(mean, cov, alpha=1.0)
        b.lie_value = b.lie_value - 17.0
        ca, cb = cl_update(a, 3), cl_update(b, 3)
        assert ca.cov.tobytes() == cb.cov.tobytes()

    def test_psd_preserved_through_successive_updates(self):
        rng = np.random.default_rng(5)
        cov = random_psd(rng, 16)
        state = CLState.create(rng.standard_normal(16), cov, alpha=0.5)
        for _ in range(12):
            pick = int(state.remaining[int(np.argmax(state.ucb(1.0)))])
            state = cl_update(state, pick)
            eigs = np.linalg.eigvalsh(state.cov)
            assert eigs.min() >= -1e-9
            assert np.array_equal(state.cov, state.cov.T)

    def test_singular_update_rejected(self):
        state = CLState.create([1.0, 0.0], np.zeros((2, 2)), alpha=0.0)
        with pytest.raises(SingularUpdateError):
            cl_update(state, 0)

    def test_unknown_candidate_rejected(self):
        state = CLState.create([1.0, 0.0], np.eye(2), alpha=0.0)
        state = cl_update(state, 1)
        with pytest.raises(ValueError):
            cl_update(state, 1)


class TestConstantLiarSelect:
    def test_full_batch_is_permutation(self):
        rng = np.random.default_rng(4)
        cov = random_psd(rng, 10)
        mean = rng.standard_normal(10)
        batch = constant_liar_select(mean, cov, 10, alpha=1.0)
        assert sorted(batch) == list(range(10))

    def test_large_alpha_recovers_top_n(self):
        rng = np.random.default_rng(8)
        for trial in range(20):
            n = int(rng.integers(4, 20))
            cov = random_psd(rng, n)
            # well separated means so tiny lie corrections cannot flip order
            mean = np.sort(rng.standard_normal(n))[::-1] * 10.0 + np.arange(n)[::-1] * 5.0
            ucb = ucb_score(mean, cov, 1.0)
            expected = top_n_select(ucb, min(5, n))
            got = constant_liar_select(mean, cov, min(5, n), alpha=1e6)
            assert got == expected

    def test_correlated_twins_diversified(self):
        # two interchangeable high-mean candidates and one independent
        # mid-mean candidate: after the first twin, the oracle posterior drops
        # the second twin's score below the independent candidate's
        mean = np.array([1.0, 1.0, 0.5])
        cov = np.array([[1.0, 0.999, 0.0], [0.999, 1.0, 0.0], [0.0, 0.0, 1.0]])
        state = CLState.create(mean, cov, alpha=0.0)
        post_mean, post_cov = gaussian_condition_oracle(mean, cov, 0, state.lie_value, 0.0)
        twin_ucb = post_mean[0] + np.sqrt(max(post_cov[0, 0], 0.0))
        other_ucb = post_mean[1] + np.sqrt(post_cov[1, 1])
        assert twin_ucb < other_ucb  # oracle confirms the twin falls behind
        batch = constant_liar_select(mean, cov, 2, alpha=0.0, beta=1.0)
        assert batch[0] in (0, 1)
        assert batch[1] == 2

    def test_diagonal_covariance_equals_ucb_top_n(self):
        rng = np.random.default_rng(9)
        for alpha in (0.0, 1.0, 6.0, 100.0):
            mean = rng.standard_normal(12)
            cov = np.diag(rng.uniform(0.1, 2.0, size=12))
            expected = top_n_select(ucb_score(mean, cov, 1.0), 6)
            assert constant_liar_select(mean, cov, 6, alpha=alpha) == expected

    def test_upfront_noise_mode(self):
        rng = np.random.default_rng(10)
        cov = random_psd(rng, 6)
        mean = rng.standard_normal(6)
        batch = constant_liar_select(mean, cov, 3, alpha=2.0, noise_mode="upfront")
        assert len(set(batch)) == 3
