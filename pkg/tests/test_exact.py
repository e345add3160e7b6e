"""Brute-force oracle: partition function, posteriors, and gradients."""

import math

import numpy as np
import pytest
from scipy.integrate import quad

from gmrbm.errors import CapacityError
from gmrbm.exact import (
    enumerate_codes,
    exact_gradient,
    exact_log_likelihood,
    exact_posterior,
    exact_slot_marginals,
    exact_summary,
)
from gmrbm.model import ModelParams, hidden_posterior, offset_constant

from test_model import random_model


class TestEnumeration:
    def test_slot_one_varies_fastest(self):
        codes = enumerate_codes(2, 3)
        assert codes.shape == (9, 2)
        assert codes[:, 0].tolist() == [1, 2, 3, 1, 2, 3, 1, 2, 3]
        assert codes[:, 1].tolist() == [1, 1, 1, 2, 2, 2, 3, 3, 3]

    def test_cap_enforced(self):
        with pytest.raises(CapacityError):
            enumerate_codes(30, 3, max_codes=10**6)
        with pytest.raises(CapacityError):
            exact_summary(random_model(np.random.default_rng(0), n=1, m=2, q=2), max_codes=3)


class TestExactSummary:
    def test_symmetric_states_uniform(self):
        p = ModelParams(1, 1, 3, [0.0], np.zeros((1, 3)), np.zeros((3, 1, 1)))
        s = exact_summary(p)
        assert s.hidden_marginal == pytest.approx([1 / 3] * 3, abs=1e-14)
        assert s.log_partition == pytest.approx(0.5 * math.log(2 * math.pi) + math.log(3))

    def test_known_offsets_give_known_marginal(self):
        # W = 0 makes K(h) = -c[h]; choose c so K = (0, log 3)
        c = np.array([[0.0, -math.log(3.0)]])
        p = ModelParams(1, 1, 2, [0.0], c, np.zeros((2, 1, 1)))
        s = exact_summary(p)
        assert s.hidden_marginal == pytest.approx([0.75, 0.25], abs=1e-14)

    def test_marginal_normalized(self):
        rng = np.random.default_rng(20)
        for _ in range(30):
            s = exact_summary(random_model(rng))
            assert abs(s.hidden_marginal.sum() - 1.0) < 1e-12

    def test_marginal_proportional_to_exp_neg_offset(self):
        rng = np.random.default_rng(21)
        p = random_model(rng, n=2, m=2, q=3)
        codes = enumerate_codes(p.m, p.q)
        k = np.array([offset_constant(p, h) for h in codes])
        expected = np.exp(-k) / np.exp(-k).sum()
        assert exact_summary(p).hidden_marginal == pytest.approx(expected, abs=1e-12)


class TestExactLogLikelihood:
    def test_standard_normal_at_origin(self):
        p = ModelParams(1, 1, 1, [0.0], np.zeros((1, 1)), np.zeros((1, 1, 1)))
        assert exact_log_likelihood(p, [0.0]) == pytest.approx(-0.5 * math.log(2 * math.pi))

    def test_state_relabeling_invariance(self):
        rng = np.random.default_rng(22)
        p = random_model(rng, n=2, m=2, q=3)
        perm = np.array([2, 0, 1])
        permuted = ModelParams(p.n, p.m, p.q, p.b, p.c[:, perm], p.W[perm])
        v = rng.standard_normal(2)
        assert exact_log_likelihood(p, v) == pytest.approx(
            exact_log_likelihood(permuted, v), abs=1e-12
        )

    def test_density_integrates_to_one(self):
        rng = np.random.default_rng(23)
        p = random_model(rng, n=1, m=2, q=2)
        total, err = quad(lambda x: math.exp(exact_log_likelihood(p, [x])), -10, 10, limit=200)
        assert abs(total - 1.0) < 1e-6

    def test_density_integrates_to_one_with_sigma2(self):
        rng = np.random.default_rng(24)
        p = random_model(rng, n=1, m=1, q=3, sigma2=True)
        total, _ = quad(lambda x: math.exp(exact_log_likelihood(p, [x])), -20, 20, limit=300)
        assert abs(total - 1.0) < 1e-6


class TestExactPosterior:
    def test_uniform_for_unparameterized(self):
        p = ModelParams(1, 2, 3, [0.0], np.zeros((2, 3)), np.zeros((3, 2, 1)))
        post = exact_posterior(p, [0.7])
        assert post == pytest.approx(np.full(9, 1 / 9), abs=1e-14)

    def test_factorizes_as_outer_product(self):
        rng = np.random.default_rng(25)
        p = random_model(rng, n=2, m=2, q=3)
        v = rng.standard_normal(2)
        post = exact_posterior(p, v)
        codes = enumerate_codes(2, 3)
        marg = exact_slot_marginals(post, codes, 2, 3)
        outer = marg[0][codes[:, 0] - 1] * marg[1][codes[:, 1] - 1]
        assert post == pytest.approx(outer, abs=1e-12)

    def test_slot_marginals_match_softmax_on_100_models(self):
        rng = np.random.default_rng(26)
        for _ in range(100):
            p = random_model(rng)
            v = rng.standard_normal(p.n)
            post = exact_posterior(p, v)
            codes = enumerate_codes(p.m, p.q)
            marg = exact_slot_marginals(post, codes, p.m, p.q)
            assert np.abs(marg - hidden_posterior(p, v)).max() < 1e-10


class TestExactGradient:
    def test_bias_gradient_zero_at_symmetric_critical_point(self):
        rng = np.random.default_rng(27)
        data = rng.standard_normal((10, 3))
        p = ModelParams(3, 2, 2, data.mean(axis=0), np.zeros((2, 2)), np.zeros((2, 2, 3)))
        g = exact_gradient(p, data)
        assert np.abs(g.db).max() < 1e-10

    def test_matches_finite_differences(self):
        rng = np.random.default_rng(28)
        for _ in range(20):
            n = int(rng.integers(1, 4))
            m = int(rng.integers(1, 4))
            q = int(rng.integers(1, 4))
            p = ModelParams(n, m, q, rng.standard_normal(n),
                            rng.standard_normal((m, q)), rng.standard_normal((q, m, n)))
            data = rng.standard_normal((3, n))
            g = exact_gradient(p, data)

            def mean_ll():
                return float(np.mean([exact_log_likelihood(p, v) for v in data]))

            step = 1e-5
            for arr, grad in ((p.b, g.db), (p.c, g.dc), (p.W, g.dW)):
                it = np.nditer(arr, flags=["multi_index"])
                for _ in it:
                    ix = it.multi_index
                    keep = arr[ix]
                    arr[ix] = keep + step
                    up = mean_ll()
                    arr[ix] = keep - step
                    down = mean_ll()
                    arr[ix] = keep
                    fd = (up - down) / (2 * step)
                    assert abs(fd - grad[ix]) < 1e-6 * max(1.0, abs(grad[ix]))

    def test_unfavored_state_bias_gradient_negative(self):
        # data sits on state 1's template; state 2 keeps model mass (uniform
        # prior weight 0.5) it never earns from data, so its bias gradient
        # must push down
        W = np.array([[[2.0]], [[-2.0]]])
        p = ModelParams(1, 1, 2, [0.0], np.zeros((1, 2)), W)
        data = np.full((8, 1), 2.0)
        g = exact_gradient(p, data)
        marginal = exact_summary(p).hidden_marginal
        assert marginal[1] > 0
        assert g.dc[0, 1] < 0

    def test_empty_data_rejected(self):
        p = ModelParams(1, 1, 1, [0.0], np.zeros((1, 1)), np.zeros((1, 1, 1)))
        with pytest.raises(ValueError):
            exact_gradient(p, np.zeros((0, 1)))
