import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from bayescausal.dists import (
    BvnParams,
    RngState,
    bernoulli_expit,
    bvn_conditional,
    bvn_logpdf,
    dirichlet_ones,
    expit,
    normal_logpdf,
    normal_sample,
    simplex_from_exponentials,
)
from bayescausal.errors import ArgumentError

means = st.floats(-5, 5)
scales = st.floats(0.2, 3)
rhos = st.floats(-0.9, 0.9)


def bvn_logpdf_mp(mu1, mu0, s1, s0, rho, y1, y0):
    """General 2x2 Gaussian log-density at 40 digits, via explicit det/inverse."""
    mpmath.mp.dps = 40
    S = mpmath.matrix([[s1**2, rho * s1 * s0], [rho * s1 * s0, s0**2]])
    d = mpmath.matrix([y1 - mu1, y0 - mu0])
    q = (d.T * S**-1 * d)[0]
    return float(-mpmath.log(2 * mpmath.pi) - mpmath.log(mpmath.det(S)) / 2 - q / 2)


class TestRngState:
    def test_same_state_same_sequence(self):
        a = RngState(42, 3).generator().standard_normal(1000)
        b = RngState(42, 3).generator().standard_normal(1000)
        assert np.array_equal(a, b)

    def test_streams_differ_and_are_uncorrelated(self):
        a = RngState(42, 0).generator().standard_normal(100_000)
        b = RngState(42, 1).generator().standard_normal(100_000)
        assert not np.array_equal(a, b)
        # |corr| of independent streams ~ N(0, 1/N); 5 sd bound
        assert abs(np.corrcoef(a, b)[0, 1]) < 5 / math.sqrt(a.size)

    def test_pinned_sequence(self):
        # guards the documented generator recipe against silent changes
        u = RngState(0, 0).generator().integers(0, 2**32, size=3, dtype=np.uint64)
        ss = np.random.SeedSequence(0, spawn_key=(0,))
        ref = np.random.Generator(np.random.PCG64(ss)).integers(0, 2**32, size=3, dtype=np.uint64)
        assert np.array_equal(u, ref)

    @pytest.mark.parametrize("bad", [-1, 2**64, 1.5])
    def test_rejects_non_u64(self, bad):
        with pytest.raises(ArgumentError):
            RngState(bad)


class TestNormalSample:
    def test_zero_sd_is_exact(self):
        assert normal_sample(7.0, 0.0, RngState(1)) == 7.0

    def test_negative_sd(self):
        with pytest.raises(ArgumentError):
            normal_sample(0.0, -1.0, RngState(1))

    def test_law_of_large_numbers(self):
        x = normal_sample(0.0, 1.0, RngState(11), size=10**6)
        assert abs(x.mean()) < 5 / math.sqrt(x.size)

    def test_deterministic(self):
        a = normal_sample(0.0, 1.0, RngState(5), size=10)
        b = normal_sample(0.0, 1.0, RngState(5), size=10)
        assert np.array_equal(a, b)


class TestBvnConditional:
    def test_independence_gives_marginal(self):
        p = BvnParams(2.0, 1.0, 1.5, 0.7, 0.0)
        assert bvn_conditional(p, 1, 10.0) == (1.0, 0.7)
        assert bvn_conditional(p, 0, -3.0) == (2.0, 1.5)

    def test_worked_example(self):
        p = BvnParams(2.0, 1.0, 1.0, 1.0, 0.5)
        mean, sd = bvn_conditional(p, 1, 3.0)
        assert mean == pytest.approx(1.5, abs=1e-12)
        assert sd == pytest.approx(math.sqrt(0.75), abs=1e-12)

    def test_worked_example_matches_rejection_oracle(self):
        # draw from the joint, keep y1 in a narrow band around 3
        gen = np.random.default_rng(20251016)
        N, half_width = 4_000_000, 0.02
        z1, z2 = gen.standard_normal(N), gen.standard_normal(N)
        y1 = 2.0 + z1
        y0 = 1.0 + 0.5 * z1 + math.sqrt(0.75) * z2
        kept = y0[np.abs(y1 - 3.0) < half_width]
        se = kept.std() / math.sqrt(kept.size)
        # band bias is at most 0.5 * half_width / 3 on average (symmetric band)
        assert abs(kept.mean() - 1.5) < 4 * se + 0.5 * half_width
        assert abs(kept.std() - math.sqrt(0.75)) < 4 * math.sqrt(0.75) / math.sqrt(2 * kept.size) + 1e-3

    def test_perfect_correlation(self):
        p = BvnParams(2.0, 1.0, 1.3, 1.3, 1.0)
        mean, sd = bvn_conditional(p, 1, 4.0)
        assert mean == pytest.approx(1.0 + (4.0 - 2.0))
        assert sd == 0.0

    def test_zero_observed_sd(self):
        with pytest.raises(ArgumentError):
            bvn_conditional(BvnParams(0.0, 0.0, 0.0, 1.0, 0.3), 1, 1.0)

    def test_vectorized(self):
        p = BvnParams(np.array([1.0, 2.0]), np.array([0.0, 0.5]), 1.0, 2.0, 0.4)
        mean, sd = bvn_conditional(p, np.array([1, 0]), np.array([1.5, 0.0]))
        assert mean.shape == (2,) and sd.shape == (2,)
        m0, _ = bvn_conditional(BvnParams(1.0, 0.0, 1.0, 2.0, 0.4), 1, 1.5)
        m1, _ = bvn_conditional(BvnParams(2.0, 0.5, 1.0, 2.0, 0.4), 0, 0.0)
        assert mean[0] == pytest.approx(m0) and mean[1] == pytest.approx(m1)

    @settings(max_examples=60, deadline=None)
    @given(means, means, scales, scales, rhos, st.sampled_from([0, 1]), st.floats(-8, 8), st.floats(-8, 8))
    def test_joint_factorizes(self, mu1, mu0, s1, s0, rho, arm, y_obs, y_miss):
        p = BvnParams(mu1, mu0, s1, s0, rho)
        mean, sd = bvn_conditional(p, arm, y_obs)
        y1, y0 = (y_obs, y_miss) if arm == 1 else (y_miss, y_obs)
        marginal = normal_logpdf(y_obs, mu1 if arm == 1 else mu0, s1 if arm == 1 else s0)
        assert bvn_logpdf(p, y1, y0) == pytest.approx(marginal + normal_logpdf(y_miss, mean, sd), abs=1e-10)


class TestBvnLogpdf:
    def test_standard_at_origin(self):
        assert bvn_logpdf(BvnParams(0, 0, 1, 1, 0), 0.0, 0.0) == pytest.approx(-math.log(2 * math.pi), abs=1e-15)

    @given(means, means, scales, scales, st.floats(-6, 6), st.floats(-6, 6))
    def test_independence_factorization(self, mu1, mu0, s1, s0, y1, y0):
        p = BvnParams(mu1, mu0, s1, s0, 0.0)
        expected = normal_logpdf(y1, mu1, s1) + normal_logpdf(y0, mu0, s0)
        assert bvn_logpdf(p, y1, y0) == pytest.approx(expected, abs=1e-12)

    def test_against_high_precision_quadratic_form(self):
        gen = np.random.default_rng(3)
        for _ in range(200):
            mu1, mu0, y1, y0 = gen.uniform(-5, 5, 4)
            s1, s0 = gen.uniform(0.2, 3, 2)
            rho = gen.uniform(-0.95, 0.95)
            got = bvn_logpdf(BvnParams(mu1, mu0, s1, s0, rho), y1, y0)
            assert got == pytest.approx(bvn_logpdf_mp(mu1, mu0, s1, s0, rho, y1, y0), abs=1e-12, rel=1e-12)

    @pytest.mark.parametrize("rho", [1.0, -1.0])
    def test_degenerate_rho(self, rho):
        with pytest.raises(ArgumentError):
            bvn_logpdf(BvnParams(0, 0, 1, 1, rho), 0.0, 0.0)

    @settings(max_examples=25, deadline=None)
    @given(means, means, scales, scales, rhos, st.floats(-4, 4))
    def test_marginalizes_to_normal(self, mu1, mu0, s1, s0, rho, y1):
        p = BvnParams(mu1, mu0, s1, s0, rho)
        lo, hi = mu0 - 40 * s0, mu0 + 40 * s0
        val, _ = integrate.quad(lambda y0: math.exp(bvn_logpdf(p, y1, y0)), lo, hi, epsabs=1e-13, epsrel=1e-10, limit=200)
        assert val == pytest.approx(math.exp(normal_logpdf(y1, mu1, s1)), abs=1e-6)


class TestDirichlet:
    def test_single_point(self):
        assert np.array_equal(dirichlet_ones(1, RngState(0)), [1.0])

    def test_normalization_arithmetic(self):
        assert np.array_equal(simplex_from_exponentials([1.0, 1.0, 2.0]), [0.25, 0.25, 0.5])

    def test_zero_n(self):
        with pytest.raises(ArgumentError):
            dirichlet_ones(0, RngState(0))

    def test_marginal_mean(self):
        w = dirichlet_ones(50, RngState(4), size=10**5)
        # Dirichlet(1) marginal: mean 1/n, variance (n-1)/(n^2 (n+1))
        se = math.sqrt(49 / (2500 * 51) / 10**5)
        assert np.all(np.abs(w.mean(axis=0) - 1 / 50) < 5 * se)

    @pytest.mark.parametrize("n", [1, 2, 7, 100, 10_000])
    def test_on_simplex(self, n):
        w = dirichlet_ones(n, RngState(n))
        assert np.all(w >= 0)
        assert abs(w.sum() - 1.0) < 1e-12


class TestBernoulliExpit:
    def test_expit_matches_independent_value(self):
        mpmath.mp.dps = 30
        assert expit(1.0) == pytest.approx(float(1 / (1 + mpmath.e ** -1)), abs=1e-15)

    @pytest.mark.parametrize("x", [-800.0, -40.0, 0.0, 40.0, 800.0])
    def test_expit_stable(self, x):
        v = expit(x)
        assert 0.0 <= v <= 1.0 and math.isfinite(v)
        assert expit(-x) == pytest.approx(1 - v, abs=1e-15)

    def test_saturation(self):
        assert np.all(bernoulli_expit(np.full(1000, math.inf), RngState(0)) == 1)
        assert np.all(bernoulli_expit(np.full(1000, 40.0), RngState(0)) == 1)

    def test_symmetry(self):
        x = bernoulli_expit(np.zeros(10**6), RngState(8))
        assert abs(x.mean() - 0.5) < 5 * 0.5 / 1000

    def test_linear_one(self):
        p = 0.7310585786300049
        x = bernoulli_expit(np.ones(10**6), RngState(9))
        assert abs(x.mean() - p) < 5 * math.sqrt(p * (1 - p) / 10**6)

    def test_scalar_returns_int(self):
        assert bernoulli_expit(0.3, RngState(0)) in (0, 1)
