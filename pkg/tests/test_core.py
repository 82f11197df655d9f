"""Unit tests for instance generation, centering, and verification."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lweforge.core import (
    LweParams,
    centered,
    centered_vec,
    gen_instance,
    matvec_mod,
    retarget,
    sample_error,
    sample_secret,
    uniform_std,
    verify_secret,
)


def binom_pmf(k, trials):
    return math.comb(trials, k) / 2.0**trials


class TestCentered:
    def test_boundaries_q241(self):
        assert centered(0, 241) == 0
        assert centered(240, 241) == -1
        assert centered(120, 241) == 120
        assert centered(121, 241) == -120

    def test_exhaustive_small_q(self):
        for q in (3, 5, 241, 1031):
            for x in range(q):
                r = centered(x, q)
                assert (r - x) % q == 0
                assert -q / 2 < r <= q / 2

    @given(st.integers(min_value=0, max_value=10**12))
    def test_vector_matches_scalar(self, x):
        q = 4099
        assert centered_vec(np.array([x % q], dtype=np.int64), q)[0] == centered(x % q, q)


class TestParams:
    def test_rejects_composite_q(self):
        with pytest.raises(ValueError):
            LweParams(n=16, q=1024)

    def test_rejects_overweight_secret(self):
        with pytest.raises(ValueError):
            LweParams(n=8, q=241, hamming_weight=9)

    def test_from_logq_picks_next_prime(self):
        assert LweParams.from_logq(16, 10).q == 1031
        assert LweParams.from_logq(16, 12).q == 4099

    def test_support_sets(self):
        assert LweParams(n=4, q=241).secret_support() == (0, 1)
        assert LweParams(n=4, q=241, secret_dist="ternary").secret_support() == (-1, 0, 1)
        assert LweParams(n=4, q=241, secret_dist="binomial", eta=2).secret_support() == (
            -2, -1, 0, 1, 2,
        )


class TestSampling:
    def test_binary_fixed_weight(self):
        params = LweParams(n=8, q=241, hamming_weight=3)
        rng = np.random.default_rng(0)
        for _ in range(20):
            s = sample_secret(params, rng)
            assert np.count_nonzero(s) == 3
            assert set(np.unique(s)) <= {0, 1}

    def test_ternary_weight_zero_is_zero_vector(self):
        params = LweParams(n=8, q=241, secret_dist="ternary", hamming_weight=0)
        s = sample_secret(params, np.random.default_rng(1))
        assert not np.any(s)

    def test_binomial_secret_matches_pmf(self):
        # eta=3 secret coordinates follow Binomial(6, 1/2) - 3
        params = LweParams(n=10**6, q=241, secret_dist="binomial", eta=3)
        s = sample_secret(params, np.random.default_rng(0xC0))
        n = params.n
        for v in range(-3, 4):
            p = binom_pmf(v + 3, 6)
            count = int(np.sum(s == v))
            slack = 4 * math.sqrt(n * p * (1 - p))
            assert abs(count - n * p) < slack, f"value {v}: {count} vs {n * p:.0f}"

    def test_binomial_error_support_bounds(self):
        params = LweParams(n=4, q=241, error_dist="binomial", eta=3)
        e = sample_error(params, 10000, np.random.default_rng(2))
        assert e.min() >= -3 and e.max() <= 3

    def test_gaussian_std_within_one_percent(self):
        params = LweParams(n=4, q=1031, sigma=3.2)
        e = sample_error(params, 10**6, np.random.default_rng(3))
        assert abs(np.std(e) - 3.2) / 3.2 < 0.01

    def test_tiny_sigma_rounds_to_zero(self):
        params = LweParams(n=4, q=1031, sigma=1e-9)
        e = sample_error(params, 1000, np.random.default_rng(4))
        assert not np.any(e)


class TestGenInstance:
    def test_zero_weight_secret_gives_pure_error(self):
        params = LweParams(n=16, q=1031, hamming_weight=0)
        inst = gen_instance(params, seed=5)
        assert np.array_equal(inst.b, inst.e % params.q)

    def test_tiny_sigma_gives_exact_As(self):
        params = LweParams(n=16, q=1031, sigma=1e-9)
        inst = gen_instance(params, seed=6)
        assert np.array_equal(inst.b, matvec_mod(inst.A, inst.s, params.q))

    def test_deterministic_given_seed(self):
        params = LweParams(n=16, q=1031)
        a = gen_instance(params, seed=7)
        b = gen_instance(params, seed=7)
        assert np.array_equal(a.A, b.A)
        assert np.array_equal(a.b, b.b)
        assert np.array_equal(a.s, b.s)

    def test_congruence_exact(self):
        params = LweParams(n=24, q=4099, secret_dist="ternary")
        inst = gen_instance(params, seed=8)
        inst.validate()
        # independent recomputation with Python bigints
        for i in range(0, params.pool_size, 17):
            acc = sum(int(a) * int(s) for a, s in zip(inst.A[i], inst.s)) + int(inst.e[i])
            assert acc % params.q == int(inst.b[i])

    def test_pool_is_4n(self):
        params = LweParams(n=16, q=1031)
        inst = gen_instance(params, seed=9)
        assert inst.A.shape == (64, 16)

    def test_retarget_keeps_pool_changes_secret(self):
        params = LweParams(n=16, q=1031, hamming_weight=2)
        inst = gen_instance(params, seed=10)
        new = retarget(inst, seed=11)
        assert new.A is inst.A
        assert not np.array_equal(new.s, inst.s) or not np.array_equal(new.e, inst.e)
        new.validate()

    def test_retarget_with_explicit_secret(self):
        params = LweParams(n=16, q=1031)
        inst = gen_instance(params, seed=12)
        s = np.zeros(16, dtype=np.int64)
        s[3] = 1
        new = retarget(inst, seed=13, s=s)
        assert np.array_equal(new.s, s)
        new.validate()


class TestVerify:
    def test_planted_secret_accepted_residual_is_error_std(self):
        params = LweParams(n=64, q=1031)
        inst = gen_instance(params, seed=20)
        res = verify_secret(inst.A, inst.b, inst.s, params)
        assert res.accepted
        assert res.residual_std == pytest.approx(float(np.std(inst.e)), abs=1e-12)

    def test_wrong_candidate_near_uniform(self):
        params = LweParams(n=64, q=2**20 + 7)  # 1048583 is prime
        inst = gen_instance(params, seed=21)
        rng = np.random.default_rng(22)
        wrong = rng.integers(0, params.q, size=64, dtype=np.int64)
        res = verify_secret(inst.A, inst.b, wrong, params)
        assert not res.accepted
        assert abs(res.residual_std - uniform_std(params.q)) / uniform_std(params.q) < 0.1

    def test_single_flipped_coordinate_rejected(self):
        params = LweParams(n=64, q=1031)
        inst = gen_instance(params, seed=23)
        cand = inst.s.copy()
        cand[0] ^= 1
        assert not verify_secret(inst.A, inst.b, cand, params).accepted

    def test_dimension_mismatch_raises(self):
        params = LweParams(n=64, q=1031)
        inst = gen_instance(params, seed=24)
        with pytest.raises(ValueError):
            verify_secret(inst.A, inst.b, np.zeros(63, dtype=np.int64), params)

    def test_planted_accepts_across_seeds(self):
        params = LweParams(n=32, q=1031)
        for seed in range(40):
            inst = gen_instance(params, seed=seed)
            assert verify_secret(inst.A, inst.b, inst.s, params).accepted

    def test_uniform_rejection_ratio_band(self):
        params = LweParams(n=32, q=4099)
        u = uniform_std(params.q)
        rng = np.random.default_rng(25)
        for seed in range(10):
            inst = gen_instance(params, seed=seed)
            wrong = rng.integers(0, params.q, size=32, dtype=np.int64)
            res = verify_secret(inst.A, inst.b, wrong, params)
            assert 0.9 <= res.residual_std / u <= 1.1


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(min_value=0, max_value=2**32 - 1))
def test_congruence_property(seed):
    params = LweParams(n=12, q=241)
    inst = gen_instance(params, seed=seed)
    lhs = (matvec_mod(inst.A, inst.s, params.q) + inst.e - inst.b) % params.q
    assert not np.any(lhs)
