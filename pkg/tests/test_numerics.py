import mpmath
import numpy as np
import pytest

from tcr.errors import ConfigError, InvalidInputError, ShapeError
from tcr.numerics import (cross_entropy, one_hot, softmax, softmax_rows,
                          squeeze, squeeze_rows)

from conftest import random_simplex


def mp_softmax(values, dps=50):
    """Arbitrary-precision softmax oracle."""
    with mpmath.workdps(dps):
        exps = [mpmath.e ** mpmath.mpf(v) for v in values]
        total = sum(exps)
        return np.array([float(e / total) for e in exps])


class TestSoftmax:
    def test_symmetry(self):
        assert np.allclose(softmax([0, 0, 0]), [1 / 3] * 3, atol=1e-15)

    def test_shift_invariance_exact(self):
        a = softmax([1.0, 2.0, 3.0])
        b = softmax([101.0, 102.0, 103.0])
        assert np.array_equal(a, b)

    def test_against_high_precision_oracle(self):
        got = softmax([1.0, 2.0, 3.0])
        want = mp_softmax([1.0, 2.0, 3.0])
        assert np.max(np.abs(got - want)) < 1e-12

    def test_overflow_safety(self):
        p = softmax([1000.0, 999.0, 0.0])
        assert np.all(np.isfinite(p))
        assert abs(p.sum() - 1.0) < 1e-9

    def test_rejects_non_finite(self):
        with pytest.raises(InvalidInputError):
            softmax([np.inf, 0.0])
        with pytest.raises(InvalidInputError):
            softmax([np.nan, 0.0])

    def test_random_logits_land_on_simplex(self, rng):
        for _ in range(200):
            p = softmax(rng.normal(scale=10, size=rng.integers(2, 12)))
            assert abs(p.sum() - 1.0) < 1e-9
            assert np.all(p > 0)


class TestSqueeze:
    def test_identity_exponent(self, rng):
        for _ in range(50):
            p = random_simplex(rng, 5)
            assert np.array_equal(squeeze(p, 1), p)

    def test_one_hot_fixed_point(self):
        for gamma in [1, 2, 7.5, 64]:
            for k in range(4):
                e = one_hot(k, 4)
                assert np.array_equal(squeeze(e, gamma), e)

    def test_worked_example(self):
        got = squeeze([0.6, 0.3, 0.1], 2)
        want = np.array([0.36, 0.09, 0.01]) / 0.46
        assert np.max(np.abs(got - want)) < 1e-12

    def test_rejects_gamma_below_one(self):
        with pytest.raises(ConfigError):
            squeeze([0.5, 0.5], 0.9)

    def test_argmax_preserved(self, rng):
        for _ in range(1000):
            p = random_simplex(rng, rng.integers(2, 10))
            gamma = rng.uniform(1, 20)
            assert np.argmax(squeeze(p, gamma)) == np.argmax(p)

    def test_power_composition(self, rng):
        for _ in range(1000):
            p = random_simplex(rng, 6)
            g1, g2 = rng.uniform(1, 4, size=2)
            lhs = squeeze(squeeze(p, g1), g2)
            rhs = squeeze(p, g1 * g2)
            assert np.max(np.abs(lhs - rhs)) < 1e-9

    def test_confidence_never_decreases(self, rng):
        for _ in range(1000):
            p = random_simplex(rng, 5)
            gamma = rng.uniform(1, 10)
            assert squeeze(p, gamma).max() >= p.max() - 1e-12

    def test_large_gamma_approaches_one_hot(self, rng):
        # error is controlled by the ratio of the runner-up to the winner:
        # each non-max coordinate shrinks at least like (p2/p1)^gamma
        for _ in range(1000):
            p = random_simplex(rng, 5)
            target = one_hot(int(np.argmax(p)), 5)
            ratio = np.sort(p)[-2] / p.max()
            bound = max(4 * ratio ** 64, 1e-12)
            assert np.max(np.abs(squeeze(p, 64) - target)) < bound

    def test_rows_variant_matches_scalar(self, rng):
        P = np.stack([random_simplex(rng, 4) for _ in range(20)])
        R = squeeze_rows(P, 3.5)
        for i in range(20):
            assert np.allclose(R[i], squeeze(P[i], 3.5), atol=1e-12)

    def test_rows_with_exact_zeros(self):
        P = np.array([[0.0, 0.4, 0.6], [1.0, 0.0, 0.0]])
        R = squeeze_rows(P, 2.0)
        assert R[0, 0] == 0.0
        assert np.array_equal(R[1], [1.0, 0.0, 0.0])


class TestCrossEntropy:
    def test_uniform_self_entropy(self):
        u = np.full(4, 0.25)
        assert abs(cross_entropy(u, u) - np.log(4)) < 1e-12

    def test_one_hot_target(self, rng):
        p = random_simplex(rng, 5)
        for k in range(5):
            assert abs(cross_entropy(one_hot(k, 5), p) + np.log(p[k])) < 1e-12

    def test_against_high_precision_oracle(self):
        target = [0.55, 0.27, 0.18]
        pred = softmax([1.0, 2.0, 3.0])
        with mpmath.workdps(50):
            exps = [mpmath.e ** mpmath.mpf(v) for v in [1, 2, 3]]
            total = sum(exps)
            want = -sum(mpmath.mpf(t) * mpmath.log(e / total)
                        for t, e in zip(target, exps))
        assert abs(cross_entropy(target, pred) - float(want)) < 1e-10

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            cross_entropy([0.5, 0.5], [0.3, 0.3, 0.4])

    def test_zero_pred_is_finite(self):
        assert np.isfinite(cross_entropy([1.0, 0.0], [0.0, 1.0]))

    def test_gibbs_inequality(self, rng):
        for _ in range(500):
            c = rng.integers(2, 8)
            t, p = random_simplex(rng, c), random_simplex(rng, c)
            assert cross_entropy(t, p) >= cross_entropy(t, t) - 1e-9

    def test_non_negative_for_simplex_inputs(self, rng):
        for _ in range(200):
            t, p = random_simplex(rng, 4), random_simplex(rng, 4)
            assert cross_entropy(t, p) >= 0.0
