import numpy as np
import pytest

from tcr import data
from tcr.errors import ConfigError, ContractError, ParseError, ShapeError
from tcr.model import (LrSchedule, backward, forward, init_optimizer,
                       init_params, load_checkpoint, lr_at, save_checkpoint,
                       sgd_step)
from tcr.numerics import cross_entropy, one_hot, softmax

from conftest import assert_grad_close, fd_grad


class TestInitParams:
    def test_deterministic(self):
        a = init_params([2, 8, 3], seed=42)
        b = init_params([2, 8, 3], seed=42)
        for wa, wb in zip(a.weights, b.weights):
            assert np.array_equal(wa, wb)

    def test_shapes(self):
        p = init_params([2, 8, 3], seed=0)
        assert p.weights[0].shape == (8, 2)
        assert p.weights[1].shape == (3, 8)
        assert p.biases[0].shape == (8,)
        assert p.biases[1].shape == (3,)

    def test_biases_zero(self):
        p = init_params([4, 16, 2], seed=1)
        assert all(np.all(b == 0) for b in p.biases)

    def test_weight_distribution(self):
        # 100x100 He-init matrix: sample mean within 4 standard errors of 0
        p = init_params([100, 100, 2], seed=9)
        w = p.weights[0]
        scale = np.sqrt(2.0 / 100)
        se = scale / np.sqrt(w.size)
        assert abs(w.mean()) < 4 * se
        assert abs(w.std() - scale) < 0.05 * scale

    def test_invalid_dims(self):
        with pytest.raises(ConfigError):
            init_params([5], seed=0)
        with pytest.raises(ConfigError):
            init_params([2, 0, 3], seed=0)


class TestForward:
    def test_zero_params_zero_logits(self):
        p = init_params([2, 4, 3], seed=0)
        for w in p.weights:
            w[:] = 0
        logits, _ = forward(p, np.array([1.0, -2.0]))
        assert np.array_equal(logits, np.zeros(3))

    def test_single_linear_layer(self, rng):
        p = init_params([3, 2], seed=0)
        x = rng.normal(size=3)
        logits, _ = forward(p, x)
        assert np.allclose(logits, p.weights[0] @ x + p.biases[0], atol=1e-15)

    def test_matches_straight_line_reimplementation(self, rng):
        p = init_params([4, 7, 5, 3], seed=3)
        x = rng.normal(size=4)
        logits, _ = forward(p, x)
        # independent duplicate evaluation
        a = x
        for i in range(2):
            a = np.maximum(p.weights[i] @ a + p.biases[i], 0.0)
        want = p.weights[2] @ a + p.biases[2]
        assert np.max(np.abs(logits - want)) < 1e-12

    def test_batch_matches_per_sample(self, rng):
        p = init_params([3, 6, 2], seed=5)
        X = rng.normal(size=(10, 3))
        batch_logits, _ = forward(p, X)
        for i in range(10):
            single, _ = forward(p, X[i])
            assert np.allclose(batch_logits[i], single, atol=1e-12)

    def test_dim_mismatch(self):
        p = init_params([3, 2], seed=0)
        with pytest.raises(ShapeError):
            forward(p, np.zeros(4))


class TestBackward:
    def test_zero_grad_in_zero_grad_out(self, rng):
        p = init_params([2, 5, 3], seed=0)
        _, cache = forward(p, rng.normal(size=2))
        gw, gb = backward(p, cache, np.zeros(3))
        assert all(np.all(g == 0) for g in gw + gb)

    def test_linearity(self, rng):
        p = init_params([2, 5, 3], seed=0)
        _, cache = forward(p, rng.normal(size=2))
        g1, g2 = rng.normal(size=3), rng.normal(size=3)
        a_w, a_b = backward(p, cache, g1)
        b_w, b_b = backward(p, cache, g2)
        s_w, s_b = backward(p, cache, g1 + g2)
        for ab, bb, sb in zip(a_w + a_b, b_w + b_b, s_w + s_b):
            assert np.max(np.abs(ab + bb - sb)) < 1e-10

    def test_stale_cache_rejected(self, rng):
        p = init_params([2, 5, 3], seed=0)
        opt = init_optimizer(p)
        _, cache = forward(p, rng.normal(size=2))
        gw = [np.ones_like(w) for w in p.weights]
        gb = [np.ones_like(b) for b in p.biases]
        sgd_step(p, opt, (gw, gb))
        with pytest.raises(ContractError):
            backward(p, cache, np.zeros(3))

    @pytest.mark.parametrize("trial", range(20))
    def test_parameter_gradients_vs_finite_differences(self, trial):
        rng = np.random.default_rng(1000 + trial)
        dims = [2, 8, 3]
        p = init_params(dims, seed=trial)
        x = rng.normal(size=2)
        target = rng.dirichlet(np.ones(3))

        def loss_at(params):
            logits, _ = forward(params, x)
            return cross_entropy(target, softmax(logits))

        logits, cache = forward(p, x)
        grad_h = softmax(logits) - target
        gw, gb = backward(p, cache, grad_h)

        step = 1e-4
        for li in range(2):
            for arr, grad in ((p.weights[li], gw[li]),
                              (p.biases[li], gb[li])):
                flat = arr.ravel()
                for j in range(flat.size):
                    orig = flat[j]
                    flat[j] = orig + step
                    p.version += 1
                    up = loss_at(p)
                    flat[j] = orig - step
                    p.version += 1
                    down = loss_at(p)
                    flat[j] = orig
                    p.version += 1
                    numeric = (up - down) / (2 * step)
                    assert_grad_close(grad.ravel()[j], numeric)


class TestSgdStep:
    def test_plain_step(self, rng):
        p = init_params([2, 3], seed=0)
        opt = init_optimizer(p, momentum=0.0, weight_decay=0.0, lr=0.5)
        w0 = p.weights[0].copy()
        g = rng.normal(size=p.weights[0].shape)
        sgd_step(p, opt, ([g], [np.zeros(3)]))
        assert np.allclose(p.weights[0], w0 - 0.5 * g, atol=1e-15)

    def test_zero_grads_no_change(self):
        p = init_params([2, 3], seed=0)
        opt = init_optimizer(p, momentum=0.9, weight_decay=0.0, lr=0.1)
        w0 = p.weights[0].copy()
        sgd_step(p, opt, ([np.zeros((3, 2))], [np.zeros(3)]))
        assert np.array_equal(p.weights[0], w0)

    def test_momentum_recurrence(self):
        # two steps on a constant gradient: buffers follow the scalar
        # recursion b1 = g, b2 = m*g + g; displacement lr*(b1 + b2)
        p = init_params([1, 1], seed=0)
        opt = init_optimizer(p, momentum=0.9, weight_decay=0.0, lr=0.01)
        w0 = float(p.weights[0][0, 0])
        g = 2.0
        grads = ([np.array([[g]])], [np.zeros(1)])
        sgd_step(p, opt, grads)
        sgd_step(p, opt, grads)
        # independent scalar recursion
        b, w = 0.0, w0
        for _ in range(2):
            b = 0.9 * b + g
            w -= 0.01 * b
        assert abs(float(p.weights[0][0, 0]) - w) < 1e-15
        assert abs((w0 - w) - 0.01 * g * (1 + 1.9)) < 1e-15

    def test_weight_decay_skips_biases(self):
        p = init_params([2, 3], seed=0)
        p.biases[0][:] = 1.0
        opt = init_optimizer(p, momentum=0.0, weight_decay=0.1, lr=0.1)
        sgd_step(p, opt, ([np.zeros((3, 2))], [np.zeros(3)]))
        assert np.array_equal(p.biases[0], np.ones(3))

    def test_shape_mismatch(self):
        p = init_params([2, 3], seed=0)
        opt = init_optimizer(p)
        with pytest.raises(ShapeError):
            sgd_step(p, opt, ([np.zeros((2, 2))], [np.zeros(3)]))


class TestLrSchedule:
    def test_two_step_decay_schedule(self):
        s = LrSchedule(initial=0.1, milestones=[(80, 10.0), (120, 10.0)])
        assert lr_at(s, 1) == 0.1
        assert lr_at(s, 80) == 0.1
        assert lr_at(s, 81) == pytest.approx(0.01)
        assert lr_at(s, 121) == pytest.approx(0.001)

    def test_constant_without_milestones(self):
        s = LrSchedule(initial=0.05)
        assert lr_at(s, 1) == lr_at(s, 1000) == 0.05

    def test_milestones_must_increase(self):
        with pytest.raises(ConfigError):
            LrSchedule(initial=0.1, milestones=[(80, 10.0), (80, 10.0)])


class TestDescentSanity:
    def test_full_batch_ce_reaches_perfect_accuracy(self):
        blobs = data.gaussian_blobs(2, 50, 2, spread=0.2, seed=4)
        X, y = blobs.features, blobs.labels
        p = init_params([2, 16, 2], seed=0)
        opt = init_optimizer(p, momentum=0.9, weight_decay=0.0, lr=0.05)
        Y = np.eye(2)[y]
        for _ in range(200):
            logits, cache = forward(p, X)
            z = logits - logits.max(axis=1, keepdims=True)
            F = np.exp(z) / np.exp(z).sum(axis=1, keepdims=True)
            sgd_step(p, opt, backward(p, cache, (F - Y) / len(X)))
        logits, _ = forward(p, X)
        assert (logits.argmax(axis=1) == y).mean() == 1.0


class TestCheckpoint:
    def test_round_trip(self, tmp_path):
        p = init_params([2, 8, 3], seed=11)
        path = tmp_path / "ckpt.bin"
        save_checkpoint(path, p)
        q = load_checkpoint(path)
        assert q.dims == p.dims
        for a, b in zip(p.weights + p.biases, q.weights + q.biases):
            assert np.array_equal(a, b)

    def test_truncated_file(self, tmp_path):
        p = init_params([2, 8, 3], seed=11)
        path = tmp_path / "ckpt.bin"
        save_checkpoint(path, p)
        raw = path.read_bytes()
        path.write_bytes(raw[:-16])
        with pytest.raises(ParseError):
            load_checkpoint(path)

    def test_garbage_file(self, tmp_path):
        path = tmp_path / "ckpt.bin"
        path.write_bytes(b"\x01")
        with pytest.raises(ParseError):
            load_checkpoint(path)
