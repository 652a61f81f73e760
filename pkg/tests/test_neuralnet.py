import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from deepgraph import _kernels
from deepgraph.errors import TrainingDivergedError
from deepgraph.neuralnet import (AdamState, Architecture, McMrConvModel, MrConvLayer, TrainConfig, adam_step,
                                 check_gradients, load_checkpoint, model_forward, mrconv_forward,
                                 save_checkpoint, train)
from deepgraph.neuralnet.layers import mrconv_backward_batch, mrconv_forward_batch, mrconv_forward_im2col

TINY = Architecture(n_bins=6, n_steps=4, filter_sizes=(2, 3), conv_filters=(3, 2), dense_sizes=(5, 4))


def _model(arch=TINY, seed=0, scale=1.0):
    m = McMrConvModel.init(arch, np.random.default_rng(seed))
    for k, v in m.params.items():
        v += np.random.default_rng(seed + 1).normal(0, 0.1 * scale, v.shape)
    return m


class TestMrConv:
    def test_zero(self):
        layer = MrConvLayer((2, 3), [np.zeros((2 * 4, 5)), np.zeros((3 * 4, 5))], [np.zeros(5), np.zeros(5)])
        assert np.array_equal(mrconv_forward(np.zeros((6, 4)), layer), np.zeros((5 + 4, 5)))

    def test_hand_example(self):
        layer = MrConvLayer((2,), [np.array([[0.5], [0.5]])], [np.zeros(1)])
        out = mrconv_forward(np.array([[1.0], [2.0], [3.0]]), layer)
        assert np.allclose(out[:, 0], [math.tanh(1.5), math.tanh(2.5)], atol=1e-15)
        assert np.round(out[:, 0], 6).tolist() == [0.905148, 0.986614]

    def test_shape(self):
        rng = np.random.default_rng(0)
        layer = MrConvLayer((1, 2), [rng.normal(size=(1 * 5, 3)), rng.normal(size=(2 * 5, 3))], [np.zeros(3)] * 2)
        assert mrconv_forward(rng.normal(size=(4, 5)), layer).shape == (7, 3)

    def test_too_short(self):
        layer = MrConvLayer((4,), [np.zeros((4, 1))], [np.zeros(1)])
        with pytest.raises(ValueError):
            mrconv_forward(np.zeros((3, 1)), layer)

    @given(st.integers(1, 4), st.integers(6, 12), st.integers(1, 5), st.integers(1, 4),
           st.lists(st.integers(1, 6), min_size=1, max_size=3, unique=True), st.integers(0, 2 ** 32 - 1))
    def test_matches_im2col(self, B, n, k, d, sizes, seed):
        rng = np.random.default_rng(seed)
        x = rng.normal(size=(B, n, k))
        Ws = [rng.normal(size=(m * k, d)) for m in sizes]
        bs = [rng.normal(size=d) for _ in sizes]
        out, _ = mrconv_forward_batch(x, Ws, bs, tuple(sizes))
        assert out.shape == (B, sum(n - m + 1 for m in sizes), d)
        assert np.allclose(out, mrconv_forward_im2col(x, Ws, bs, tuple(sizes)), atol=1e-13)

    def test_backward_against_finite_differences(self):
        rng = np.random.default_rng(1)
        sizes = (1, 3, 2)
        x = rng.normal(size=(2, 6, 3))
        Ws = [rng.normal(size=(m * 3, 2)) * 0.5 for m in sizes]
        bs = [rng.normal(size=2) for _ in sizes]
        out, cache = mrconv_forward_batch(x, Ws, bs, sizes)
        G = rng.normal(size=out.shape)
        dx, dWs, dbs = mrconv_backward_batch(G, cache, Ws, sizes)

        def f():
            return float(np.sum(mrconv_forward_im2col(x, Ws, bs, sizes) * G))

        for arr, grad in [(x, dx)] + list(zip(Ws, dWs)) + list(zip(bs, dbs)):
            num = np.zeros_like(arr)
            it = np.nditer(arr, flags=["multi_index"])
            for _ in it:
                i = it.multi_index
                old = arr[i]
                arr[i] = old + 1e-6
                fp = f()
                arr[i] = old - 1e-6
                fm = f()
                arr[i] = old
                num[i] = (fp - fm) / 2e-6
            assert np.abs(num - grad).max() < 1e-7


class TestModel:
    def test_param_names_and_order(self):
        names = list(Architecture().param_shapes())
        assert names[0] == "bins.conv0.m2.W" and names[-1] == "out.b"
        assert Architecture().param_shapes()["dense1.W"] == (2 * 540 * 16, 256)

    def test_invalid_architecture(self):
        with pytest.raises(ValueError):
            Architecture(n_bins=4, n_steps=4, filter_sizes=(5,))
        with pytest.raises(ValueError):
            Architecture(columns=("rows",))
        with pytest.raises(ValueError):
            Architecture(dropout=1.0)

    def test_zero_params_zero_output(self):
        m = McMrConvModel.zeros(TINY)
        X = np.random.default_rng(0).normal(size=(3, 6, 4))
        y, _ = m.forward(X, train=True, rng=np.random.default_rng(1))
        assert np.array_equal(y, np.zeros(3))
        _, _, grads, _ = m.loss_and_grad(np.zeros((2, 6, 4)), np.zeros(2), 0.1, train=False)
        assert all(np.array_equal(g, np.zeros_like(g)) for g in grads.values())

    def test_eval_deterministic(self):
        m = _model()
        X = np.random.default_rng(0).normal(size=(6, 4))
        a, _ = model_forward(X, m, "eval")
        b, _ = model_forward(X, m, "eval")
        assert a == b

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            model_forward(np.zeros((4, 6)), _model(), "eval")

    def test_dropout_expectation(self):
        # dropout only before the final linear unit: E_mask[train output] == eval output
        arch = Architecture(n_bins=6, n_steps=4, filter_sizes=(2,), conv_filters=(2,), dense_sizes=(8,))
        m = _model(arch, seed=3, scale=5.0)
        X = np.random.default_rng(4).normal(size=(1, 6, 4))
        ev = m.predict(X)[0]
        rng = np.random.default_rng(5)
        draws = np.array([m.forward(X, train=True, rng=rng)[0][0] for _ in range(10_000)])
        se = draws.std(ddof=1) / math.sqrt(len(draws))
        assert abs(draws.mean() - ev) <= 3 * se

    def test_loss_examples(self):
        m = McMrConvModel.zeros(TINY)
        m.params["out.b"][:] = 3.0
        X = np.zeros((1, 6, 4))
        assert m.loss(X, np.array([1.0]), 0.0) == pytest.approx(4.0)
        assert m.loss(X, np.array([3.0]), 0.0) == 0.0
        r = _model()
        direct = sum(float(np.sum(v ** 2)) for k, v in r.params.items() if k.endswith(".W"))
        X = np.random.default_rng(0).normal(size=(4, 6, 4))
        y = np.zeros(4)
        assert r.loss(X, y, 0.01) - r.loss(X, y, 0.0) == pytest.approx(0.01 * direct, rel=1e-12)

    def test_l2_gradient_exact(self):
        m = _model()
        X = np.random.default_rng(0).normal(size=(3, 6, 4))
        y = np.ones(3)
        _, _, g0, _ = m.loss_and_grad(X, y, 0.0, train=False)
        _, _, g1, _ = m.loss_and_grad(X, y, 0.3, train=False)
        for k in g0:
            expected = 2 * 0.3 * m.params[k] if k.endswith(".W") else 0.0
            assert np.allclose(g1[k] - g0[k], expected, atol=1e-14)

    def test_duplicate_batch_same_gradient(self):
        m = _model()
        X = np.random.default_rng(2).normal(size=(3, 6, 4))
        y = np.array([0.5, -1.0, 2.0])
        _, _, g1, _ = m.loss_and_grad(X, y, 1e-3, train=False)
        _, _, g2, _ = m.loss_and_grad(np.concatenate([X, X]), np.concatenate([y, y]), 1e-3, train=False)
        for k in g1:
            assert np.allclose(g1[k], g2[k], atol=1e-13)

    @pytest.mark.parametrize("arch", [
        TINY,
        Architecture(n_bins=7, n_steps=5, filter_sizes=(1, 3, 2), conv_filters=(3, 2), dense_sizes=(5,)),
        Architecture(n_bins=6, n_steps=4, columns=(), filter_sizes=(), dense_sizes=(5, 3)),
        Architecture(n_bins=6, n_steps=4, columns=("bins",), filter_sizes=(3,), conv_filters=(2, 2)),
    ])
    def test_gradient_check(self, arch):
        report = check_gradients(arch, seed=1)
        assert report.passed(1e-4), report.per_group

    def test_full_batch_descent(self):
        m = _model(Architecture(n_bins=6, n_steps=4, filter_sizes=(2,), conv_filters=(2,), dense_sizes=(4,),
                                dropout=0.0))
        rng = np.random.default_rng(0)
        X, y = rng.normal(size=(8, 6, 4)), rng.normal(size=8)
        losses = []
        for _ in range(100):
            loss, _, grads, _ = m.loss_and_grad(X, y, 1e-4, train=False)
            losses.append(loss)
            for k in m.params:
                m.params[k] -= 1e-3 * grads[k]
        assert all(b <= a + 1e-15 for a, b in zip(losses, losses[1:]))


class TestAdam:
    def test_zero_gradient(self):
        p = {"w": np.array([1.0, -2.0])}
        st_ = AdamState.create(p, 0.01)
        adam_step(st_, p, {"w": np.zeros(2)})
        assert p["w"].tolist() == [1.0, -2.0]

    def test_first_step(self):
        p = {"w": np.array([0.0])}
        adam_step(AdamState.create(p, 0.001), p, {"w": np.array([1.0])})
        assert p["w"][0] == pytest.approx(-0.001 / (1 + 1e-8), rel=1e-12)

    def test_symmetry(self):
        p = {"a": np.array([0.3]), "b": np.array([0.3])}
        adam_step(AdamState.create(p, 0.01), p, {"a": np.array([0.7]), "b": np.array([0.7])})
        assert p["a"][0] == p["b"][0]

    def test_reference_recurrence(self):
        rng = np.random.default_rng(0)
        w = rng.normal(size=5)
        p = {"w": w.copy()}
        s = AdamState.create(p, 0.01)
        m = v = np.zeros(5)
        for t in range(1, 6):
            g = rng.normal(size=5)
            adam_step(s, p, {"w": g})
            m = 0.9 * m + 0.1 * g
            v = 0.999 * v + 0.001 * g * g
            w = w - 0.01 * (m / (1 - 0.9 ** t)) / (np.sqrt(v / (1 - 0.999 ** t)) + 1e-8)
        assert np.allclose(p["w"], w, atol=1e-14)

    def test_backends_agree(self):
        if _kernels.native is None:
            pytest.skip("native extension not built")
        rng = np.random.default_rng(1)
        arrs = [rng.normal(size=100) for _ in range(2)] + [np.abs(rng.normal(size=100)) for _ in range(2)]
        a = [x.copy() for x in arrs]
        b = [x.copy() for x in arrs]
        _kernels.native.adam_update(a[0], a[1], a[2], a[3], 0.01, 0.9, 0.999, 1e-8, 0.19, 0.002)
        _kernels.fallback.adam_update(b[0], b[1], b[2], b[3], 0.01, 0.9, 0.999, 1e-8, 0.19, 0.002)
        for x, y in zip(a, b):
            assert np.allclose(x, y, rtol=1e-14, atol=1e-16)


def _toy_data(seed, n, arch=TINY):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, arch.n_bins, arch.n_steps))
    y = X[:, 1, :].sum(axis=1) * 0.5
    return X, y


class TestTraining:
    def test_constant_labels(self):
        X, _ = _toy_data(0, 40)
        y = np.full(40, 2.5)
        res = train(X, y, X[:8], y[:8], TINY, TrainConfig(learning_rate=0.01, max_epochs=30, batch_size=8))
        assert res.history[-1][1] <= np.var(y) + 1e-12 or res.best_val_mse < 0.05

    def test_seeded_history_identical(self):
        X, y = _toy_data(1, 48)
        cfg = TrainConfig(learning_rate=0.01, max_epochs=4, batch_size=16, seed=7)
        a = train(X[:40], y[:40], X[40:], y[40:], TINY, cfg)
        b = train(X[:40], y[:40], X[40:], y[40:], TINY, cfg)
        assert a.history == b.history
        assert all(np.array_equal(a.model.params[k], b.model.params[k]) for k in a.model.params)

    def test_learns_linear_task(self):
        arch = Architecture(n_bins=6, n_steps=4, filter_sizes=(2, 3), conv_filters=(4, 3), dense_sizes=(16, 16),
                            dropout=0.0)
        X, y = _toy_data(2, 400, arch)
        cfg = TrainConfig(learning_rate=0.003, l2=0.0, max_epochs=200, patience=30, batch_size=32)
        res = train(X[:320], y[:320], X[320:], y[320:], arch, cfg)
        assert res.best_val_mse < 0.1 * np.var(y[320:])

    def test_best_snapshot_and_early_stop(self):
        X, y = _toy_data(3, 60)
        res = train(X[:50], y[:50], X[50:], y[50:], TINY,
                    TrainConfig(learning_rate=0.05, max_epochs=60, patience=3, batch_size=10))
        vals = [h[2] for h in res.history]
        assert res.best_val_mse == min(vals)
        assert res.history[res.best_epoch - 1][2] == res.best_val_mse
        assert np.mean((res.model.predict(X[50:]) - y[50:]) ** 2) == pytest.approx(res.best_val_mse, rel=1e-12)

    def test_divergence_reported(self):
        X, y = _toy_data(4, 20)
        y = y * 1e200
        with pytest.raises(TrainingDivergedError, match="epoch"):
            train(X, y, X, y, TINY, TrainConfig(learning_rate=0.1, max_epochs=3, batch_size=10))

    def test_config_validation(self):
        with pytest.raises(ValueError):
            TrainConfig(learning_rate=0)
        with pytest.raises(ValueError):
            TrainConfig(patience=0)


def test_checkpoint_round_trip(tmp_path):
    m = _model()
    X, y = _toy_data(5, 10)
    path = tmp_path / "m.bin"
    save_checkpoint(path, m, {"note": "x"})
    m2, extra = load_checkpoint(path)
    assert extra == {"note": "x"}
    assert m2.arch == m.arch
    assert np.mean((m2.predict(X) - y) ** 2) == np.mean((m.predict(X) - y) ** 2)
    raw = path.read_bytes()
    assert raw[:8] == b"MCMRCONV"
    save_checkpoint(tmp_path / "m2.bin", m2, {"note": "x"})
    assert (tmp_path / "m2.bin").read_bytes() == raw
    (tmp_path / "bad.bin").write_bytes(raw + b"\0")
    with pytest.raises(ValueError):
        load_checkpoint(tmp_path / "bad.bin")
    (tmp_path / "bad2.bin").write_bytes(b"NOTMODEL" + raw[8:])
    with pytest.raises(ValueError):
        load_checkpoint(tmp_path / "bad2.bin")
