import pytest
import numpy as np

from pedcross.autodiff import Tensor
from pedcross.errors import ShapeError
from pedcross.layers import (
    ConvParams, ParameterStore, atrous_conv2d, batch_norm, bigru_block, cbam, dense, dropout, gru_cell,
    gru_layer, max_pool2d, modality_attention, modality_weights, se_block, temporal_attention,
    temporal_weights, ugru_block,
)
from pedcross.autodiff import ops


def sigmoid(x):
    return 1.0 / (1.0 + np.exp(-x))


def conv_oracle(x, w, b, dilation):
    """Direct sum over taps with zero outside the input"""
    batch, channels, height, width = x.shape
    filters, _, kh, kw = w.shape
    r1, r2 = dilation
    out = np.zeros((batch, filters, height, width))
    for n in range(batch):
        for k in range(filters):
            for m in range(height):
                for col in range(width):
                    total = b[k]
                    for c in range(channels):
                        for i in range(kh):
                            for j in range(kw):
                                row, cc = m + r1 * (i - kh // 2), col + r2 * (j - kw // 2)
                                if 0 <= row < height and 0 <= cc < width:
                                    total += x[n, c, row, cc] * w[k, c, i, j]
                    out[n, k, m, col] = total
    return out


def gru_oracle(x, p, reverse=False):
    """Plain numpy GRU over (B, T, D), time-aligned output"""
    w = {g: getattr(p, f"w_{g}").data for g in "zrh"}
    u = {g: getattr(p, f"u_{g}").data for g in "zrh"}
    b = {g: getattr(p, f"b_{g}").data for g in "zrh"}
    batch, steps, _ = x.shape
    h = np.zeros((batch, u['z'].shape[0]))
    out = np.zeros((batch, steps, h.shape[1]))
    order = range(steps - 1, -1, -1) if reverse else range(steps)
    for t in order:
        z = sigmoid(x[:, t] @ w['z'] + h @ u['z'] + b['z'])
        r = sigmoid(x[:, t] @ w['r'] + h @ u['r'] + b['r'])
        cand = np.tanh(x[:, t] @ w['h'] + (r * h) @ u['h'] + b['h'])
        h = (1 - z) * h + z * cand
        out[:, t] = h
    return out


def zero_out(params):
    for tensor in params.parameters().values():
        tensor.data = np.zeros_like(tensor.data)


def test_dilated_conv_center_tap():
    """Taps at offsets -2, 0, +2 around the centre of [1..5]"""
    x = Tensor(np.arange(1.0, 6.0).reshape(1, 1, 1, 5))
    p = ConvParams(weight=Tensor(np.ones((1, 1, 1, 3))), bias=Tensor(np.zeros(1)), dilation=(1, 2))
    out = atrous_conv2d(x, p, activation="identity").data
    assert out.shape == (1, 1, 1, 5)
    assert out[0, 0, 0, 2] == 9.0


@pytest.mark.parametrize("dilation", [(1, 1), (2, 1), (3, 1), (2, 3)])
def test_conv_matches_direct_sum(rng, dilation):
    store = ParameterStore(1)
    p = store.conv("conv", 3, 4, dilation=dilation)
    p.bias.data = rng.normal(size=4)
    x = rng.normal(size=(2, 3, 6, 5))
    out = atrous_conv2d(Tensor(x), p, activation="identity").data
    expected = conv_oracle(x, p.weight.data, p.bias.data, dilation)
    assert np.max(np.abs(out - expected)) < 1e-10


def test_conv_zero_weights_gives_activated_bias():
    p = ConvParams(weight=Tensor(np.zeros((2, 1, 3, 3))), bias=Tensor([-0.5, 2.0]))
    out = atrous_conv2d(Tensor(np.ones((1, 1, 4, 4))), p).data
    assert np.allclose(out[0, 0], -0.1)
    assert np.allclose(out[0, 1], 2.0)


def test_conv_channel_mismatch():
    p = ParameterStore(0).conv("conv", 2, 3)
    with pytest.raises(ShapeError):
        atrous_conv2d(Tensor(np.ones((1, 3, 4, 4))), p)


def test_cbam_zero_init_quarters_input(rng):
    store = ParameterStore(0)
    p = store.cbam("cbam", 8)
    zero_out(store)
    x = rng.normal(size=(2, 8, 5, 6))
    assert np.allclose(cbam(Tensor(x), p).data, 0.25 * x)


def test_se_zero_init_halves_input(rng):
    store = ParameterStore(0)
    p = store.se("se", 8)
    zero_out(store)
    x = rng.normal(size=(2, 8, 3, 3))
    assert np.allclose(se_block(Tensor(x), p).data, 0.5 * x)


def test_cbam_keeps_shape(rng):
    p = ParameterStore(0).cbam("cbam", 4)
    x = Tensor(rng.normal(size=(3, 4, 7, 9)))
    assert cbam(x, p).shape == (3, 4, 7, 9)


def test_max_pool():
    assert np.array_equal(max_pool2d(Tensor([[[[1.0, 2.0], [3.0, 4.0]]]])).data, [[[[4.0]]]])
    constant = max_pool2d(Tensor(np.full((1, 2, 4, 6), 7.0))).data
    assert constant.shape == (1, 2, 2, 3)
    assert np.all(constant == 7.0)


def test_max_pool_crops_odd_extents():
    x = Tensor(np.arange(9.0).reshape(1, 1, 3, 3))
    assert np.array_equal(max_pool2d(x).data, [[[[4.0]]]])


def test_three_pools_reduce_window_to_two_by_two():
    x = Tensor(np.zeros((1, 1, 16, 18)))
    for _ in range(3):
        x = max_pool2d(x)
    assert x.shape == (1, 1, 2, 2)


def test_gru_cell_scalar_example():
    p = ParameterStore(0).gru_cell("cell", 1, 1)
    for tensor in p.tensors():
        tensor.data = np.full_like(tensor.data, 0.5)
    p.b_z.data[:] = p.b_r.data[:] = p.b_h.data[:] = 0.0
    h = gru_cell(Tensor([[1.0]]), Tensor([[0.0]]), p).item()
    z = sigmoid(0.5)
    assert z == pytest.approx(0.62246, abs=1e-5)
    assert np.tanh(0.5) == pytest.approx(0.46212, abs=1e-5)
    assert h == pytest.approx(0.28766, abs=1e-5)


def test_gru_cell_zero_weights_halves_state():
    store = ParameterStore(0)
    p = store.gru_cell("cell", 3, 2)
    zero_out(store)
    h = np.array([[0.4, -0.8]])
    out = gru_cell(Tensor(np.ones((1, 3))), Tensor(h), p).data
    assert np.allclose(out, 0.5 * h)


@pytest.mark.parametrize("direction", ["forward", "reverse"])
def test_gru_layer_matches_oracle(rng, direction):
    p = ParameterStore(2).gru_cell("cell", 3, 5)
    x = rng.normal(size=(2, 6, 3))
    out = gru_layer(Tensor(x), p, direction).data
    expected = gru_oracle(x, p, reverse=direction == "reverse")
    assert np.max(np.abs(out - expected)) < 1e-12


def test_gru_layer_matches_composed_cells(rng):
    p = ParameterStore(3).gru_cell("cell", 2, 3)
    x = rng.normal(size=(2, 4, 2))
    h = Tensor(np.zeros((2, 3)))
    for t in range(4):
        h = gru_cell(Tensor(x[:, t]), h, p)
    assert np.max(np.abs(gru_layer(Tensor(x), p).data[:, -1] - h.data)) < 1e-12


def test_ugru_is_reverse_concat_forward(rng):
    store = ParameterStore(4)
    p = store.recurrent_block("ugru", "ugru", 3, 4)
    x = rng.normal(size=(2, 7, 3))
    reversed_states = gru_oracle(x, p.first, reverse=True)
    expected = gru_oracle(np.concatenate([reversed_states, x], axis=2), p.second)
    out = ugru_block(Tensor(x), p).data
    assert out.shape == (2, 7, 4)
    assert np.max(np.abs(out - expected)) < 1e-12


def test_ugru_single_step(rng):
    p = ParameterStore(5).recurrent_block("ugru", "ugru", 2, 3)
    x = rng.normal(size=(1, 1, 2))
    first = gru_cell(Tensor(x[:, 0]), Tensor(np.zeros((1, 3))), p.first)
    second = gru_cell(ops.concat([first, Tensor(x[:, 0])], axis=1), Tensor(np.zeros((1, 3))), p.second)
    assert np.allclose(ugru_block(Tensor(x), p).data[:, 0], second.data, atol=1e-12)


def test_ugru_pose_distance_shapes():
    p = ParameterStore(0).recurrent_block("jcd", "ugru", 153, 64)
    out = ugru_block(Tensor(np.zeros((1, 16, 153))), p)
    assert out.shape == (1, 16, 64)


def test_bigru_sums_directions(rng):
    p = ParameterStore(6).recurrent_block("bigru", "bigru", 3, 2)
    x = rng.normal(size=(2, 5, 3))
    expected = gru_oracle(x, p.first) + gru_oracle(x, p.second, reverse=True)
    assert np.max(np.abs(bigru_block(Tensor(x), p).data - expected)) < 1e-12


def test_temporal_attention_weights_sum_to_one(rng):
    p = ParameterStore(0).temporal_attention("attention", 4)
    alpha = temporal_weights(Tensor(rng.normal(size=(3, 6, 4))), p).data
    assert alpha.shape == (3, 6)
    assert np.allclose(alpha.sum(axis=1), 1.0)
    assert np.all(alpha > 0)


def test_temporal_attention_identical_rows(rng):
    p = ParameterStore(0).temporal_attention("attention", 4)
    row = rng.normal(size=4)
    states = np.tile(row, (2, 5, 1))
    alpha = temporal_weights(Tensor(states), p).data
    assert np.allclose(alpha, 0.2)
    assert np.allclose(temporal_attention(Tensor(states), p).data, np.tile(row, (2, 1)))


def test_temporal_attention_single_step(rng):
    p = ParameterStore(0).temporal_attention("attention", 3)
    states = rng.normal(size=(2, 1, 3))
    assert np.allclose(temporal_attention(Tensor(states), p).data, states[:, 0])


def test_modality_attention(rng):
    p = ParameterStore(0).modality_attention("fusion", 4)
    vectors = [Tensor(rng.normal(size=(2, 4))) for _ in range(3)]
    beta = modality_weights(ops.stack(vectors, axis=1), p).data
    assert np.allclose(beta.sum(axis=1), 1.0)

    single = Tensor(rng.normal(size=(2, 4)))
    assert np.allclose(modality_attention([single], p).data, single.data)
    assert np.allclose(modality_attention([single, single, single], p).data, single.data)


def test_modality_attention_needs_vectors():
    p = ParameterStore(0).modality_attention("fusion", 4)
    with pytest.raises(ShapeError):
        modality_attention([], p)


def test_dropout_modes(rng):
    x = Tensor(rng.normal(size=(4, 8)))
    assert dropout(x, 0.0, "train", rng) is x
    assert dropout(x, 0.5, "eval") is x
    out = dropout(x, 0.5, "train", np.random.default_rng(1)).data
    kept = out != 0
    assert np.allclose(out[kept], 2.0 * x.data[kept])


@pytest.mark.parametrize("mode", ["test", "Train", "inference"])
def test_dropout_rejects_unknown_mode(rng, mode):
    x = Tensor(rng.normal(size=(2, 3)))
    with pytest.raises(ValueError, match="mode"):
        dropout(x, 0.0, mode, rng)
    with pytest.raises(ValueError, match="mode"):
        dropout(x, 0.5, mode, rng)


def test_dense_shapes(rng):
    p = ParameterStore(0).dense("dense", 64, 1)
    assert p.weight.size + p.bias.size == 65
    assert dense(Tensor(rng.normal(size=(3, 64))), p).shape == (3, 1)
    assert dense(Tensor(rng.normal(size=(2, 5, 64))), p).shape == (2, 5, 1)
    with pytest.raises(ShapeError):
        dense(Tensor(np.ones((3, 8))), p)


def test_batch_norm_train_and_eval(rng):
    state = ParameterStore(0).batch_norm("bn", 2)
    x = rng.normal(loc=3.0, scale=2.0, size=(8, 2, 3, 3))
    out = batch_norm(Tensor(x), state, "train").data
    assert np.allclose(out.mean(axis=(0, 2, 3)), 0.0, atol=1e-12)
    assert np.allclose(state.running_mean, 0.1 * x.mean(axis=(0, 2, 3)))

    state.running_mean = np.array([1.0, -1.0])
    state.running_var = np.array([4.0, 1.0])
    ev = batch_norm(Tensor(np.ones((1, 2, 1, 1))), state, "eval").data
    assert np.allclose(ev.reshape(2), [0.0, 2.0 / np.sqrt(1.0 + state.epsilon)])


def test_parameter_store_is_seeded():
    first, second = ParameterStore(7), ParameterStore(7)
    a = first.dense("d", 3, 2)
    b = second.dense("d", 3, 2)
    assert np.array_equal(a.weight.data, b.weight.data)
    with pytest.raises(ValueError):
        first.dense("d", 3, 2)
