import pytest
import numpy as np

from pedcross.autodiff import Tensor, gradient_check, is_grad_enabled, no_grad, numeric_gradient, ops, relative_error
from pedcross.errors import ShapeError


def param(values) -> Tensor:
    return Tensor(np.asarray(values, dtype=np.float64), requires_grad=True)


def test_elementwise_arithmetic():
    """Test componentwise add and multiply"""
    assert np.array_equal((Tensor([1, 2]) + Tensor([3, 4])).data, [4, 6])
    assert np.array_equal((Tensor([1, 2]) * Tensor([0, 0])).data, [0, 0])
    assert np.array_equal((Tensor([6, 8]) / 2).data, [3, 4])
    assert np.array_equal((1 - Tensor([1, 2])).data, [0, -1])


def test_product_rule():
    a, b = param([1, 2]), param([3, 4])
    ops.reduce_sum(a * b).backward()
    assert np.array_equal(a.grad, [3, 4])
    assert np.array_equal(b.grad, [1, 2])


def test_matmul():
    m = Tensor([[1, 2], [3, 4]])
    assert np.array_equal(ops.matmul(Tensor(np.eye(2)), m).data, m.data)
    assert np.array_equal(ops.matmul(Tensor([[1, 2]]), Tensor([[3], [4]])).data, [[11]])


def test_matmul_rejects_bad_shapes():
    with pytest.raises(ShapeError):
        ops.matmul(Tensor([1, 2]), Tensor([[1], [2]]))
    with pytest.raises(ShapeError):
        ops.matmul(Tensor(np.ones((2, 3))), Tensor(np.ones((2, 3))))


def test_broadcast_mismatch_raises():
    with pytest.raises(ShapeError):
        Tensor([1, 2]) + Tensor([1, 2, 3])


def test_broadcast_gradient_sums_back():
    """A bias added to every row receives the summed gradient"""
    x = param(np.ones((2, 3)))
    bias = param([0.0, 0.0, 0.0])
    ops.reduce_sum(x + bias).backward()
    assert bias.grad.shape == (3,)
    assert np.array_equal(bias.grad, [2, 2, 2])
    assert np.array_equal(x.grad, np.ones((2, 3)))


def test_activations():
    assert ops.leaky_relu(Tensor([-1.0])).item() == pytest.approx(-0.2)
    assert ops.leaky_relu(Tensor([3.0])).item() == 3.0
    assert np.allclose(ops.softmax(Tensor([0.0, 0.0, 0.0])).data, [1 / 3, 1 / 3, 1 / 3])
    assert ops.sigmoid(Tensor([0.0])).item() == 0.5


def test_softmax_is_stable_for_large_inputs():
    out = ops.softmax(Tensor([1000.0, 1000.0])).data
    assert np.all(np.isfinite(out))
    assert np.allclose(out, [0.5, 0.5])


def test_structural_ops():
    x = Tensor([1.0, 2.0, 3.0])
    assert np.array_equal(ops.reverse(x, axis=0).data, [3, 2, 1])
    assert np.array_equal(ops.reverse(ops.reverse(x, axis=0), axis=0).data, x.data)
    assert np.array_equal(ops.concat([Tensor([1.0]), Tensor([2.0, 3.0])], axis=0).data, [1, 2, 3])
    assert ops.stack([Tensor([1.0, 2.0]), Tensor([3.0, 4.0])], axis=1).shape == (2, 2)


def test_slice_range_bounds():
    x = Tensor(np.arange(6.0).reshape(2, 3))
    assert np.array_equal(ops.slice_range(x, 1, 1, 3).data, [[1, 2], [4, 5]])
    with pytest.raises(ShapeError):
        ops.slice_range(x, 1, 2, 5)


def test_quadratic_gradient():
    w = param([1, 2])
    ops.reduce_sum(w * w).backward()
    assert np.array_equal(w.grad, [2, 4])


def test_unused_leaf_gets_no_gradient():
    w = param([1, 2])
    x = param([3, 4])
    ops.reduce_sum(x * x).backward()
    assert w.grad is None or np.all(w.grad == 0)


def test_reused_node_accumulates():
    """y = x * x + x uses x twice"""
    x = param([2.0])
    y = x * x + x
    ops.reduce_sum(y).backward()
    assert x.grad[0] == 5.0


def test_repeated_index_accumulates():
    x = param([1.0, 2.0, 3.0])
    picked = ops.slice_(x, np.array([0, 0, 2, 0]))
    assert np.array_equal(picked.data, [1.0, 1.0, 3.0, 1.0])
    ops.reduce_sum(picked * Tensor(np.array([1.0, 2.0, 5.0, 4.0]))).backward()
    assert np.array_equal(x.grad, [7.0, 0.0, 5.0])


def test_max_ties_route_to_first_index():
    x = param([1.0, 3.0, 3.0])
    ops.reduce_max(x, axis=0).backward()
    assert np.array_equal(x.grad, [0.0, 1.0, 0.0])


def test_backward_requires_scalar():
    x = param([1.0, 2.0])
    with pytest.raises(ShapeError):
        (x * 2).backward()


def test_long_chain_does_not_overflow():
    x = param([1.0])
    y = x
    for _ in range(5000):
        y = y + 1.0
    ops.reduce_sum(y).backward()
    assert x.grad[0] == 1.0


def test_no_grad_disables_recording():
    w = param([1.0, 2.0])
    assert is_grad_enabled()
    with no_grad():
        assert not is_grad_enabled()
        out = w * w
    assert is_grad_enabled()
    assert not out.requires_grad
    assert out.is_leaf


def test_numeric_gradient_matches_autodiff():
    w = param([3.0])
    f = lambda: ops.reduce_sum(w * w)
    numeric = numeric_gradient(f, w)
    f().backward()
    assert relative_error(w.grad, numeric) < 1e-9
    assert w.grad[0] == 6.0


def test_gradient_check_linear_function():
    w = param([1.0, -2.0, 0.5])
    report = gradient_check(lambda: ops.reduce_sum(w * np.array([2.0, 3.0, 4.0])), {'w': w})
    assert report.max_relative_error < 1e-9
    assert report.passed()
    assert set(report.per_parameter_errors) == {'w'}


def test_relative_error_of_zero_gradients():
    assert relative_error(np.zeros(3), np.zeros(3)) == 0.0
