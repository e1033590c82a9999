import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mgrit_nn.network import (BINADD_TOPOLOGY, XOR_TOPOLOGY, Batch, ShapeError, Topology,
                              binary_addition_dataset, decode_binadd, flatten, forward,
                              gradient_direction, init_weights, loss, phi_step,
                              read_dataset_csv, sigmoid, sigmoid_deriv_from_activation,
                              unflatten, write_dataset_csv, xor_dataset)


def test_weight_counts():
    assert XOR_TOPOLOGY.weight_count == 16
    assert BINADD_TOPOLOGY.weight_count == 12032


@pytest.mark.parametrize("widths", [(3,), (), (3, 0, 1), (2, -1)])
def test_bad_topologies(widths):
    with pytest.raises(ValueError):
        Topology(widths)


def test_sigmoid_values():
    assert sigmoid(0.0) == 0.5
    assert sigmoid(10.0) == pytest.approx(1.0 / (1.0 + math.exp(-10.0)), abs=1e-16)
    assert sigmoid(10.0) == pytest.approx(0.9999546021312976, abs=1e-15)
    assert sigmoid(-10.0) == pytest.approx(1.0 - sigmoid(10.0), abs=1e-15)


@given(st.floats(-30, 30), st.floats(-30, 30))
def test_sigmoid_monotone(a, b):
    if a < b:
        assert sigmoid(a) <= sigmoid(b)


@pytest.mark.parametrize("a, expect", [(0.5, 0.25), (0.0, 0.0), (1.0, 0.0)])
def test_sigmoid_deriv(a, expect):
    assert sigmoid_deriv_from_activation(a) == expect


@given(st.lists(st.integers(1, 6), min_size=2, max_size=5), st.integers(0, 2**32))
@settings(max_examples=40)
def test_flatten_roundtrip(widths, seed):
    topo = Topology(tuple(widths))
    w = init_weights(topo, seed)
    mats = unflatten(topo, w)
    assert [m.shape for m in mats] == topo.shapes()
    assert np.array_equal(flatten(mats), w)


def test_layout_is_input_by_output_row_major(topo):
    w = np.arange(16, dtype=float)
    syn0, syn1 = unflatten(topo, w)
    assert syn0.shape == (3, 4) and syn1.shape == (4, 1)
    assert syn0[1, 2] == 1 * 4 + 2
    assert syn1[3, 0] == 15


def test_forward_zero_weights(topo, xor):
    acts = forward(topo, np.zeros(16), xor.X)
    assert acts[0] is not None and np.array_equal(acts[0], xor.X)
    assert acts[-1].shape == (4, 1)
    for a in acts[1:]:
        assert np.all(a == 0.5)


def transcribed_pass(syn0, syn1, X, y, alpha=1.0):
    """One loop iteration of the three-layer XOR script, verbatim."""
    def nonlin(x, deriv=False):
        if deriv:
            return x * (1 - x)
        return 1 / (1 + np.exp(-x))
    l0 = X
    l1 = nonlin(np.dot(l0, syn0))
    l2 = nonlin(np.dot(l1, syn1))
    l2_error = y - l2
    l2_delta = l2_error * nonlin(l2, deriv=True)
    l1_error = l2_delta.dot(syn1.T)
    l1_delta = l1_error * nonlin(l1, deriv=True)
    syn1 = syn1 + alpha * l1.T.dot(l2_delta)
    syn0 = syn0 + alpha * l0.T.dot(l1_delta)
    return l1, l2, syn0, syn1


def test_forward_matches_transcribed_script(topo, xor):
    w = init_weights(topo, 1)
    syn0, syn1 = (m.copy() for m in unflatten(topo, w))
    l1, l2, _, _ = transcribed_pass(syn0, syn1, xor.X, xor.Y)
    acts = forward(topo, w, xor.X)
    np.testing.assert_allclose(acts[1], l1, rtol=0, atol=1e-12)
    np.testing.assert_allclose(acts[2], l2, rtol=0, atol=1e-12)


def test_phi_step_matches_transcribed_script(topo, xor):
    w = init_weights(topo, 1)
    syn0, syn1 = (m.copy() for m in unflatten(topo, w))
    _, _, new0, new1 = transcribed_pass(syn0, syn1, xor.X, xor.Y, alpha=1.0)
    np.testing.assert_allclose(phi_step(topo, w, xor.batch(), 1.0), flatten([new0, new1]),
                               rtol=0, atol=1e-12)


def fd_direction(topo, w, batch, h=1e-6):
    g = np.empty_like(w)
    for j in range(w.size):
        e = np.zeros_like(w)
        e[j] = h
        g[j] = -(loss(topo, w + e, batch) - loss(topo, w - e, batch)) / (2 * h)
    return g


def test_gradient_matches_finite_differences(topo, xor, rng):
    for _ in range(100):
        w = rng.uniform(-1, 1, 16)
        g = gradient_direction(topo, w, xor.batch())
        fd = fd_direction(topo, w, xor.batch())
        assert np.all(np.abs(g - fd) / np.maximum(1.0, np.abs(g)) < 1e-6)


def test_gradient_four_layer_finite_differences(rng):
    topo = Topology((5, 4, 3, 2))
    X = rng.uniform(0, 1, (3, 5))
    Y = rng.uniform(0, 1, (3, 2))
    batch = Batch(X, Y)
    for _ in range(5):
        w = rng.normal(0, 1, topo.weight_count)
        g = gradient_direction(topo, w, batch)
        fd = fd_direction(topo, w, batch)
        assert np.all(np.abs(g - fd) / np.maximum(1.0, np.abs(g)) < 1e-6)


def test_zero_error_gives_zero_direction(topo, xor):
    w = init_weights(topo, 4)
    out = forward(topo, w, xor.X)[-1]
    g = gradient_direction(topo, w, Batch(xor.X, out))
    assert np.all(g == 0.0)


def test_batch_direction_is_sum_of_instances(topo, xor, rng):
    w = rng.uniform(-1, 1, 16)
    total = sum(gradient_direction(topo, w, xor.instance(k)) for k in range(4))
    np.testing.assert_allclose(gradient_direction(topo, w, xor.batch()), total,
                               rtol=0, atol=1e-14)


def test_phi_step_alpha_properties(topo, xor):
    w = init_weights(topo, 2)
    b = xor.batch()
    assert np.array_equal(phi_step(topo, w, b, 0.0), w)
    d1 = phi_step(topo, w, b, 0.3) - w
    d2 = phi_step(topo, w, b, 0.6) - w
    np.testing.assert_allclose(d2, 2 * d1, rtol=1e-12, atol=1e-15)
    with pytest.raises(ValueError):
        phi_step(topo, w, b, -1.0)


def test_operations_are_pure(topo, xor):
    w = init_weights(topo, 3)
    keep = w.copy()
    a = phi_step(topo, w, xor.batch(), 1.0)
    b = phi_step(topo, w, xor.batch(), 1.0)
    assert np.array_equal(w, keep) and np.array_equal(a, b)


def test_shape_errors(topo, xor):
    w = init_weights(topo, 1)
    with pytest.raises(ShapeError):
        forward(topo, w[:-1], xor.X)
    with pytest.raises(ShapeError):
        forward(topo, w, xor.X[:, :2])
    with pytest.raises(ShapeError):
        gradient_direction(topo, w, Batch(xor.X, np.zeros((4, 2))))
    with pytest.raises(ShapeError):
        gradient_direction(topo, w, Batch(xor.X, np.zeros((3, 1))))
    with pytest.raises(ShapeError):
        unflatten(topo, np.zeros((4, 4)))


def test_init_weights():
    a = init_weights(XOR_TOPOLOGY, 1)
    assert a.shape == (16,)
    assert a.min() >= -1.0 and a.max() < 1.0
    assert np.array_equal(a, init_weights(XOR_TOPOLOGY, 1))
    assert not np.array_equal(a, init_weights(XOR_TOPOLOGY, 2))
    n = init_weights(BINADD_TOPOLOGY, 1, "normal")
    assert abs(n.mean() + 0.1) < 0.01 and abs(n.std() - 0.2) < 0.01
    with pytest.raises(ValueError):
        init_weights(XOR_TOPOLOGY, 1, "zeros")


def test_xor_dataset():
    d = xor_dataset()
    assert d.K == 4
    assert d.X[1].tolist() == [0, 1, 1] and d.Y[1].tolist() == [1]
    assert d.Y[:, 0].tolist() == [0, 1, 1, 0]
    assert d.flat().shape == (16,)


def test_binary_addition_dataset():
    d = binary_addition_dataset(seed=3, count=500, bits=12)
    assert d.X.shape == (500, 24) and d.Y.shape == (500, 12)
    for x, y in d.instances:
        a, b, total = decode_binadd(x, y)
        assert a < 2**11 and b < 2**11
        assert total == a + b
    again = binary_addition_dataset(seed=3, count=500, bits=12)
    assert np.array_equal(d.X, again.X)


@given(st.integers(0, 2**31), st.integers(1, 16), st.integers(1, 20))
@settings(max_examples=30)
def test_binary_addition_decodes(seed, bits, count):
    d = binary_addition_dataset(seed, count, bits)
    for x, y in d.instances:
        a, b, total = decode_binadd(x, y)
        assert total == a + b


def test_dataset_csv_roundtrip(tmp_path):
    for d in (xor_dataset(), binary_addition_dataset(1, 20, 4)):
        path = tmp_path / ("%s.csv" % d.name)
        write_dataset_csv(d, path)
        header = path.read_text().splitlines()[0]
        if d.name == "xor":
            assert header == "x_0,x_1,x_2,y_0"
        else:
            assert header.startswith("x_0,") and header.endswith(",y_3")
        back = read_dataset_csv(path)
        assert back.name == d.name
        assert np.array_equal(back.X, d.X) and np.array_equal(back.Y, d.Y)


def test_dataset_csv_requires_header(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("0,0,1,0\n")
    with pytest.raises(ValueError):
        read_dataset_csv(path)
