"""Fully connected sigmoid networks trained by plain backpropagation.

Weights live in one flat float64 vector.  Layer ``j`` owns an
``n[j] x n[j+1]`` block (input-by-output) stored row-major, blocks in layer
order, so ``unflatten`` gives exactly the ``syn0, syn1, ...`` matrices of the
classic three-layer XOR script.

The training step is a forward Euler update ``w + alpha * direction(w)``
where ``direction`` is minus the gradient of ``E = 0.5 * sum (y - out)**2``.
"""

import csv
from dataclasses import dataclass, field

import numpy as np

from .rng import XorShift64Star


class ShapeError(ValueError):
    """Array dimensions disagree with the network topology."""


@dataclass(frozen=True)
class Topology:
    layer_widths: tuple

    def __post_init__(self):
        widths = tuple(int(n) for n in self.layer_widths)
        if len(widths) < 2:
            raise ValueError("a network needs at least 2 layers")
        if any(n < 1 for n in widths):
            raise ValueError("layer widths must be positive, got %r" % (widths,))
        object.__setattr__(self, "layer_widths", widths)

    @property
    def weight_count(self):
        w = self.layer_widths
        return sum(w[j] * w[j + 1] for j in range(len(w) - 1))

    @property
    def n_in(self):
        return self.layer_widths[0]

    @property
    def n_out(self):
        return self.layer_widths[-1]

    def shapes(self):
        w = self.layer_widths
        return [(w[j], w[j + 1]) for j in range(len(w) - 1)]


XOR_TOPOLOGY = Topology((3, 4, 1))
BINADD_TOPOLOGY = Topology((24, 128, 64, 12))


def unflatten(topology, w):
    """Split a flat weight vector into per-layer matrices (views, not copies)."""
    w = np.asarray(w)
    if w.ndim != 1 or w.shape[0] != topology.weight_count:
        raise ShapeError("weight vector has shape %s, topology needs (%d,)"
                         % (w.shape, topology.weight_count))
    mats = []
    start = 0
    for rows, cols in topology.shapes():
        stop = start + rows * cols
        mats.append(w[start:stop].reshape(rows, cols))
        start = stop
    return mats


def flatten(mats):
    return np.concatenate([np.asarray(m, dtype=np.float64).ravel() for m in mats])


@dataclass(frozen=True)
class Batch:
    X: np.ndarray
    Y: np.ndarray

    @property
    def K(self):
        return self.X.shape[0]

    def check(self, topology):
        if self.X.ndim != 2 or self.Y.ndim != 2:
            raise ShapeError("batch X and Y must be 2-d")
        if self.X.shape[0] != self.Y.shape[0] or self.X.shape[0] < 1:
            raise ShapeError("batch has %d inputs but %d targets"
                             % (self.X.shape[0], self.Y.shape[0]))
        if self.X.shape[1] != topology.n_in:
            raise ShapeError("batch inputs have %d columns, network takes %d"
                             % (self.X.shape[1], topology.n_in))
        if self.Y.shape[1] != topology.n_out:
            raise ShapeError("batch targets have %d columns, network gives %d"
                             % (self.Y.shape[1], topology.n_out))


@dataclass
class Dataset:
    name: str
    X: np.ndarray
    Y: np.ndarray
    _rows: list = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        self.X = np.ascontiguousarray(self.X, dtype=np.float64)
        self.Y = np.ascontiguousarray(self.Y, dtype=np.float64)
        if self.X.ndim != 2 or self.Y.ndim != 2 or self.X.shape[0] != self.Y.shape[0]:
            raise ShapeError("dataset X %s and Y %s do not pair up"
                             % (self.X.shape, self.Y.shape))
        if self.X.shape[0] < 1:
            raise ShapeError("dataset is empty")

    @property
    def K(self):
        return self.X.shape[0]

    @property
    def instances(self):
        return [(self.X[k], self.Y[k]) for k in range(self.K)]

    def batch(self):
        return Batch(self.X, self.Y)

    def instance(self, k):
        """Single-row batch for instance ``k``."""
        if self._rows is None:
            self._rows = [Batch(self.X[j:j + 1], self.Y[j:j + 1]) for j in range(self.K)]
        return self._rows[k]

    def flat(self):
        """The batch as one vector: all inputs row by row, then all targets."""
        return np.concatenate([self.X.ravel(), self.Y.ravel()])


def sigmoid(v):
    return 1.0 / (1.0 + np.exp(-v))


def sigmoid_deriv_from_activation(a):
    return a * (1.0 - a)


def _check_w(topology, w):
    w = np.asarray(w)
    if w.ndim != 1 or w.shape[0] != topology.weight_count:
        raise ShapeError("weight vector has shape %s, topology needs (%d,)"
                         % (w.shape, topology.weight_count))


def forward(topology, w, X):
    """Activations of every layer, input first; the last entry is the output."""
    _check_w(topology, w)
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != topology.n_in:
        raise ShapeError("input has shape %s, network takes (K, %d)"
                         % (X.shape, topology.n_in))
    acts = [X]
    for W in unflatten(topology, w):
        acts.append(sigmoid(np.dot(acts[-1], W)))
    return acts


def _direction(topology, w, batch):
    mats = unflatten(topology, w)
    acts = [batch.X]
    for W in mats:
        acts.append(sigmoid(np.dot(acts[-1], W)))
    out = acts[-1]
    delta = (batch.Y - out) * sigmoid_deriv_from_activation(out)
    grads = [None] * len(mats)
    for j in range(len(mats) - 1, -1, -1):
        grads[j] = acts[j].T.dot(delta)
        if j > 0:
            # deltas use the pre-update weights
            delta = delta.dot(mats[j].T) * sigmoid_deriv_from_activation(acts[j])
    return flatten(grads)


def gradient_direction(topology, w, batch):
    """Backpropagated descent direction, i.e. minus dE/dw."""
    _check_w(topology, w)
    batch.check(topology)
    return _direction(topology, w, batch)


def phi_step(topology, w, batch, alpha):
    """One training step: ``w + alpha * gradient_direction(w)``."""
    if alpha < 0:
        raise ValueError("learning rate must be non-negative")
    return w + alpha * gradient_direction(topology, w, batch)


def loss(topology, w, batch):
    out = forward(topology, w, batch.X)[-1]
    return 0.5 * float(np.sum((batch.Y - out) ** 2))


def mean_abs_error(topology, w, batch):
    out = forward(topology, w, batch.X)[-1]
    return float(np.mean(np.abs(batch.Y - out)))


INIT_SCHEMES = ("uniform", "normal")


def init_weights(topology, seed, scheme="uniform"):
    """Initial weights from the portable generator.

    ``uniform``: ``2u - 1``, i.e. uniform in [-1, 1) (three-layer XOR script).
    ``normal``: ``0.2 z - 0.1`` with ``z`` standard normal (four-layer
    binary-addition script).
    """
    rng = XorShift64Star(seed)
    if scheme == "uniform":
        return rng.uniform(-1.0, 1.0, topology.weight_count)
    if scheme == "normal":
        return 0.2 * rng.normal(topology.weight_count) - 0.1
    raise ValueError("unknown init scheme %r" % (scheme,))


def xor_dataset():
    X = [[0, 0, 1],
         [0, 1, 1],
         [1, 0, 1],
         [1, 1, 1]]
    Y = [[0], [1], [1], [0]]
    return Dataset("xor", np.array(X, dtype=np.float64), np.array(Y, dtype=np.float64))


def to_bits(value, bits):
    """Most significant bit first."""
    return [(value >> (bits - 1 - b)) & 1 for b in range(bits)]


def from_bits(digits):
    value = 0
    for d in digits:
        value = 2 * value + int(round(float(d)))
    return value


def binary_addition_dataset(seed=0, count=500, bits=12):
    """Random pairs ``a, b < 2**(bits-1)`` and their ``bits``-digit sum.

    Row layout: digits of ``a`` then digits of ``b`` as inputs, digits of
    ``a + b`` as targets, all most significant bit first.
    """
    if count < 1 or bits < 1:
        raise ValueError("count and bits must be positive")
    rng = XorShift64Star(seed)
    half = 1 << (bits - 1)
    X = np.empty((count, 2 * bits))
    Y = np.empty((count, bits))
    for k in range(count):
        a = rng.randbelow(half)
        b = rng.randbelow(half)
        X[k] = to_bits(a, bits) + to_bits(b, bits)
        Y[k] = to_bits(a + b, bits)
    return Dataset("binadd", X, Y)


def decode_binadd(x, y):
    """(a, b, sum) encoded by one binary-addition row."""
    bits = len(y)
    return from_bits(x[:bits]), from_bits(x[bits:]), from_bits(y)


def write_dataset_csv(dataset, path):
    nx, ny = dataset.X.shape[1], dataset.Y.shape[1]
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["x_%d" % j for j in range(nx)] + ["y_%d" % j for j in range(ny)])
        for x, y in zip(dataset.X, dataset.Y):
            writer.writerow(["%.17g" % v for v in x] + ["%.17g" % v for v in y])


def read_dataset_csv(path, name=None):
    with open(path, newline="") as f:
        rows = list(csv.reader(f))
    if not rows:
        raise ValueError("%s: missing header row" % path)
    header = rows[0]
    xcols = [j for j, h in enumerate(header) if h.startswith("x_")]
    ycols = [j for j, h in enumerate(header) if h.startswith("y_")]
    if not xcols or not ycols or len(xcols) + len(ycols) != len(header):
        raise ValueError("%s: header must be x_0..x_n,y_0..y_m, got %r" % (path, header))
    data = np.array([[float(v) for v in row] for row in rows[1:] if row], dtype=np.float64)
    if data.size == 0:
        raise ValueError("%s: no instances" % path)
    if name is None:
        name = "xor" if (len(xcols), len(ycols)) == (3, 1) else "binadd"
    return Dataset(name, data[:, xcols], data[:, ycols])
