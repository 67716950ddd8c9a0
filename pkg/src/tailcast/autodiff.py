"""Minimal dense-tensor reverse-mode differentiation engine.

Tensors wrap float64 numpy arrays and record the operations that produced
them; `backward` walks the record in reverse creation order and
accumulates adjoints.  Only the primitives the network needs are provided.
"""

import itertools

import numpy as np

from .errors import ShapeError

_counter = itertools.count()


class Tensor:
    __slots__ = ("value", "grad", "_parents", "_backward", "_order")

    def __init__(self, value, parents=(), backward_fn=None):
        self.value = np.asarray(value, dtype=float)
        self.grad = None
        self._parents = parents
        self._backward = backward_fn
        self._order = next(_counter)

    @property
    def shape(self):
        return self.value.shape

    def __repr__(self):
        return f"Tensor(shape={self.shape})"

    # operator sugar
    def __add__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return subtract(self, other)

    def __mul__(self, other):
        return multiply(self, other)

    def __matmul__(self, other):
        return matmul(self, other)


def _unbroadcast(grad, shape):
    """Sum `grad` down to `shape` after a numpy broadcast."""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad.reshape(shape)


def _accumulate(t, grad):
    if t.grad is None:
        t.grad = np.zeros_like(t.value)
    t.grad += grad


# ---------------------------------------------------------------------------
# primitives
# ---------------------------------------------------------------------------

def add(a, b):
    out_val = a.value + b.value

    def bw(g):
        _accumulate(a, _unbroadcast(g, a.shape))
        _accumulate(b, _unbroadcast(g, b.shape))

    return Tensor(out_val, (a, b), bw)


def subtract(a, b):
    out_val = a.value - b.value

    def bw(g):
        _accumulate(a, _unbroadcast(g, a.shape))
        _accumulate(b, _unbroadcast(-g, b.shape))

    return Tensor(out_val, (a, b), bw)


def multiply(a, b):
    out_val = a.value * b.value

    def bw(g):
        _accumulate(a, _unbroadcast(g * b.value, a.shape))
        _accumulate(b, _unbroadcast(g * a.value, b.shape))

    return Tensor(out_val, (a, b), bw)


def scale(a, c):
    """Multiply by a python float constant."""
    c = float(c)

    def bw(g):
        _accumulate(a, c * g)

    return Tensor(a.value * c, (a,), bw)


def matmul(a, b):
    if a.value.ndim != 2 or b.value.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ShapeError(f"matmul shapes do not conform: {a.shape} @ {b.shape}")
    out_val = a.value @ b.value

    def bw(g):
        _accumulate(a, g @ b.value.T)
        _accumulate(b, a.value.T @ g)

    return Tensor(out_val, (a, b), bw)


def transpose(a):
    def bw(g):
        _accumulate(a, g.T)

    return Tensor(a.value.T, (a,), bw)


def concat(tensors, axis=-1):
    tensors = list(tensors)
    out_val = np.concatenate([t.value for t in tensors], axis=axis)
    sizes = [t.value.shape[axis] for t in tensors]
    splits = np.cumsum(sizes)[:-1]

    def bw(g):
        for t, piece in zip(tensors, np.split(g, splits, axis=axis)):
            _accumulate(t, piece)

    return Tensor(out_val, tuple(tensors), bw)


def slice_cols(a, start, stop):
    if a.value.ndim != 2:
        raise ShapeError(f"slice_cols expects a 2-d tensor, got {a.shape}")

    def bw(g):
        full = np.zeros_like(a.value)
        full[:, start:stop] = g
        _accumulate(a, full)

    return Tensor(a.value[:, start:stop], (a,), bw)


def sigmoid(a):
    out_val = 1.0 / (1.0 + np.exp(-a.value))

    def bw(g):
        _accumulate(a, g * out_val * (1.0 - out_val))

    return Tensor(out_val, (a,), bw)


def tanh(a):
    out_val = np.tanh(a.value)

    def bw(g):
        _accumulate(a, g * (1.0 - out_val * out_val))

    return Tensor(out_val, (a,), bw)


def relu(a):
    mask = a.value > 0

    def bw(g):
        _accumulate(a, g * mask)

    return Tensor(a.value * mask, (a,), bw)


def softmax_rows(a):
    """Row-wise softmax with max subtraction for stability."""
    shifted = a.value - a.value.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    out_val = e / e.sum(axis=-1, keepdims=True)

    def bw(g):
        dot = (g * out_val).sum(axis=-1, keepdims=True)
        _accumulate(a, out_val * (g - dot))

    return Tensor(out_val, (a,), bw)


def layer_norm_rows(a, eps=1e-5):
    """Normalize each row to zero mean and unit variance (no affine)."""
    mu = a.value.mean(axis=-1, keepdims=True)
    var = a.value.var(axis=-1, keepdims=True)
    std = np.sqrt(var + eps)
    out_val = (a.value - mu) / std

    def bw(g):
        g_mean = g.mean(axis=-1, keepdims=True)
        gy_mean = (g * out_val).mean(axis=-1, keepdims=True)
        _accumulate(a, (g - g_mean - out_val * gy_mean) / std)

    return Tensor(out_val, (a,), bw)


def row_sum(a):
    """Sum over the last axis, keeping it as size 1."""
    out_val = a.value.sum(axis=-1, keepdims=True)

    def bw(g):
        _accumulate(a, np.broadcast_to(g, a.shape).copy())

    return Tensor(out_val, (a,), bw)


def sum_all(a):
    def bw(g):
        _accumulate(a, np.full(a.shape, float(g)))

    return Tensor(a.value.sum(), (a,), bw)


def mean_all(a):
    n = a.value.size

    def bw(g):
        _accumulate(a, np.full(a.shape, float(g) / n))

    return Tensor(a.value.mean(), (a,), bw)


def mean_squared_error(pred, target):
    """Mean of squared entrywise differences."""
    if pred.shape != target.shape:
        raise ShapeError(f"mse shapes differ: {pred.shape} vs {target.shape}")
    diff = pred.value - target.value
    n = diff.size

    def bw(g):
        _accumulate(pred, (2.0 * float(g) / n) * diff)
        _accumulate(target, (-2.0 * float(g) / n) * diff)

    return Tensor(np.mean(diff * diff), (pred, target), bw)


def pinball(pred, target, tau):
    """Mean pinball loss at level tau.

    Subdifferentiable at zero residual; there the adjoint uses the
    tau branch (left limit) by convention.
    """
    if pred.shape != target.shape:
        raise ShapeError(f"pinball shapes differ: {pred.shape} vs {target.shape}")
    e = target.value - pred.value
    n = e.size
    loss = np.mean(np.maximum(tau * e, (tau - 1.0) * e))

    def bw(g):
        d_e = np.where(e >= 0, tau, tau - 1.0)
        _accumulate(pred, (-float(g) / n) * d_e)
        _accumulate(target, (float(g) / n) * d_e)

    return Tensor(loss, (pred, target), bw)


# ---------------------------------------------------------------------------
# backward pass
# ---------------------------------------------------------------------------

def backward(loss):
    """Accumulate d(loss)/d(node) into `.grad` of every reachable tensor.

    The loss must be scalar.  Nodes are visited in exact reverse creation
    order, which is a reverse topological order by construction.
    """
    if loss.value.size != 1:
        raise ShapeError(f"backward requires a scalar loss, got shape {loss.shape}")

    # collect the reachable subgraph
    seen = set()
    nodes = []
    stack = [loss]
    while stack:
        t = stack.pop()
        if id(t) in seen:
            continue
        seen.add(id(t))
        nodes.append(t)
        stack.extend(t._parents)

    for t in nodes:
        t.grad = None
    loss.grad = np.ones_like(loss.value)

    for t in sorted(nodes, key=lambda n: n._order, reverse=True):
        if t._backward is not None and t.grad is not None:
            t._backward(t.grad)


# ---------------------------------------------------------------------------
# gradient checking
# ---------------------------------------------------------------------------

def gradient_check(params, loss_fn, step=1e-5, tolerance=1e-4):
    """Compare analytic gradients with central finite differences.

    `params` is a list of (name, Tensor) leaves; `loss_fn()` rebuilds the
    graph from the current leaf values and returns the scalar loss tensor.
    Returns a report dict with per-parameter worst relative errors.
    """
    loss = loss_fn()
    backward(loss)
    analytic = {name: (t.grad.copy() if t.grad is not None else np.zeros_like(t.value))
                for name, t in params}

    entries = []
    ok = True
    for name, t in params:
        numeric = np.zeros_like(t.value)
        flat = t.value.ravel()
        num_flat = numeric.ravel()
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + step
            f_plus = float(loss_fn().value)
            flat[i] = orig - step
            f_minus = float(loss_fn().value)
            flat[i] = orig
            num_flat[i] = (f_plus - f_minus) / (2.0 * step)
        ga, gn = analytic[name], numeric
        denom = np.maximum(np.maximum(np.abs(ga), np.abs(gn)), 1e-8)
        rel = np.abs(ga - gn) / denom
        worst = float(rel.max()) if rel.size else 0.0
        passed = worst < tolerance
        ok = ok and passed
        entries.append({"name": name, "max_rel_error": worst, "passed": passed})

    return {"passed": ok, "tolerance": tolerance, "step": step, "params": entries}
