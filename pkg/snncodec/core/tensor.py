# snncodec/core/tensor.py
"""
Dense float64 tensors with recorded forward operations and reverse-mode gradients.

Every operation is a `Function` subclass: `forward` works on plain numpy arrays
and `backward` maps the gradient of the output to one gradient per parent.
Only what the spiking classifier needs is provided.
"""

from __future__ import annotations

import enum
import threading
from contextlib import contextmanager
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.special import expit

from snncodec.errors import ContractError, DimensionError, NumericError

_grad_state = threading.local()


def is_grad_enabled():
    return getattr(_grad_state, 'enabled', True)


@contextmanager
def no_grad():
    """Run forward passes without recording (evaluation, finite differences)."""
    previous = is_grad_enabled()
    _grad_state.enabled = False
    try:
        yield
    finally:
        _grad_state.enabled = previous


def unbroadcast(grad, shape):
    """Sum a broadcast gradient back down to `shape`."""
    if grad.shape == shape:
        return grad
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


class Function:
    """A recorded operation. Subclasses implement forward/backward on arrays."""

    def __init__(self, *parents):
        self.parents = parents

    def forward(self, *arrays, **kwargs):
        raise NotImplementedError("Forward pass not implemented for this function")

    def backward(self, grad):
        raise NotImplementedError("Backward pass not implemented for this function")

    @classmethod
    def apply(cls, *tensors, **kwargs):
        fn = cls(*tensors)
        out = fn.forward(*(t.data for t in tensors), **kwargs)
        requires_grad = is_grad_enabled() and any(t.requires_grad for t in tensors)
        return Tensor(out, requires_grad=requires_grad, _ctx=fn if requires_grad else None)


class Tensor:
    """A shape-carrying float64 array that may take part in a recorded computation."""

    __slots__ = ('data', 'grad', 'requires_grad', '_ctx')

    def __init__(self, data, requires_grad=False, _ctx=None):
        self.data = np.asarray(data, dtype=np.float64)
        self.grad = None
        self.requires_grad = requires_grad
        self._ctx = _ctx

    @classmethod
    def parameter(cls, data):
        return cls(np.array(data, dtype=np.float64), requires_grad=True)

    @property
    def shape(self):
        return self.data.shape

    @property
    def ndim(self):
        return self.data.ndim

    @property
    def size(self):
        return self.data.size

    @property
    def values(self):
        """Row-major flat view of the data."""
        return self.data.reshape(-1)

    def item(self):
        if self.data.size != 1:
            raise ContractError(f"item() needs a single element, got shape {self.shape}")
        return float(self.data.reshape(-1)[0])

    def numpy(self):
        return self.data.copy()

    def zero_grad(self):
        self.grad = None

    def backward(self):
        backward(self)

    # --- operators ---
    def __add__(self, other):
        return Add.apply(self, _lift(other))

    def __radd__(self, other):
        return Add.apply(_lift(other), self)

    def __sub__(self, other):
        return Sub.apply(self, _lift(other))

    def __rsub__(self, other):
        return Sub.apply(_lift(other), self)

    def __mul__(self, other):
        return Mul.apply(self, _lift(other))

    def __rmul__(self, other):
        return Mul.apply(_lift(other), self)

    def __neg__(self):
        return Neg.apply(self)

    def __truediv__(self, other):
        if isinstance(other, Tensor):
            return Div.apply(self, other)
        return Mul.apply(self, _lift(1.0 / other))

    def __repr__(self):
        return f"Tensor(shape={self.shape}, requires_grad={self.requires_grad})"


def _lift(value):
    return value if isinstance(value, Tensor) else Tensor(value)


# ===========================
# Elementwise and shape ops
# ===========================

class Add(Function):
    def forward(self, a, b):
        self.shapes = (a.shape, b.shape)
        return a + b

    def backward(self, grad):
        return unbroadcast(grad, self.shapes[0]), unbroadcast(grad, self.shapes[1])


class Sub(Function):
    def forward(self, a, b):
        self.shapes = (a.shape, b.shape)
        return a - b

    def backward(self, grad):
        return unbroadcast(grad, self.shapes[0]), unbroadcast(-grad, self.shapes[1])


class Mul(Function):
    def forward(self, a, b):
        self.a, self.b = a, b
        return a * b

    def backward(self, grad):
        return unbroadcast(grad * self.b, self.a.shape), unbroadcast(grad * self.a, self.b.shape)


class Div(Function):
    def forward(self, a, b):
        self.a, self.b = a, b
        return a / b

    def backward(self, grad):
        return (unbroadcast(grad / self.b, self.a.shape),
                unbroadcast(-grad * self.a / (self.b * self.b), self.b.shape))


class Neg(Function):
    def forward(self, a):
        return -a

    def backward(self, grad):
        return (-grad,)


class Sigmoid(Function):
    def forward(self, a):
        self.out = expit(a)
        return self.out

    def backward(self, grad):
        return (grad * self.out * (1.0 - self.out),)


class Sum(Function):
    def forward(self, a, axis=None):
        self.shape, self.axis = a.shape, axis
        return np.asarray(a.sum(axis=axis))

    def backward(self, grad):
        if self.axis is not None:
            grad = np.expand_dims(grad, self.axis)
        return (np.broadcast_to(grad, self.shape).copy(),)


class Mean(Function):
    def forward(self, a, axis=None):
        self.shape, self.axis = a.shape, axis
        self.count = a.size if axis is None else a.shape[axis]
        return np.asarray(a.mean(axis=axis))

    def backward(self, grad):
        if self.axis is not None:
            grad = np.expand_dims(grad, self.axis)
        return (np.broadcast_to(grad / self.count, self.shape).copy(),)


class Reshape(Function):
    def forward(self, a, shape=None):
        self.shape = a.shape
        return a.reshape(shape)

    def backward(self, grad):
        return (grad.reshape(self.shape),)


class Stack(Function):
    def forward(self, *arrays):
        return np.stack(arrays, axis=0)

    def backward(self, grad):
        return tuple(grad[i] for i in range(grad.shape[0]))


class Select(Function):
    def forward(self, a, index=0):
        self.shape, self.index = a.shape, index
        return a[index].copy()

    def backward(self, grad):
        out = np.zeros(self.shape)
        out[self.index] = grad
        return (out,)


class Take(Function):
    def forward(self, a, indices=None):
        self.shape, self.indices = a.shape, indices
        return a[indices]

    def backward(self, grad):
        out = np.zeros(self.shape)
        np.add.at(out, self.indices, grad)
        return (out,)


def sigmoid(x):
    return Sigmoid.apply(x)


def tensor_sum(x, axis=None):
    return Sum.apply(x, axis=axis)


def mean(x, axis=None):
    return Mean.apply(x, axis=axis)


def reshape(x, shape):
    return Reshape.apply(x, shape=tuple(shape))


def stack(tensors):
    if not tensors:
        raise ContractError("stack needs at least one tensor")
    first = tensors[0].shape
    for t in tensors[1:]:
        if t.shape != first:
            raise DimensionError(f"stack shapes differ: {first} vs {t.shape}")
    return Stack.apply(*tensors)


def select(x, index):
    """Row `index` of the leading axis."""
    if not 0 <= index < x.shape[0]:
        raise DimensionError(f"index {index} outside leading axis of size {x.shape[0]}")
    return Select.apply(x, index=index)


def take(x, indices):
    """Gather rows of the leading axis in the order given by `indices`."""
    indices = np.asarray(indices, dtype=np.int64)
    if indices.size and (indices.min() < 0 or indices.max() >= x.shape[0]):
        raise DimensionError(f"indices outside leading axis of size {x.shape[0]}")
    return Take.apply(x, indices=indices)


def channel_view(vec, ndim, axis=1):
    """Reshape a per-channel vector [C] so it broadcasts along `axis` of an ndim-array."""
    shape = [1] * ndim
    shape[axis] = vec.shape[-1]
    return reshape(vec, shape)


# ===========================
# Layers
# ===========================

class Linear(Function):
    def forward(self, x, w, b):
        self.x, self.w = x, w
        return x @ w.T + b

    def backward(self, grad):
        return grad @ self.w, grad.T @ self.x, grad.sum(axis=0)


def linear(x, w, b):
    """out[i, j] = sum_k x[i, k] * w[j, k] + b[j]."""
    if x.ndim != 2 or w.ndim != 2 or b.ndim != 1:
        raise DimensionError(f"linear expects x[B,N], W[M,N], b[M]; got {x.shape}, {w.shape}, {b.shape}")
    if x.shape[1] != w.shape[1] or w.shape[0] != b.shape[0]:
        raise DimensionError(f"linear inner dimensions disagree: {x.shape}, {w.shape}, {b.shape}")
    return Linear.apply(x, w, b)


class Conv2d(Function):
    def forward(self, x, k, stride=1, pad=0):
        self.x_shape, self.stride, self.pad = x.shape, stride, pad
        xp = np.pad(x, ((0, 0), (0, 0), (pad, pad), (pad, pad))) if pad else x
        self.xp_shape = xp.shape
        kh, kw = k.shape[2:]
        self.windows = sliding_window_view(xp, (kh, kw), axis=(2, 3))[:, :, ::stride, ::stride]
        self.k = k
        out = np.tensordot(self.windows, k, axes=([1, 4, 5], [1, 2, 3]))
        return np.ascontiguousarray(out.transpose(0, 3, 1, 2))

    def backward(self, grad):
        s, p = self.stride, self.pad
        kh, kw = self.k.shape[2:]
        ho, wo = grad.shape[2:]
        dk = np.tensordot(grad, self.windows, axes=([0, 2, 3], [0, 2, 3]))
        dcols = np.tensordot(grad, self.k, axes=([1], [0]))
        dxp = np.zeros(self.xp_shape)
        for i in range(kh):
            for j in range(kw):
                dxp[:, :, i:i + s * ho:s, j:j + s * wo:s] += dcols[:, :, :, :, i, j].transpose(0, 3, 1, 2)
        h, w = self.x_shape[2:]
        dx = dxp[:, :, p:p + h, p:p + w] if p else dxp
        return dx, dk


def conv_output_size(size, k, stride, pad):
    span = size + 2 * pad - k
    if k > size + 2 * pad:
        raise DimensionError(f"kernel {k} larger than padded input {size + 2 * pad}")
    if span % stride:
        raise DimensionError(f"non-integral output size ({size}+2*{pad}-{k})/{stride}+1")
    return span // stride + 1


def conv2d(x, k, stride=1, pad=0):
    """Cross-correlation of x[B,C,H,W] with k[O,C,kh,kw]."""
    if stride < 1 or pad < 0:
        raise ContractError(f"stride must be >= 1 and pad >= 0, got {stride}, {pad}")
    if x.ndim != 4 or k.ndim != 4:
        raise DimensionError(f"conv2d expects 4-d input and kernel, got {x.shape}, {k.shape}")
    if x.shape[1] != k.shape[1]:
        raise DimensionError(f"conv2d channel mismatch: input {x.shape[1]}, kernel {k.shape[1]}")
    conv_output_size(x.shape[2], k.shape[2], stride, pad)
    conv_output_size(x.shape[3], k.shape[3], stride, pad)
    return Conv2d.apply(x, k, stride=stride, pad=pad)


class AvgPool2d(Function):
    def forward(self, x, k=2):
        self.x_shape, self.k = x.shape, k
        b, c, h, w = x.shape
        ho, wo = h // k, w // k
        self.cropped = (ho * k, wo * k)
        return x[:, :, :ho * k, :wo * k].reshape(b, c, ho, k, wo, k).mean(axis=(3, 5))

    def backward(self, grad):
        k = self.k
        spread = np.repeat(np.repeat(grad, k, axis=2), k, axis=3) / (k * k)
        out = np.zeros(self.x_shape)
        out[:, :, :self.cropped[0], :self.cropped[1]] = spread
        return (out,)


def avg_pool2d(x, k=2):
    if x.ndim != 4:
        raise DimensionError(f"avg_pool2d expects [B,C,H,W], got {x.shape}")
    if x.shape[2] < k or x.shape[3] < k:
        raise DimensionError(f"pool window {k} larger than input {x.shape[2:]}")
    return AvgPool2d.apply(x, k=k)


class SoftmaxCrossEntropy(Function):
    def forward(self, logits, labels=None):
        shifted = logits - logits.max(axis=1, keepdims=True)
        log_probs = shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))
        self.probs = np.exp(log_probs)
        self.labels = labels
        return np.asarray(-log_probs[np.arange(len(labels)), labels].mean())

    def backward(self, grad):
        out = self.probs.copy()
        out[np.arange(len(self.labels)), self.labels] -= 1.0
        return (out * (grad / len(self.labels)),)


def softmax_cross_entropy(logits, labels):
    """Mean negative log-likelihood of integer `labels` under softmax(logits)."""
    labels = np.asarray(labels, dtype=np.int64)
    if logits.ndim != 2 or labels.shape != (logits.shape[0],):
        raise DimensionError(f"logits {logits.shape} do not match labels {labels.shape}")
    if labels.size and (labels.min() < 0 or labels.max() >= logits.shape[1]):
        raise ContractError("label outside the logit range")
    return SoftmaxCrossEntropy.apply(logits, labels=labels)


# ===========================
# Spike nonlinearity
# ===========================

class SpikeMode(enum.Enum):
    EXACT_ZERO = 'exact_zero'  # true Heaviside derivative: gradient blockage
    SURROGATE = 'surrogate'    # Heaviside forward, sigmoid-derivative backward
    RELAXED = 'relaxed'        # sigmoid forward and backward; gradient checks only


@dataclass(frozen=True)
class SpikeBackward:
    mode: SpikeMode = SpikeMode.SURROGATE
    alpha: float = 4.0

    def __post_init__(self):
        if not self.alpha > 0:
            raise ContractError(f"surrogate steepness must be positive, got {self.alpha}")

    @classmethod
    def exact_zero(cls):
        return cls(SpikeMode.EXACT_ZERO)

    @classmethod
    def surrogate(cls, alpha=4.0):
        return cls(SpikeMode.SURROGATE, alpha)

    @classmethod
    def relaxed(cls, alpha=4.0):
        return cls(SpikeMode.RELAXED, alpha)


class Spike(Function):
    def forward(self, u, bw=None):
        self.bw = bw
        self.smooth = expit(bw.alpha * u)
        if bw.mode is SpikeMode.RELAXED:
            return self.smooth
        # ties at threshold fire
        return (u >= 0).astype(np.float64)

    def backward(self, grad):
        if self.bw.mode is SpikeMode.EXACT_ZERO:
            return (np.zeros_like(grad),)
        return (grad * self.bw.alpha * self.smooth * (1.0 - self.smooth),)


def spike(u, bw):
    return Spike.apply(u, bw=bw)


# ===========================
# Reverse pass and checking
# ===========================

def _topological_order(root):
    order, visited = [], set()
    stack_ = [(root, False)]
    while stack_:
        node, expanded = stack_.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in visited:
            continue
        visited.add(id(node))
        stack_.append((node, True))
        if node._ctx is not None:
            for parent in node._ctx.parents:
                if parent.requires_grad and id(parent) not in visited:
                    stack_.append((parent, False))
    return order


def backward(loss):
    """Accumulate d(loss)/d(leaf) into `.grad` of every leaf with requires_grad."""
    if loss.size != 1:
        raise ContractError(f"backward needs a scalar loss, got shape {loss.shape}")
    if not loss.requires_grad:
        return
    grads = {id(loss): np.ones_like(loss.data)}
    for node in reversed(_topological_order(loss)):
        grad = grads.pop(id(node), None)
        if grad is None:
            continue
        if node._ctx is None:
            node.grad = grad.copy() if node.grad is None else node.grad + grad
            continue
        for parent, parent_grad in zip(node._ctx.parents, node._ctx.backward(grad)):
            if parent_grad is None or not parent.requires_grad:
                continue
            key = id(parent)
            grads[key] = parent_grad if key not in grads else grads[key] + parent_grad


def grad_check(f, params, eps=1e-4, atol=1e-10):
    """
    Compare backward() against central finite differences.

    `f` is a zero-argument callable returning a scalar Tensor built from `params`.
    Returns the max over all parameter entries of
    |analytic - fd| / (|analytic| + |fd| + 1e-12); entries where both magnitudes
    are below `atol` count as agreeing.
    """
    if not 1e-6 <= eps <= 1e-3:
        raise ContractError(f"eps must lie in [1e-6, 1e-3], got {eps}")
    for p in params:
        p.zero_grad()
    loss = f()
    if not np.isfinite(loss.data).all():
        raise NumericError("loss is not finite at the check point")
    backward(loss)
    analytic = [p.grad if p.grad is not None else np.zeros(p.shape) for p in params]

    worst = 0.0
    with no_grad():
        for p, a in zip(params, analytic):
            for idx in np.ndindex(p.shape):
                original = p.data[idx]
                p.data[idx] = original + eps
                f_plus = f().item()
                p.data[idx] = original - eps
                f_minus = f().item()
                p.data[idx] = original
                if not (np.isfinite(f_plus) and np.isfinite(f_minus) and np.isfinite(a[idx])):
                    raise NumericError(f"non-finite value while checking entry {idx}")
                fd = (f_plus - f_minus) / (2.0 * eps)
                an = float(a[idx])
                if abs(an) < atol and abs(fd) < atol:
                    continue
                worst = max(worst, abs(an - fd) / (abs(an) + abs(fd) + 1e-12))
    return worst
