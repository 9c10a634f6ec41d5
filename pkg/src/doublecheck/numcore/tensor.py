"""Dense float64 tensors with tape-free reverse-mode differentiation.

Each result tensor keeps references to its parents and a closure that maps
the output gradient to parent gradients. :func:`backward` walks the graph
in reverse topological order and accumulates gradients additively, so a
tensor consumed twice receives the sum of both contributions.
"""
import numpy as np

from ..errors import ContractError, DimensionError, DomainError

__all__ = [
    "Tensor", "Parameter", "as_tensor", "topological_order", "backward",
    "matmul", "add", "sub", "mul", "div", "scale", "neg",
    "tanh", "sigmoid", "exp", "log", "clamp_min", "elementwise",
    "tensor_sum", "tensor_mean", "reshape", "expand_last", "getitem",
    "softmax", "detach",
]


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "name", "_parents", "_backward")

    def __init__(self, data, requires_grad=False, name=None, _parents=(), _backward=None):
        arr = np.array(data, dtype=np.float64, copy=True) if not isinstance(data, np.ndarray) \
            else np.ascontiguousarray(data, dtype=np.float64)
        self.data = arr
        self.grad = None
        self.requires_grad = bool(requires_grad)
        self.name = name
        self._parents = _parents
        self._backward = _backward

    @property
    def shape(self):
        return self.data.shape

    @property
    def ndim(self):
        return self.data.ndim

    @property
    def size(self):
        return self.data.size

    def numpy(self):
        return self.data

    def item(self):
        return float(self.data.reshape(()))

    def zero_grad(self):
        self.grad = None

    def detach(self):
        return Tensor(self.data)

    def backward(self):
        backward(self)

    def __repr__(self):
        label = f", name={self.name!r}" if self.name else ""
        return f"Tensor(shape={self.shape}{label}, requires_grad={self.requires_grad})"

    def __add__(self, other):
        return add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __mul__(self, other):
        return mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return div(self, other)

    def __rtruediv__(self, other):
        return div(other, self)

    def __neg__(self):
        return neg(self)

    def __matmul__(self, other):
        return matmul(self, other)

    def __getitem__(self, index):
        return getitem(self, index)

    def sum(self, axis=None, keepdims=False):
        return tensor_sum(self, axis, keepdims)

    def mean(self, axis=None, keepdims=False):
        return tensor_mean(self, axis, keepdims)

    def reshape(self, *shape):
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        return reshape(self, shape)

    def tanh(self):
        return tanh(self)

    def sigmoid(self):
        return sigmoid(self)

    def exp(self):
        return exp(self)

    def log(self):
        return log(self)


class Parameter(Tensor):
    """A leaf tensor that always requires a gradient."""

    __slots__ = ()

    def __init__(self, data, name=None):
        super().__init__(data, requires_grad=True, name=name)


def as_tensor(x):
    return x if isinstance(x, Tensor) else Tensor(x)


def _result(data, parents, backward_fn):
    needs = any(p.requires_grad for p in parents)
    if not needs:
        return Tensor(data)
    return Tensor(data, requires_grad=True, _parents=parents, _backward=backward_fn)


def topological_order(root):
    """Nodes reachable from ``root`` that require grad, inputs first."""
    order, seen = [], set()
    stack = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in seen or not node.requires_grad:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for parent in reversed(node._parents):
            if id(parent) not in seen:
                stack.append((parent, False))
    return order


def backward(loss):
    """Populate ``.grad`` on every tensor that ``loss`` depends on.

    Leaf gradients accumulate across calls until zeroed; interior
    gradients are recomputed from scratch each call.
    """
    if loss.data.size != 1:
        raise ContractError(f"backward needs a scalar loss, got shape {loss.shape}")
    if not loss.requires_grad:
        return
    order = topological_order(loss)
    for node in order:
        if node._backward is not None:
            node.grad = None
    loss.grad = np.ones_like(loss.data) if loss.grad is None or loss._backward is not None \
        else loss.grad + 1.0
    for node in reversed(order):
        if node._backward is None or node.grad is None:
            continue
        grads = node._backward(node.grad)
        for parent, g in zip(node._parents, grads):
            if g is None or not parent.requires_grad:
                continue
            if parent.grad is None:
                # grads are never updated in place, so fresh writable arrays can be shared
                g = np.asarray(g, dtype=np.float64)
                if not g.flags.writeable:
                    g = g.copy()
                parent.grad = g.reshape(parent.shape)
            else:
                parent.grad = parent.grad + g


def _unbroadcast(g, shape):
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for axis, n in enumerate(shape):
        if n == 1 and g.shape[axis] != 1:
            g = g.sum(axis=axis, keepdims=True)
    return g


def _broadcast_shape(a, b, op):
    try:
        return np.broadcast_shapes(a.shape, b.shape)
    except ValueError:
        raise DimensionError(f"{op}: incompatible shapes {a.shape} and {b.shape}") from None


def detach(x):
    return as_tensor(x).detach()


def matmul(a, b):
    """Matrix product; leading axes of ``a`` are treated as batch axes when ``b`` is 2-D."""
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim < 1 or b.ndim < 1 or a.shape[-1] != b.shape[0 if b.ndim == 1 else -2]:
        raise DimensionError(f"matmul: cannot multiply shapes {a.shape} and {b.shape}")
    if b.ndim > 2:
        raise DimensionError(f"matmul: right operand must be 1-D or 2-D, got {b.shape}")
    out = a.data @ b.data

    def _back(g):
        bm = b.data if b.ndim == 2 else b.data[:, None]
        gm = g if b.ndim == 2 else g[..., None]
        ga = gm @ bm.T
        if a.ndim == 1:
            ga = ga.reshape(a.shape)
        a2 = a.data.reshape(-1, a.shape[-1])
        gb = a2.T @ gm.reshape(-1, bm.shape[1])
        return ga, gb.reshape(b.shape)

    return _result(out, (a, b), _back)


def add(a, b):
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape(a, b, "add")
    return _result(a.data + b.data, (a, b),
                   lambda g: (_unbroadcast(g, a.shape), _unbroadcast(g, b.shape)))


def sub(a, b):
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape(a, b, "sub")
    return _result(a.data - b.data, (a, b),
                   lambda g: (_unbroadcast(g, a.shape), -_unbroadcast(g, b.shape)))


def mul(a, b):
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape(a, b, "mul")
    return _result(a.data * b.data, (a, b),
                   lambda g: (_unbroadcast(g * b.data, a.shape), _unbroadcast(g * a.data, b.shape)))


def div(a, b):
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape(a, b, "div")
    out = a.data / b.data
    return _result(out, (a, b),
                   lambda g: (_unbroadcast(g / b.data, a.shape), _unbroadcast(-g * out / b.data, b.shape)))


def scale(a, factor):
    a = as_tensor(a)
    factor = float(factor)
    return _result(a.data * factor, (a,), lambda g: (g * factor,))


def neg(a):
    return scale(a, -1.0)


def tanh(a):
    a = as_tensor(a)
    out = np.tanh(a.data)
    return _result(out, (a,), lambda g: (g * (1.0 - out * out),))


def _stable_sigmoid(z):
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def sigmoid(a):
    a = as_tensor(a)
    out = _stable_sigmoid(a.data)
    return _result(out, (a,), lambda g: (g * out * (1.0 - out),))


def exp(a):
    a = as_tensor(a)
    out = np.exp(a.data)
    return _result(out, (a,), lambda g: (g * out,))


def log(a):
    a = as_tensor(a)
    if np.any(a.data <= 0):
        raise DomainError("log of non-positive value")
    return _result(np.log(a.data), (a,), lambda g: (g / a.data,))


def clamp_min(a, lo):
    """``max(a, lo)``; the gradient is zero where the clamp is active. NaN passes through."""
    a = as_tensor(a)
    active = ~(a.data < lo)
    return _result(np.where(active, a.data, lo), (a,), lambda g: (g * active,))


_ELEMENTWISE = {"add": add, "sub": sub, "mul": mul, "div": div, "tanh": tanh,
                "sigmoid": sigmoid, "exp": exp, "log": log, "scale": scale, "neg": neg}


def elementwise(kind, *operands):
    """Dispatch by name: ``elementwise("tanh", x)``, ``elementwise("scale", x, 0.5)``."""
    try:
        fn = _ELEMENTWISE[kind]
    except KeyError:
        raise ContractError(f"unknown elementwise kind {kind!r}") from None
    return fn(*operands)


def tensor_sum(a, axis=None, keepdims=False):
    a = as_tensor(a)
    out = a.data.sum(axis=axis, keepdims=keepdims)

    def _back(g):
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        return (np.broadcast_to(g, a.shape),)

    return _result(out, (a,), _back)


def tensor_mean(a, axis=None, keepdims=False):
    a = as_tensor(a)
    n = a.data.size if axis is None else np.prod([a.shape[ax] for ax in np.atleast_1d(axis)])
    return scale(tensor_sum(a, axis, keepdims), 1.0 / n)


def reshape(a, shape):
    a = as_tensor(a)
    try:
        out = a.data.reshape(shape)
    except ValueError:
        raise DimensionError(f"reshape: cannot view {a.shape} as {shape}") from None
    return _result(out, (a,), lambda g: (g.reshape(a.shape),))


def expand_last(a):
    """Append a unit axis, e.g. weights ``(B, T)`` to ``(B, T, 1)`` for broadcasting."""
    a = as_tensor(a)
    return reshape(a, a.shape + (1,))


def getitem(a, index):
    a = as_tensor(a)
    out = a.data[index]

    def _back(g):
        full = np.zeros_like(a.data)
        np.add.at(full, index, g)
        return (full,)

    return _result(np.array(out, dtype=np.float64), (a,), _back)


def softmax(e, axis=-1, mask=None):
    """Softmax along ``axis`` with max-subtraction.

    ``mask`` (bool, broadcastable) marks valid entries; invalid entries get
    exactly zero probability and zero gradient.
    """
    e = as_tensor(e)
    if e.data.size == 0 or e.shape[axis] == 0:
        raise DomainError("softmax of an empty vector")
    x = e.data
    if mask is not None:
        mask = np.broadcast_to(np.asarray(mask, dtype=bool), x.shape)
        if not mask.any(axis=axis).all():
            raise DomainError("softmax: every position masked")
        x = np.where(mask, x, -np.inf)
    shifted = x - x.max(axis=axis, keepdims=True)
    ex = np.exp(shifted)
    out = ex / ex.sum(axis=axis, keepdims=True)

    def _back(g):
        return (out * (g - (g * out).sum(axis=axis, keepdims=True)),)

    return _result(out, (e,), _back)
