"""
可微原语
仿射、逐元素运算、归约、softmax、拼接、切片和 l2 归一化
"""

from typing import Optional, Sequence, Tuple

import numpy as np

from shared.errors import DomainError, ShapeError
from .tensor import Node, active_tape, constant


def _make(value: np.ndarray, parents: Sequence[Node], op_tag: str, backward_fn) -> Node:
    value = np.asarray(value, dtype=np.float64)
    if not np.all(np.isfinite(value)):
        raise DomainError(f"{op_tag} produced non-finite values")
    tape = active_tape()
    requires_grad = tape is not None and any(p.requires_grad for p in parents)
    node = Node(value, parents, op_tag, backward_fn if requires_grad else None, requires_grad)
    if requires_grad:
        tape.record(node)
    return node


def _lift(other, like: Node) -> Node:
    if isinstance(other, Node):
        return other
    return constant(np.full(like.shape, float(other)))


def _same_shape(op_tag: str, a: Node, b: Node) -> None:
    if a.shape != b.shape:
        raise ShapeError(f"{op_tag}: shapes {a.shape} and {b.shape} differ")


def affine(W: Node, x: Node, b: Node) -> Node:
    """W·x + b；x 可以是向量 (in,) 或按行排列的批 (B, in)"""
    if W.value.ndim != 2 or b.shape != (W.shape[0],) or x.value.ndim not in (1, 2) \
            or x.shape[-1] != W.shape[1]:
        raise ShapeError(f"affine: W{W.shape}, x{x.shape}, b{b.shape} incompatible")
    value = x.value @ W.value.T + b.value

    def backward_fn(g):
        if x.value.ndim == 1:
            return np.outer(g, x.value), g @ W.value, g
        return g.T @ x.value, g @ W.value, g.sum(axis=0)

    return _make(value, (W, x, b), "affine", backward_fn)


def add(a: Node, b: Node) -> Node:
    _same_shape("add", a, b)
    return _make(a.value + b.value, (a, b), "add", lambda g: (g, g))


def sub(a: Node, b: Node) -> Node:
    _same_shape("sub", a, b)
    return _make(a.value - b.value, (a, b), "sub", lambda g: (g, -g))


def mul(a: Node, b: Node) -> Node:
    _same_shape("mul", a, b)
    return _make(a.value * b.value, (a, b), "mul", lambda g: (g * b.value, g * a.value))


def tanh(x: Node) -> Node:
    y = np.tanh(x.value)
    return _make(y, (x,), "tanh", lambda g: (g * (1.0 - y * y),))


def sigmoid(x: Node) -> Node:
    y = 0.5 * (1.0 + np.tanh(0.5 * x.value))
    return _make(y, (x,), "sigmoid", lambda g: (g * y * (1.0 - y),))


def exp(x: Node) -> Node:
    with np.errstate(over="ignore"):
        y = np.exp(x.value)
    return _make(y, (x,), "exp", lambda g: (g * y,))


def log(x: Node) -> Node:
    if np.any(x.value <= 0.0):
        raise DomainError("log of non-positive input")
    return _make(np.log(x.value), (x,), "log", lambda g: (g / x.value,))


def abs_(x: Node) -> Node:
    # 0 处取次梯度 0
    return _make(np.abs(x.value), (x,), "abs", lambda g: (g * np.sign(x.value),))


def square(x: Node) -> Node:
    return _make(x.value * x.value, (x,), "square", lambda g: (2.0 * g * x.value,))


def maximum(x: Node, c: float) -> Node:
    """与常数取最大值"""
    mask = x.value > c
    return _make(np.where(mask, x.value, c), (x,), "maximum", lambda g: (g * mask,))


def sum_(x: Node, axis: Optional[int] = None) -> Node:
    value = x.value.sum(axis=axis)

    def backward_fn(g):
        if axis is None:
            return (np.full(x.shape, float(g)),)
        return (np.broadcast_to(np.expand_dims(g, axis), x.shape).copy(),)

    return _make(value, (x,), "sum", backward_fn)


def mean(x: Node, axis: Optional[int] = None) -> Node:
    count = x.value.size if axis is None else x.shape[axis]
    total = sum_(x, axis)
    return total * (1.0 / count)


def softmax(x: Node) -> Node:
    """沿最后一维的 softmax"""
    shifted = x.value - x.value.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    y = e / e.sum(axis=-1, keepdims=True)

    def backward_fn(g):
        return (y * (g - (g * y).sum(axis=-1, keepdims=True)),)

    return _make(y, (x,), "softmax", backward_fn)


def concat(nodes: Sequence[Node], axis: int = -1) -> Node:
    nodes = list(nodes)
    if not nodes:
        raise ShapeError("concat of nothing")
    try:
        value = np.concatenate([n.value for n in nodes], axis=axis)
    except ValueError as e:
        raise ShapeError(f"concat: {e}")
    sizes = np.cumsum([n.shape[axis] for n in nodes])[:-1]

    def backward_fn(g):
        return tuple(np.split(g, sizes, axis=axis))

    return _make(value, nodes, "concat", backward_fn)


def slice_(x: Node, key) -> Node:
    """按 numpy 下标取子数组，支持整数数组下标"""
    try:
        value = np.array(x.value[key], dtype=np.float64)
    except IndexError as e:
        raise ShapeError(f"slice: {e}")

    def backward_fn(g):
        out = np.zeros_like(x.value)
        np.add.at(out, key, g)
        return (out,)

    return _make(value, (x,), "slice", backward_fn)


def reshape(x: Node, shape: Tuple[int, ...]) -> Node:
    try:
        value = x.value.reshape(shape)
    except ValueError as e:
        raise ShapeError(f"reshape: {e}")
    return _make(value, (x,), "reshape", lambda g: (g.reshape(x.shape),))


def l2_normalize(x: Node) -> Node:
    """沿最后一维做 l2 归一化"""
    norm = np.sqrt((x.value * x.value).sum(axis=-1, keepdims=True))
    if np.any(norm == 0.0):
        raise DomainError("l2-normalize of a zero-norm vector")
    y = x.value / norm

    def backward_fn(g):
        return ((g - y * (g * y).sum(axis=-1, keepdims=True)) / norm,)

    return _make(y, (x,), "l2_normalize", backward_fn)


def logsumexp(x: Node, axis: int = -1) -> Node:
    """数值稳定的 log-sum-exp，由原语组合而成"""
    shift = x.value.max(axis=axis, keepdims=True)
    shifted = sub(x, constant(np.broadcast_to(shift, x.shape).copy()))
    return add(log(sum_(exp(shifted), axis=axis)), constant(np.squeeze(shift, axis=axis)))
