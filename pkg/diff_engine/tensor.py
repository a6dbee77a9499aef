"""
反向模式自动微分的节点和计算带
"""

import threading
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from shared.errors import ContractError

_state = threading.local()


def active_tape() -> Optional["Tape"]:
    """当前线程上启用的计算带"""
    stack = getattr(_state, "stack", None)
    return stack[-1] if stack else None


class Node:
    """计算图节点"""

    __slots__ = ("value", "_grad", "parents", "op_tag", "backward_fn",
                 "requires_grad", "is_leaf", "name")

    def __init__(self, value, parents: Sequence["Node"] = (), op_tag: str = "leaf",
                 backward_fn: Optional[Callable] = None, requires_grad: bool = False,
                 name: Optional[str] = None):
        self.value = np.asarray(value, dtype=np.float64)
        self._grad = None
        self.parents = tuple(parents)
        self.op_tag = op_tag
        self.backward_fn = backward_fn
        self.requires_grad = requires_grad
        self.is_leaf = not parents
        self.name = name

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.value.shape

    @property
    def grad(self) -> np.ndarray:
        if self._grad is None:
            return np.zeros_like(self.value)
        return self._grad

    def accumulate(self, g: np.ndarray) -> None:
        if self._grad is None:
            self._grad = np.array(g, dtype=np.float64).reshape(self.value.shape)
        else:
            self._grad = self._grad + g

    def zero_grad(self) -> None:
        self._grad = None

    def __repr__(self) -> str:
        return f"Node(op={self.op_tag}, shape={self.shape})"

    # 运算符语法糖，实现见 ops
    def __add__(self, other):
        from .ops import add, _lift
        return add(self, _lift(other, self))

    __radd__ = __add__

    def __sub__(self, other):
        from .ops import sub, _lift
        return sub(self, _lift(other, self))

    def __rsub__(self, other):
        from .ops import sub, _lift
        return sub(_lift(other, self), self)

    def __mul__(self, other):
        from .ops import mul, _lift
        return mul(self, _lift(other, self))

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    def __getitem__(self, key):
        from .ops import slice_
        return slice_(self, key)


class Tape:
    """按执行顺序记录原语的计算带"""

    def __init__(self):
        self.entries: List[Node] = []
        self.leaves: List[Node] = []

    def __enter__(self) -> "Tape":
        if not hasattr(_state, "stack"):
            _state.stack = []
        _state.stack.append(self)
        return self

    def __exit__(self, *exc) -> None:
        _state.stack.pop()

    def variable(self, value, name: Optional[str] = None) -> Node:
        """创建需要梯度的叶子节点（复制数值）"""
        node = Node(np.array(value, dtype=np.float64, copy=True), requires_grad=True, name=name)
        self.leaves.append(node)
        return node

    def record(self, node: Node) -> None:
        self.entries.append(node)

    def zero_grad(self) -> None:
        for node in self.leaves:
            node.zero_grad()

    def backward(self, loss: Node) -> None:
        backward(self, loss)


def constant(value) -> Node:
    """不参与求导的常量节点"""
    return Node(value)


def backward(tape: Tape, loss: Node) -> None:
    """从标量损失反向传播，叶子梯度累加"""
    if loss.value.size != 1:
        raise ContractError(f"backward needs a scalar loss, got shape {loss.shape}")
    for node in tape.entries:
        node.zero_grad()
    if not loss.requires_grad:
        return
    if loss.is_leaf:
        loss.accumulate(np.ones_like(loss.value))
        return
    loss._grad = np.ones_like(loss.value)
    for node in reversed(tape.entries):
        if node._grad is None:
            continue
        grads = node.backward_fn(node._grad)
        for parent, g in zip(node.parents, grads):
            if g is not None and parent.requires_grad:
                parent.accumulate(g)
