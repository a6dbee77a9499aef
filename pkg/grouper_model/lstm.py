"""
门控循环单元（输入/遗忘/输出门）
"""

from typing import List, Tuple

from diff_engine import Node, affine, concat, sigmoid, slice_, tanh


def lstm_step(x: Node, h: Node, c: Node, W: Node, b: Node) -> Tuple[Node, Node]:
    """单步更新，门顺序为 i, f, g, o"""
    hidden = h.shape[0]
    gates = affine(W, concat([x, h]), b)
    i = sigmoid(slice_(gates, slice(0, hidden)))
    f = sigmoid(slice_(gates, slice(hidden, 2 * hidden)))
    g = tanh(slice_(gates, slice(2 * hidden, 3 * hidden)))
    o = sigmoid(slice_(gates, slice(3 * hidden, 4 * hidden)))
    c_new = f * c + i * g
    return o * tanh(c_new), c_new


def lstm_run(inputs: List[Node], h: Node, c: Node, W: Node, b: Node) -> List[Node]:
    """依次处理输入，返回每步隐状态"""
    states = []
    for x in inputs:
        h, c = lstm_step(x, h, c, W, b)
        states.append(h)
    return states
