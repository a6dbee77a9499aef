"""
Adam 优化器
m(t) = b1 * m(t-1) + (1 - b1) * g
v(t) = b2 * v(t-1) + (1 - b2) * g**2
theta(t) = theta(t-1) - lr * m_hat / (sqrt(v_hat) + eps)
"""

from dataclasses import dataclass
from typing import Dict, Mapping, Tuple

import numpy as np


@dataclass
class AdamState:
    """一阶/二阶矩和步数"""
    m: Dict[str, np.ndarray]
    v: Dict[str, np.ndarray]
    step: int = 0

    @classmethod
    def zeros_like(cls, arrays: Mapping[str, np.ndarray]) -> "AdamState":
        return cls({k: np.zeros_like(a) for k, a in arrays.items()},
                   {k: np.zeros_like(a) for k, a in arrays.items()}, 0)


def learning_rate(lr0: float, decay: float, step: int) -> float:
    """指数衰减学习率 lr0 · decay^step"""
    return lr0 * decay ** step


def clip_by_global_norm(grads: Mapping[str, np.ndarray], max_norm: float
                        ) -> Tuple[Dict[str, np.ndarray], float]:
    """按全局范数裁剪梯度，max_norm <= 0 时不裁剪"""
    norm = float(np.sqrt(sum(float((g * g).sum()) for g in grads.values())))
    if max_norm <= 0 or norm <= max_norm:
        return dict(grads), norm
    scale = max_norm / norm
    return {k: g * scale for k, g in grads.items()}, norm


def adam_update(params: Mapping[str, np.ndarray], grads: Mapping[str, np.ndarray],
                state: AdamState, lr: float, beta1: float, beta2: float, epsilon: float
                ) -> Tuple[Dict[str, np.ndarray], AdamState]:
    """一步 Adam 更新，返回新参数和新状态（不修改输入）"""
    t = state.step + 1
    new_params, new_m, new_v = {}, {}, {}
    for name, theta in params.items():
        g = grads[name]
        m = beta1 * state.m[name] + (1.0 - beta1) * g
        v = beta2 * state.v[name] + (1.0 - beta2) * g * g
        m_hat = m / (1.0 - beta1 ** t)
        v_hat = v / (1.0 - beta2 ** t)
        new_params[name] = theta - lr * m_hat / (np.sqrt(v_hat) + epsilon)
        new_m[name], new_v[name] = m, v
    return new_params, AdamState(new_m, new_v, t)
