"""
划分比较指标
信息变差 VOI（比特）、Rand 指数 PRI 和分割覆盖率 SC，段可按权重计
"""

from typing import Optional, Sequence, Tuple, Union

import numpy as np
from scipy.sparse import coo_matrix
from scipy.stats import entropy

from config.settings import EVAL_SETTINGS
from shared.errors import ContractError
from stroke_core import GroupLabels

LabelsLike = Union[GroupLabels, Sequence[int], np.ndarray]


def _labels(value: LabelsLike) -> np.ndarray:
    if isinstance(value, GroupLabels):
        return value.labels
    return np.asarray(value, dtype=int).reshape(-1)


def _aligned(a: LabelsLike, b: LabelsLike, weights: Optional[Sequence[float]]
             ) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    a, b = _labels(a), _labels(b)
    if a.shape != b.shape:
        raise ContractError(f"partitions have different lengths: {len(a)} vs {len(b)}")
    if a.size == 0:
        raise ContractError("partitions are empty")
    w = np.ones(a.shape) if weights is None else np.asarray(weights, dtype=np.float64).reshape(-1)
    if w.shape != a.shape or np.any(w < 0) or w.sum() <= 0:
        raise ContractError("weights must be non-negative, aligned with labels and not all zero")
    return a, b, w


def contingency(a: LabelsLike, b: LabelsLike, weights: Optional[Sequence[float]] = None) -> np.ndarray:
    """加权列联表，行对应 a 的组，列对应 b 的组"""
    a, b, w = _aligned(a, b, weights)
    _, rows = np.unique(a, return_inverse=True)
    _, cols = np.unique(b, return_inverse=True)
    return coo_matrix((w, (rows.reshape(-1), cols.reshape(-1)))).toarray()


def voi(a: LabelsLike, b: LabelsLike, weights: Optional[Sequence[float]] = None,
        base: float = EVAL_SETTINGS["log_base"]) -> float:
    """VOI = H(a|b) + H(b|a) = 2H(a,b) - H(a) - H(b)"""
    table = contingency(a, b, weights)
    joint = entropy(table.ravel(), base=base)
    h_a = entropy(table.sum(axis=1), base=base)
    h_b = entropy(table.sum(axis=0), base=base)
    return max(0.0, float(2.0 * joint - h_a - h_b))


def pri(a: LabelsLike, b: LabelsLike, weights: Optional[Sequence[float]] = None) -> float:
    """所有无序段对中两个划分一致（同组或异组）的比例"""
    a, b, w = _aligned(a, b, weights)
    n = len(a)
    if n < 2:
        raise ContractError("pri needs at least two segments")
    upper = np.triu(np.ones((n, n), dtype=bool), 1)
    agree = (a[:, None] == a[None, :]) == (b[:, None] == b[None, :])
    pair_weight = np.outer(w, w)[upper]
    if pair_weight.sum() <= 0:
        raise ContractError("pri needs at least two segments with positive weight")
    return float((agree[upper] * pair_weight).sum() / pair_weight.sum())


def _covering(machine: np.ndarray, human: np.ndarray, w: np.ndarray) -> float:
    table = contingency(human, machine, w)
    human_sizes = table.sum(axis=1)
    machine_sizes = table.sum(axis=0)
    union = human_sizes[:, None] + machine_sizes[None, :] - table
    overlap = np.divide(table, union, out=np.zeros_like(table), where=union > 0)
    return float((human_sizes * overlap.max(axis=1)).sum() / w.sum())


def sc(machine: LabelsLike, human: LabelsLike, weights: Optional[Sequence[float]] = None,
       symmetric: bool = EVAL_SETTINGS["symmetric_sc"]) -> float:
    """机器划分对人工划分的覆盖率；symmetric 时取两个方向的平均"""
    m, h, w = _aligned(machine, human, weights)
    forward = _covering(m, h, w)
    if not symmetric:
        return forward
    return 0.5 * (forward + _covering(h, m, w))
