"""
草图分组推理
模型分组（测试时取隐变量均值）和基于笔画端点邻近度的基线
"""

from typing import Tuple

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial.distance import cdist

from config.settings import INFERENCE_SETTINGS
from grouper_model import forward_affinity
from shared.errors import ContractError, NormalizationError, SketchLengthError
from shared.logger import get_logger
from stroke_core import AffinityKind, AffinityMatrix, GroupLabels, Sketch, canonicalize, normalize
from .clustering import cluster_affinity

logger = get_logger(__name__)


def group(sketch: Sketch, model) -> Tuple[GroupLabels, AffinityMatrix]:
    """归一化 -> 编码 -> z=mu -> 解码 -> 亲和矩阵 -> 聚类

    model 可以是检查点或参数快照
    """
    params = getattr(model, "params", model)
    limit = params.hyper.max_segments
    if len(sketch) > limit:
        raise SketchLengthError(len(sketch), limit)
    if len(sketch) == 1:
        return GroupLabels(np.zeros(1, dtype=int)), AffinityMatrix(np.ones((1, 1)), AffinityKind.PREDICTED)
    try:
        sketch = normalize(sketch)
    except NormalizationError as e:
        logger.warning(f"grouping unnormalized sketch: {e}")
    G_hat = forward_affinity(sketch, params)
    return cluster_affinity(G_hat), G_hat


def baseline_proximity(sketch: Sketch,
                       gap_threshold: float = INFERENCE_SETTINGS["proximity_gap"]) -> GroupLabels:
    """端点最小距离小于阈值的笔画归为一组（传递闭包）"""
    if not gap_threshold > 0:
        raise ContractError(f"gap_threshold must be > 0, got {gap_threshold}")
    strokes = sketch.strokes()
    endpoints = [np.vstack([s[0], s[-1]]) for s in strokes]
    n = len(strokes)
    adjacency = np.zeros((n, n), dtype=bool)
    for a in range(n):
        for b in range(a + 1, n):
            adjacency[a, b] = cdist(endpoints[a], endpoints[b]).min() < gap_threshold
    _, stroke_groups = connected_components(csr_matrix(adjacency), directed=False)
    return GroupLabels(canonicalize(stroke_groups[sketch.stroke_ids()]))
