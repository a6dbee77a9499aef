"""
草图预处理
归一化、数据增强（笔画删除和扭曲）和按类别划分
"""

from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from shared.errors import ConfigurationError, NormalizationError
from .sketch import GroupLabels, Sketch


def normalize(sketch: Sketch) -> Sketch:
    """用所有 (dx, dy) 分量的标准差统一缩放偏移"""
    if len(sketch) < 2:
        raise NormalizationError("normalization needs at least two segments")
    scale = float(np.std(sketch.offsets))
    if not np.isfinite(scale) or scale == 0.0:
        raise NormalizationError("offsets have zero standard deviation")
    deltas = np.array(sketch.deltas)
    deltas[:, :2] /= scale
    return sketch.with_deltas(deltas)


def augment(sketch: Sketch, labels: GroupLabels, params: Dict[str, float],
            rng: np.random.Generator) -> Tuple[Sketch, GroupLabels]:
    """随机删除整笔画并按比例扭曲偏移"""
    removal_prob = float(params.get("removal_prob", 0.0))
    distort_scale = float(params.get("distort_scale", 0.0))
    if not 0.0 <= removal_prob <= 1.0:
        raise ConfigurationError(f"removal_prob must lie in [0, 1), got {removal_prob}")
    if distort_scale < 0.0:
        raise ConfigurationError(f"distort_scale must be >= 0, got {distort_scale}")
    if len(labels) != len(sketch):
        raise ConfigurationError("labels and sketch lengths differ")

    stroke_ids = sketch.stroke_ids()
    n_strokes = int(stroke_ids[-1]) + 1
    keep_stroke = rng.random(n_strokes) >= removal_prob
    if not keep_stroke.any():
        keep_stroke[rng.integers(n_strokes)] = True
    keep = keep_stroke[stroke_ids]

    # 被删除笔画的位移并入下一个保留段，保持其余笔画的绝对位置
    deltas = np.array(sketch.deltas)
    carry = np.zeros(2)
    for i in range(len(deltas)):
        if keep[i]:
            deltas[i, :2] += carry
            carry = np.zeros(2)
        else:
            carry += deltas[i, :2]
    deltas = deltas[keep]

    if distort_scale > 0.0:
        factors = rng.uniform(1.0 - distort_scale, 1.0 + distort_scale, size=(len(deltas), 1))
        deltas[:, :2] *= factors
    return sketch.with_deltas(deltas), labels.subset(keep)


def split_by_category(records: Iterable[Tuple[Sketch, Optional[GroupLabels]]],
                      held_out: Sequence[str]) -> Tuple[List, List]:
    """按类别划分为可见集和未见集"""
    held = set(held_out)
    seen, unseen = [], []
    for record in records:
        (unseen if record[0].category in held else seen).append(record)
    return seen, unseen
