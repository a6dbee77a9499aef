"""
带分组的折线集合
按段存储绝对坐标、笔状态和组号，段 i 的绘制范围是点 i-1 到点 i（前一段落笔时）
"""

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from config.settings import SKETCH_SETTINGS
from shared.errors import ValidationError
from stroke_core import GroupLabels, PenState, Sketch


def _extent(points: np.ndarray) -> Tuple[float, float]:
    """前景范围；退化的维度取另一维，全部退化时取 1"""
    w, h = (points.max(axis=0) - points.min(axis=0)).tolist()
    if w <= 0 and h <= 0:
        return 1.0, 1.0
    return (w if w > 0 else h), (h if h > 0 else w)


@dataclass(frozen=True)
class PolylineGroups:
    """折线、每段组号和物体包围盒 (w, h)"""
    points: np.ndarray                 # (N, 2) 绝对坐标
    pen: np.ndarray                    # (N,) 0 落笔 / 1 抬笔，每条折线末点为 1
    labels: Optional[np.ndarray]       # (N,) 组号，未分组时为 None
    bbox: Tuple[float, float]
    category: Optional[str] = None

    def __post_init__(self):
        points = np.asarray(self.points, dtype=np.float64).reshape(-1, 2)
        pen = np.asarray(self.pen, dtype=int).reshape(-1)
        if len(points) == 0 or len(pen) != len(points):
            raise ValidationError("polylines need at least one point and one pen state per point")
        if pen[-1] != PenState.UP.value:
            raise ValidationError("the last polyline must end with pen UP")
        w, h = self.bbox
        if not (w > 0 and h > 0):
            raise ValidationError(f"bbox width and height must be > 0, got {self.bbox}")
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "pen", pen)
        object.__setattr__(self, "bbox", (float(w), float(h)))
        if self.labels is not None:
            labels = GroupLabels(self.labels).labels
            if len(labels) != len(points):
                raise ValidationError(f"{len(labels)} labels for {len(points)} segments")
            object.__setattr__(self, "labels", labels)

    def __len__(self) -> int:
        return len(self.points)

    @classmethod
    def from_polylines(cls, polylines: Sequence[np.ndarray], bbox: Optional[Tuple[float, float]] = None,
                       labels: Optional[Sequence[int]] = None, category: Optional[str] = None
                       ) -> "PolylineGroups":
        chains = [np.asarray(p, dtype=np.float64).reshape(-1, 2) for p in polylines]
        chains = [c for c in chains if len(c)]
        if not chains:
            raise ValidationError("no non-empty polylines")
        points = np.concatenate(chains, axis=0)
        pen = np.zeros(len(points), dtype=int)
        pen[np.cumsum([len(c) for c in chains]) - 1] = PenState.UP.value
        return cls(points, pen, labels, bbox or _extent(points), category)

    @classmethod
    def from_sketch(cls, sketch: Sketch, labels: Optional[GroupLabels] = None,
                    bbox: Optional[Tuple[float, float]] = None) -> "PolylineGroups":
        points = sketch.absolute_points()
        values = labels.labels if isinstance(labels, GroupLabels) else labels
        return cls(points, sketch.pen, values, bbox or _extent(points), sketch.category)

    def with_labels(self, labels) -> "PolylineGroups":
        values = labels.labels if isinstance(labels, GroupLabels) else labels
        return PolylineGroups(self.points, self.pen, values, self.bbox, self.category)

    @property
    def polylines(self) -> List[np.ndarray]:
        ends = np.flatnonzero(self.pen == PenState.UP.value) + 1
        return [self.points[a:b] for a, b in zip(np.concatenate([[0], ends[:-1]]), ends)]

    @property
    def drawn(self) -> np.ndarray:
        """段是否为从上一点画来的线段（笔画首段只是一个点）"""
        return np.concatenate([[False], self.pen[:-1] == PenState.DOWN.value])

    def segment_lengths(self) -> np.ndarray:
        steps = np.diff(self.points, axis=0, prepend=self.points[:1])
        return np.where(self.drawn, np.hypot(steps[:, 0], steps[:, 1]), 0.0)

    def segment_means(self) -> np.ndarray:
        """每段组成点的平均位置"""
        previous = np.vstack([self.points[:1], self.points[:-1]])
        return np.where(self.drawn[:, None], 0.5 * (previous + self.points), self.points)

    def subset(self, keep: np.ndarray) -> "PolylineGroups":
        """保留部分段；下一原始段被删除处抬笔，避免跨越空隙画线"""
        keep = np.asarray(keep, dtype=bool)
        if not keep.any():
            raise ValidationError("cannot remove every segment")
        next_removed = np.concatenate([~keep[1:], [True]])
        pen = np.where(next_removed, PenState.UP.value, self.pen)
        labels = self.labels[keep] if self.labels is not None else None
        return PolylineGroups(self.points[keep], pen[keep], labels, self.bbox, self.category)

    def to_sketch(self, provenance: Optional[str] = None,
                  max_segments: int = SKETCH_SETTINGS["max_segments"]) -> Sketch:
        """转换为以 (0, 0) 为原点的段偏移形式"""
        offsets = np.diff(self.points, axis=0, prepend=np.zeros((1, 2)))
        deltas = np.column_stack([offsets, self.pen.astype(np.float64)])
        return Sketch(deltas, category=self.category, provenance=provenance, max_segments=max_segments)
