"""
草图数据模型
笔画段序列、分组标签和亲和矩阵
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from config.settings import SKETCH_SETTINGS
from shared.errors import SketchLengthError, ValidationError


class PenState(Enum):
    """笔状态"""
    DOWN = 0   # 继续当前笔画
    UP = 1     # 该点结束一个笔画


class AffinityKind(Enum):
    """亲和矩阵类型"""
    GROUND_TRUTH = "ground_truth"
    PREDICTED = "predicted"


@dataclass(frozen=True)
class SegmentDelta:
    """单个笔画段 (dx, dy, pen)"""
    dx: float
    dy: float
    pen: PenState

    def __post_init__(self):
        if not (np.isfinite(self.dx) and np.isfinite(self.dy)):
            raise ValidationError(f"segment offsets must be finite, got ({self.dx}, {self.dy})")
        if not isinstance(self.pen, PenState):
            raise ValidationError(f"pen must be a PenState, got {self.pen!r}")


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, dtype=np.float64, copy=True)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class Sketch:
    """笔画段序列，deltas 形状为 (N, 3): dx, dy, pen"""
    deltas: np.ndarray
    category: Optional[str] = None
    provenance: Optional[str] = None
    max_segments: int = field(default=SKETCH_SETTINGS["max_segments"], compare=False, repr=False)

    def __post_init__(self):
        deltas = np.asarray(self.deltas, dtype=np.float64)
        if deltas.ndim != 2 or deltas.shape[1] != 3:
            raise ValidationError(f"deltas must have shape (N, 3), got {deltas.shape}")
        n = deltas.shape[0]
        if n < 1:
            raise ValidationError("a sketch needs at least one segment")
        if n > self.max_segments:
            raise SketchLengthError(n, self.max_segments)
        if not np.all(np.isfinite(deltas[:, :2])):
            raise ValidationError("segment offsets must be finite")
        if not np.all(np.isin(deltas[:, 2], (0.0, 1.0))):
            raise ValidationError("pen state must be 0 (DOWN) or 1 (UP)")
        if deltas[-1, 2] != PenState.UP.value:
            raise ValidationError("last segment must have pen UP")
        object.__setattr__(self, "deltas", _frozen(deltas))

    def __len__(self) -> int:
        return self.deltas.shape[0]

    def __eq__(self, other) -> bool:
        if not isinstance(other, Sketch):
            return NotImplemented
        return (np.array_equal(self.deltas, other.deltas)
                and self.category == other.category
                and self.provenance == other.provenance)

    __hash__ = None

    @property
    def segments(self) -> Tuple[SegmentDelta, ...]:
        return tuple(SegmentDelta(float(dx), float(dy), PenState(int(p)))
                     for dx, dy, p in self.deltas)

    @property
    def offsets(self) -> np.ndarray:
        return self.deltas[:, :2]

    @property
    def pen(self) -> np.ndarray:
        return self.deltas[:, 2].astype(int)

    @classmethod
    def from_segments(cls, segments: Sequence[SegmentDelta], **kwargs) -> "Sketch":
        rows = [(s.dx, s.dy, s.pen.value) for s in segments]
        return cls(np.array(rows, dtype=np.float64).reshape(-1, 3), **kwargs)

    @classmethod
    def from_strokes(cls, strokes: Sequence[np.ndarray], origin: Optional[Sequence[float]] = None,
                     **kwargs) -> "Sketch":
        """由绝对坐标笔画构造草图，origin 为空时以第一个点为原点"""
        strokes = [np.asarray(s, dtype=np.float64).reshape(-1, 2) for s in strokes]
        strokes = [s for s in strokes if len(s)]
        if not strokes:
            raise ValidationError("no non-empty strokes")
        points = np.concatenate(strokes, axis=0)
        start = points[0] if origin is None else np.asarray(origin, dtype=np.float64)
        offsets = np.diff(np.vstack([start, points]), axis=0)
        pen = np.zeros(len(points))
        pen[np.cumsum([len(s) for s in strokes]) - 1] = PenState.UP.value
        return cls(np.column_stack([offsets, pen]), **kwargs)

    def absolute_points(self, origin: Sequence[float] = (0.0, 0.0)) -> np.ndarray:
        """累加偏移得到每个段的绝对坐标"""
        return np.asarray(origin, dtype=np.float64) + np.cumsum(self.offsets, axis=0)

    def stroke_ids(self) -> np.ndarray:
        """每个段所属的笔画编号"""
        ends = np.concatenate([[0], (self.pen[:-1] == PenState.UP.value).astype(int)])
        return np.cumsum(ends)

    def strokes(self, origin: Sequence[float] = (0.0, 0.0)) -> List[np.ndarray]:
        """按笔画切分的绝对坐标点列"""
        points = self.absolute_points(origin)
        ids = self.stroke_ids()
        return [points[ids == k] for k in range(ids[-1] + 1)]

    def segment_lengths(self) -> np.ndarray:
        """每段绘制长度；笔画首段为移动，长度为 0"""
        lengths = np.hypot(self.offsets[:, 0], self.offsets[:, 1])
        drawn = np.concatenate([[False], self.pen[:-1] == PenState.DOWN.value])
        return np.where(drawn, lengths, 0.0)

    def with_deltas(self, deltas: np.ndarray) -> "Sketch":
        return Sketch(deltas, category=self.category, provenance=self.provenance,
                      max_segments=self.max_segments)


def canonicalize(labels: Sequence[int]) -> np.ndarray:
    """按首次出现顺序重新编号为 0..K-1"""
    labels = np.asarray(labels)
    _, first_index, inverse = np.unique(labels, return_index=True, return_inverse=True)
    order = np.argsort(np.argsort(first_index))
    return order[inverse.reshape(-1)].astype(int)


@dataclass(frozen=True)
class GroupLabels:
    """每个段的分组编号"""
    labels: np.ndarray

    def __post_init__(self):
        raw = np.asarray(self.labels)
        if raw.ndim != 1 or raw.size == 0:
            raise ValidationError("labels must be a non-empty 1-D sequence")
        if not np.all(np.equal(np.mod(raw, 1), 0)):
            raise ValidationError("labels must be integers")
        if np.any(raw < 0):
            raise ValidationError("labels must be non-negative")
        array = raw.astype(int)
        array.setflags(write=False)
        object.__setattr__(self, "labels", array)

    def __len__(self) -> int:
        return self.labels.shape[0]

    def __eq__(self, other) -> bool:
        if not isinstance(other, GroupLabels):
            return NotImplemented
        return np.array_equal(self.labels, other.labels)

    __hash__ = None

    @property
    def num_groups(self) -> int:
        return int(np.unique(self.labels).size)

    def tolist(self) -> List[int]:
        return [int(v) for v in self.labels]

    def subset(self, mask: np.ndarray) -> "GroupLabels":
        return GroupLabels(self.labels[np.asarray(mask, dtype=bool)])


@dataclass(frozen=True)
class AffinityMatrix:
    """N×N 亲和矩阵"""
    values: np.ndarray
    kind: AffinityKind = AffinityKind.PREDICTED

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2 or values.shape[0] != values.shape[1]:
            raise ValidationError(f"affinity matrix must be square, got {values.shape}")
        if not np.array_equal(values, values.T):
            raise ValidationError("affinity matrix must be symmetric")
        if not np.all(np.diag(values) == 1.0):
            raise ValidationError("affinity matrix must have unit diagonal")
        if values.min() < 0.0 or values.max() > 1.0:
            raise ValidationError("affinity entries must lie in [0, 1]")
        if self.kind is AffinityKind.GROUND_TRUTH:
            if not np.all(np.isin(values, (0.0, 1.0))):
                raise ValidationError("ground-truth affinity entries must be 0 or 1")
            _, components = connected_components(csr_matrix(values), directed=False)
            if not np.array_equal(values, _same_group(components)):
                raise ValidationError("ground-truth affinity matrix is not transitive")
        values = values.copy()
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def size(self) -> int:
        return self.values.shape[0]


def _same_group(labels: np.ndarray) -> np.ndarray:
    return (labels[:, None] == labels[None, :]).astype(np.float64)


def to_group_matrix(labels: GroupLabels) -> AffinityMatrix:
    """由分组标签构造真值亲和矩阵"""
    if not isinstance(labels, GroupLabels):
        labels = GroupLabels(labels)
    return AffinityMatrix(_same_group(labels.labels), AffinityKind.GROUND_TRUTH)
