"""
交换格式读写
每行一个 JSON 对象: points [[dx, dy, pen], ...], 可选 labels / category / provenance
"""

import json
from typing import Iterable, List, Optional, Tuple

import numpy as np

from config.settings import SKETCH_SETTINGS
from shared.errors import ParseError, SketchLengthError, ValidationError
from .sketch import GroupLabels, Sketch

Record = Tuple[Sketch, Optional[GroupLabels]]


def _parse_record(obj, lineno: int, max_segments: int) -> Record:
    if not isinstance(obj, dict):
        raise ParseError("record must be a JSON object", lineno)
    points = obj.get("points")
    if not isinstance(points, list) or not points:
        raise ParseError("record needs a non-empty 'points' array", lineno)
    rows = []
    for k, triple in enumerate(points):
        if (not isinstance(triple, list) or len(triple) != 3
                or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in triple)):
            raise ParseError(f"point {k} must be a [dx, dy, pen] triple of numbers", lineno)
        if triple[2] not in (0, 1):
            raise ParseError(f"point {k} has pen {triple[2]!r}, expected 0 or 1", lineno)
        rows.append(triple)

    if len(rows) > max_segments:
        raise SketchLengthError(len(rows), max_segments)

    category = obj.get("category")
    if category is not None and not isinstance(category, str):
        raise ParseError("'category' must be a string", lineno)
    provenance = obj.get("provenance")
    if provenance is not None and not isinstance(provenance, str):
        raise ParseError("'provenance' must be a string", lineno)

    try:
        sketch = Sketch(np.array(rows, dtype=np.float64), category=category,
                        provenance=provenance, max_segments=max_segments)
    except ValidationError as e:
        raise ParseError(str(e), lineno)

    labels = None
    if "labels" in obj and obj["labels"] is not None:
        raw = obj["labels"]
        if not isinstance(raw, list) or not all(isinstance(v, int) and not isinstance(v, bool) for v in raw):
            raise ParseError("'labels' must be an array of integers", lineno)
        if len(raw) != len(rows):
            raise ValidationError(
                f"line {lineno}: label array has length {len(raw)} but sketch has {len(rows)} points")
        labels = GroupLabels(np.array(raw, dtype=int))
    return sketch, labels


def parse_stroke3(text: str, max_segments: Optional[int] = None) -> List[Record]:
    """解析交换格式文本"""
    limit = max_segments or SKETCH_SETTINGS["max_segments"]
    records = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as e:
            raise ParseError(f"invalid JSON: {e.msg}", lineno)
        try:
            records.append(_parse_record(obj, lineno, limit))
        except SketchLengthError as e:
            raise SketchLengthError(e.length, e.limit, index=len(records))
    return records


def record_to_dict(sketch: Sketch, labels: Optional[GroupLabels] = None) -> dict:
    obj = {"points": [[float(dx), float(dy), int(p)] for dx, dy, p in sketch.deltas]}
    if labels is not None:
        if len(labels) != len(sketch):
            raise ValidationError("label array length must equal the segment count")
        obj["labels"] = labels.tolist()
    if sketch.category is not None:
        obj["category"] = sketch.category
    if sketch.provenance is not None:
        obj["provenance"] = sketch.provenance
    return obj


def serialize_stroke3(records: Iterable[Record]) -> str:
    """序列化为交换格式文本"""
    lines = [json.dumps(record_to_dict(sketch, labels), ensure_ascii=False)
             for sketch, labels in records]
    return "".join(line + "\n" for line in lines)


def read_stroke3(path: str, max_segments: Optional[int] = None) -> List[Record]:
    """读取交换格式文件"""
    with open(path, encoding="utf-8") as handle:
        return parse_stroke3(handle.read(), max_segments)
