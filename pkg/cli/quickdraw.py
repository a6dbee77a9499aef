"""
QuickDraw 原始数据导入
ndjson 每行 {"word": ..., "drawing": [[xs, ys(, ts)], ...]}，绝对坐标 -> 以 (0, 0) 为原点的段偏移
"""

import json
from typing import List, Optional

import numpy as np

from config.settings import SKETCH_SETTINGS
from shared.errors import ParseError, SketchLengthError
from shared.logger import get_logger
from stroke_core import Sketch

logger = get_logger(__name__)


def _stroke_points(stroke, lineno: int, index: int) -> np.ndarray:
    if not isinstance(stroke, list) or len(stroke) not in (2, 3):
        raise ParseError(f"stroke {index} must be [xs, ys] or [xs, ys, ts]", lineno)
    xs, ys = stroke[0], stroke[1]
    if not isinstance(xs, list) or not isinstance(ys, list) or len(xs) != len(ys):
        raise ParseError(f"stroke {index} has mismatched coordinate arrays", lineno)
    if not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in xs + ys):
        raise ParseError(f"stroke {index} has non-numeric coordinates", lineno)
    return np.column_stack([xs, ys]).astype(np.float64).reshape(-1, 2)


def parse_quickdraw(text: str, max_segments: Optional[int] = None) -> List[Sketch]:
    """解析 QuickDraw ndjson；空笔画跳过并告警"""
    limit = max_segments or SKETCH_SETTINGS["max_segments"]
    sketches: List[Sketch] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as e:
            raise ParseError(f"invalid JSON: {e.msg}", lineno)
        if not isinstance(obj, dict) or not isinstance(obj.get("drawing"), list):
            raise ParseError("record needs a 'drawing' array", lineno)
        word = obj.get("word")
        if word is not None and not isinstance(word, str):
            raise ParseError("'word' must be a string", lineno)

        strokes = []
        for index, stroke in enumerate(obj["drawing"]):
            points = _stroke_points(stroke, lineno, index)
            if len(points) == 0:
                logger.warning(f"line {lineno}: skipping empty stroke {index}")
                continue
            strokes.append(points)
        if not strokes:
            raise ParseError("drawing has no non-empty strokes", lineno)
        count = sum(len(s) for s in strokes)
        if count > limit:
            raise SketchLengthError(count, limit, index=len(sketches))
        sketches.append(Sketch.from_strokes(strokes, origin=(0.0, 0.0), category=word,
                                            provenance="quickdraw", max_segments=limit))
    return sketches
