"""
合成带标注草图生成器
每个类别由至少三个相互分离的部件组成
"""

from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from config.settings import SKETCH_SETTINGS
from shared.errors import ConfigurationError
from .sketch import GroupLabels, Sketch

Part = List[np.ndarray]


def _circle(cx: float, cy: float, r: float, points: int) -> np.ndarray:
    angles = np.linspace(0.0, 2.0 * np.pi, points + 1)
    return np.column_stack([cx + r * np.cos(angles), cy + r * np.sin(angles)])


def _box_with_lid() -> List[Part]:
    body = [np.array([[20, 50], [80, 50], [80, 90], [20, 90], [20, 50]])]
    lid = [np.array([[15, 45], [85, 45], [80, 35], [20, 35], [15, 45]])]
    knob = [np.array([[45, 28], [50, 22], [55, 28]])]
    return [body, lid, knob]


def _stick_figure() -> List[Part]:
    head = [_circle(50, 18, 10, 8)]
    torso = [np.array([[50, 34], [50, 60]])]
    arms = [np.array([[30, 42], [46, 42]]), np.array([[54, 42], [70, 42]])]
    legs = [np.array([[47, 66], [38, 88]]), np.array([[53, 66], [62, 88]])]
    return [head, torso, arms, legs]


def _flower() -> List[Part]:
    center = [_circle(50, 30, 5, 6)]
    petals = []
    for angle in (0.0, 0.5 * np.pi, np.pi, 1.5 * np.pi):
        direction = np.array([np.cos(angle), np.sin(angle)])
        normal = np.array([-direction[1], direction[0]])
        base = np.array([50.0, 30.0]) + 9.0 * direction
        tip = np.array([50.0, 30.0]) + 19.0 * direction
        petals.append(np.array([base + 4.0 * normal, tip, base - 4.0 * normal, base + 4.0 * normal]))
    stem = [np.array([[50, 52], [50, 70], [50, 92]]), np.array([[53, 78], [63, 68], [58, 80]])]
    return [center, petals, stem]


def _grid() -> List[Part]:
    frame = [np.array([[10, 10], [90, 10], [90, 90], [10, 90], [10, 10]])]
    rows = [np.array([[20, y], [80, y]]) for y in (20, 30, 40)]
    columns = [np.array([[x, 55], [x, 82]]) for x in (30, 50, 70)]
    return [frame, rows, columns]


GENERATORS: Dict[str, Callable[[], List[Part]]] = {
    "box-with-lid": _box_with_lid,
    "stick-figure": _stick_figure,
    "flower": _flower,
    "grid": _grid,
}


def gen_synthetic(category: str, jitter: float = 0.0,
                  rng: Optional[np.random.Generator] = None) -> Tuple[Sketch, GroupLabels]:
    """生成一个带分组标注的合成草图"""
    if category not in GENERATORS:
        raise ConfigurationError(
            f"unknown category {category!r}; expected one of {sorted(GENERATORS)}")
    if jitter < 0:
        raise ConfigurationError(f"jitter must be >= 0, got {jitter}")

    strokes, labels = [], []
    for part_id, part in enumerate(GENERATORS[category]()):
        for stroke in part:
            stroke = np.asarray(stroke, dtype=np.float64)
            if jitter > 0:
                if rng is None:
                    rng = np.random.default_rng()
                noise = rng.normal(0.0, jitter * SKETCH_SETTINGS["part_scale"], size=stroke.shape)
                stroke = stroke + noise
            strokes.append(stroke)
            labels.extend([part_id] * len(stroke))

    sketch = Sketch.from_strokes(strokes, category=category)
    return sketch, GroupLabels(np.array(labels))


def gen_dataset(count: int, categories=None, jitter: float = 0.05,
                rng: Optional[np.random.Generator] = None) -> List[Tuple[Sketch, GroupLabels]]:
    """按类别轮流生成 count 个合成草图"""
    categories = list(categories or SKETCH_SETTINGS["categories"])
    rng = rng if rng is not None else np.random.default_rng(0)
    return [gen_synthetic(categories[k % len(categories)], jitter, rng) for k in range(count)]
