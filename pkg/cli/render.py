"""
SVG 渲染
每笔画一条路径，按组号从固定调色板取色（超出时循环），y 轴向下
"""

from typing import List, Optional

import numpy as np

from config.settings import RENDER_SETTINGS
from stroke_core import GroupLabels, Sketch


def _stroke_colour(labels: Optional[np.ndarray], palette: List[str]) -> str:
    if labels is None:
        return palette[0]
    # 笔画内混合多组时取段数最多的组，相同取组号小的
    return palette[int(np.argmax(np.bincount(labels))) % len(palette)]


def render_svg(sketch: Sketch, labels: Optional[GroupLabels] = None,
               settings: Optional[dict] = None) -> str:
    """把草图渲染为固定画布尺寸的 SVG 文本"""
    cfg = dict(RENDER_SETTINGS)
    cfg.update(settings or {})
    canvas, margin, palette = cfg["canvas"], cfg["margin"], cfg["palette"]

    points = sketch.absolute_points()
    lower = points.min(axis=0)
    extent = float((points.max(axis=0) - lower).max())
    scale = (canvas - 2 * margin) / extent if extent > 0 else 1.0
    screen = margin + (points - lower) * scale

    ids = sketch.stroke_ids()
    values = labels.labels if labels is not None else None
    lines = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{canvas}" height="{canvas}" '
             f'viewBox="0 0 {canvas} {canvas}">',
             f'<rect width="{canvas}" height="{canvas}" fill="white"/>']
    for k in range(int(ids[-1]) + 1):
        stroke = screen[ids == k]
        if len(stroke) == 1:
            stroke = np.vstack([stroke, stroke])
        commands = [f"M {stroke[0, 0]:.2f} {stroke[0, 1]:.2f}"]
        commands += [f"L {x:.2f} {y:.2f}" for x, y in stroke[1:]]
        colour = _stroke_colour(values[ids == k] if values is not None else None, palette)
        lines.append(f'<path d="{" ".join(commands)}" stroke="{colour}" '
                     f'stroke-width="{cfg["stroke_width"]}" fill="none" '
                     f'stroke-linecap="round" stroke-linejoin="round"/>')
    lines.append("</svg>")
    return "\n".join(lines) + "\n"
