"""
栅格边缘图读入和矢量化
读取 P5 灰度 PGM，前景像素按 8 邻接（去除冗余对角连接）串成折线，
交叉点处断开，再用 Douglas-Peucker 简化
"""

import re
from typing import Dict, List, Optional, Set, Tuple, Union

import numpy as np
from scipy import ndimage

from config.settings import ABSTRACTION_SETTINGS
from shared.errors import EmptyInputError, ParseError
from shared.logger import get_logger
from .polylines import PolylineGroups

logger = get_logger(__name__)

Pixel = Tuple[int, int]

_PGM_HEADER = re.compile(rb"P5(?:\s|#[^\n]*\n)+(\d+)(?:\s|#[^\n]*\n)+(\d+)(?:\s|#[^\n]*\n)+(\d+)\s")
_AXIAL = ((-1, 0), (0, 1), (1, 0), (0, -1))
_DIAGONAL = ((-1, 1), (1, 1), (1, -1), (-1, -1))
_CROSS = np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]])


def read_pgm(source: Union[str, bytes], threshold: int = ABSTRACTION_SETTINGS["pgm_threshold"],
             invert: bool = False) -> np.ndarray:
    """读取二进制 PGM，返回前景布尔图（灰度 >= threshold 为前景，invert 时相反）"""
    if isinstance(source, (bytes, bytearray)):
        data = bytes(source)
    else:
        with open(source, "rb") as handle:
            data = handle.read()
    match = _PGM_HEADER.match(data)
    if not match:
        raise ParseError("not a binary (P5) PGM image")
    width, height, maxval = (int(g) for g in match.groups())
    if width < 1 or height < 1 or not 0 < maxval < 65536:
        raise ParseError(f"invalid PGM header: {width}x{height}, maxval {maxval}")
    dtype = np.dtype(np.uint8) if maxval < 256 else np.dtype(">u2")
    if len(data) - match.end() < width * height * dtype.itemsize:
        raise ParseError("PGM pixel data is truncated")
    pixels = np.frombuffer(data, dtype=dtype, count=width * height, offset=match.end())
    gray = pixels.reshape(height, width).astype(np.float64) * 255.0 / maxval
    return gray < threshold if invert else gray >= threshold


def simplify_polyline(points: np.ndarray, tolerance: float = ABSTRACTION_SETTINGS["dp_tolerance"]
                      ) -> np.ndarray:
    """Douglas-Peucker 折线简化（迭代实现）"""
    points = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    n = len(points)
    if n < 3:
        return points.copy()
    keep = np.zeros(n, dtype=bool)
    keep[[0, -1]] = True
    stack = [(0, n - 1)]
    while stack:
        first, last = stack.pop()
        if last - first < 2:
            continue
        start, end = points[first], points[last]
        direction = end - start
        offsets = points[first + 1:last] - start
        norm = np.hypot(*direction)
        if norm == 0:
            distances = np.hypot(offsets[:, 0], offsets[:, 1])
        else:
            distances = np.abs(direction[0] * offsets[:, 1] - direction[1] * offsets[:, 0]) / norm
        index = int(np.argmax(distances))
        if distances[index] > tolerance:
            split = first + 1 + index
            keep[split] = True
            stack.extend([(first, split), (split, last)])
    return points[keep]


class _PixelGraph:
    """前景像素图：轴向邻居总是相连，对角邻居仅在两个公共轴向邻居都为背景时相连"""

    def __init__(self, foreground: np.ndarray):
        self.fg = foreground
        self.height, self.width = foreground.shape
        padded = np.pad(foreground, 1)

        def shifted(dr: int, dc: int) -> np.ndarray:
            return padded[1 + dr:1 + dr + self.height, 1 + dc:1 + dc + self.width]

        axial = ndimage.convolve(foreground.astype(int), _CROSS, mode="constant", cval=0)
        diagonal = sum((shifted(dr, dc) & ~shifted(dr, 0) & ~shifted(0, dc)).astype(int)
                       for dr, dc in _DIAGONAL)
        self.degree = np.where(foreground, axial + diagonal, 0)

    def neighbours(self, pixel: Pixel) -> List[Pixel]:
        r, c = pixel
        found = []
        for dr, dc in _AXIAL + _DIAGONAL:
            rr, cc = r + dr, c + dc
            if not (0 <= rr < self.height and 0 <= cc < self.width) or not self.fg[rr, cc]:
                continue
            if dr and dc and (self.fg[r + dr, c] or self.fg[r, c + dc]):
                continue
            found.append((rr, cc))
        return found


def _edge(a: Pixel, b: Pixel) -> Tuple[Pixel, Pixel]:
    return (a, b) if a <= b else (b, a)


def _walk(graph: _PixelGraph, start: Pixel, first: Pixel, nodes: np.ndarray,
          visited: Set[Tuple[Pixel, Pixel]]) -> List[Pixel]:
    chain = [start, first]
    visited.add(_edge(start, first))
    current = first
    while not nodes[current]:
        ahead = [q for q in graph.neighbours(current) if _edge(current, q) not in visited]
        if not ahead:
            break
        visited.add(_edge(current, ahead[0]))
        current = ahead[0]
        chain.append(current)
    return chain


def trace_chains(foreground: np.ndarray) -> List[np.ndarray]:
    """把前景像素串成 (x, y) 点链，交叉点簇用其质心作为公共端点"""
    graph = _PixelGraph(foreground)
    junction = graph.degree >= 3
    clusters, count = ndimage.label(junction, structure=np.ones((3, 3)))
    centroids: Dict[int, np.ndarray] = {}
    if count:
        centres = ndimage.center_of_mass(junction, clusters, list(range(1, count + 1)))
        centroids = {k + 1: np.array(centre) for k, centre in enumerate(centres)}
    nodes = foreground & (graph.degree != 2)
    visited: Set[Tuple[Pixel, Pixel]] = set()
    chains: List[List[Pixel]] = []

    for pixel in zip(*np.nonzero(nodes)):
        pixel = (int(pixel[0]), int(pixel[1]))
        if graph.degree[pixel] == 0:
            chains.append([pixel])
            continue
        for q in graph.neighbours(pixel):
            if _edge(pixel, q) not in visited:
                chains.append(_walk(graph, pixel, q, nodes, visited))
    # 只剩闭合环
    for pixel in zip(*np.nonzero(foreground & ~nodes)):
        pixel = (int(pixel[0]), int(pixel[1]))
        for q in graph.neighbours(pixel):
            if _edge(pixel, q) not in visited:
                chains.append(_walk(graph, pixel, q, nodes, visited))

    polylines = []
    for chain in chains:
        ends = [int(clusters[p]) for p in (chain[0], chain[-1])]
        if len(chain) == 2 and ends[0] and ends[0] == ends[1]:
            continue  # 交叉点簇内部的连接
        rows = np.array(chain, dtype=np.float64)
        for position, cluster in ((0, ends[0]), (-1, ends[1])):
            if cluster:
                rows[position] = centroids[cluster]
        polylines.append(rows[:, ::-1])
    return polylines


def trace_edges(bitmap: np.ndarray, tolerance: float = ABSTRACTION_SETTINGS["dp_tolerance"],
                category: Optional[str] = None) -> PolylineGroups:
    """边缘位图 -> 未分组折线；包围盒取前景范围"""
    foreground = np.asarray(bitmap).astype(bool)
    if foreground.ndim != 2 or not foreground.any():
        raise EmptyInputError("bitmap has no foreground pixels")
    chains = trace_chains(foreground)
    polylines = [simplify_polyline(chain, tolerance) for chain in chains]
    rows, cols = np.nonzero(foreground)
    bbox = (float(cols.max() - cols.min() + 1), float(rows.max() - rows.min() + 1))
    logger.info(f"traced {len(polylines)} polylines, "
                f"{sum(len(p) for p in polylines)} points after simplification")
    return PolylineGroups.from_polylines(polylines, bbox=bbox, category=category)
