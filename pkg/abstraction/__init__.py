"""
草图抽象化模块
提供折线分组、组重要性、按阈值抽象、栅格边缘矢量化和合成流程
"""

from .polylines import PolylineGroups
from .importance import ImportanceScores, importance, abstract
from .raster import read_pgm, simplify_polyline, trace_chains, trace_edges
from .synthesis import synthesize

__all__ = ['PolylineGroups', 'ImportanceScores', 'importance', 'abstract', 'read_pgm',
           'simplify_polyline', 'trace_chains', 'trace_edges', 'synthesize']
