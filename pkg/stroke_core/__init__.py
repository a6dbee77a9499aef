"""
笔画序列核心模块
提供草图数据模型、交换格式读写、预处理和合成数据生成功能
"""

from .sketch import (PenState, AffinityKind, SegmentDelta, Sketch, GroupLabels,
                     AffinityMatrix, canonicalize, to_group_matrix)
from .stroke3 import parse_stroke3, serialize_stroke3, read_stroke3, record_to_dict
from .preprocessing import normalize, augment, split_by_category
from .synthetic import gen_synthetic, gen_dataset, GENERATORS

__all__ = ['PenState', 'AffinityKind', 'SegmentDelta', 'Sketch', 'GroupLabels',
           'AffinityMatrix', 'canonicalize', 'to_group_matrix', 'parse_stroke3',
           'serialize_stroke3', 'read_stroke3', 'record_to_dict', 'normalize', 'augment',
           'split_by_category', 'gen_synthetic', 'gen_dataset', 'GENERATORS']
