"""
分组推理模块
提供亲和矩阵聚类、模型分组和邻近度基线功能
"""

from .clustering import ClusterState, cluster_affinity
from .inference import group, baseline_proximity

__all__ = ['ClusterState', 'cluster_affinity', 'group', 'baseline_proximity']
