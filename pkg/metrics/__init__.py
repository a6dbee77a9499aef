"""
评估指标模块
提供 VOI、PRI、SC 划分指标和按类别汇总的评估报告
"""

from .partition import contingency, voi, pri, sc
from .evaluation import PartitionMetrics, EvaluationReport, evaluate, AVERAGE_ROW

__all__ = ['contingency', 'voi', 'pri', 'sc', 'PartitionMetrics', 'EvaluationReport',
           'evaluate', 'AVERAGE_ROW']
