"""
自动微分模块
提供稠密数组上的反向模式求导、原语集合和有限差分检查
"""

from .tensor import Node, Tape, active_tape, backward, constant
from .ops import (affine, add, sub, mul, tanh, sigmoid, exp, log, abs_, square, maximum,
                  sum_, mean, softmax, concat, slice_, reshape, l2_normalize, logsumexp)
from .gradcheck import grad_check, grad_check_report

__all__ = ['Node', 'Tape', 'active_tape', 'backward', 'constant', 'affine', 'add', 'sub',
           'mul', 'tanh', 'sigmoid', 'exp', 'log', 'abs_', 'square', 'maximum', 'sum_',
           'mean', 'softmax', 'concat', 'slice_', 'reshape', 'l2_normalize', 'logsumexp',
           'grad_check', 'grad_check_report']
