"""
训练模块
提供 Adam 优化、训练循环和检查点读写功能
"""

from .optimizer import AdamState, learning_rate, clip_by_global_norm, adam_update
from .checkpoint import (Checkpoint, FORMAT_VERSION, save_checkpoint, load_checkpoint,
                         dumps_checkpoint, loads_checkpoint)
from .trainer import TrainConfig, TrainState, FitResult, train_step, fit, validate

__all__ = ['AdamState', 'learning_rate', 'clip_by_global_norm', 'adam_update', 'Checkpoint',
           'FORMAT_VERSION', 'save_checkpoint', 'load_checkpoint', 'dumps_checkpoint',
           'loads_checkpoint', 'TrainConfig', 'TrainState', 'FitResult', 'train_step', 'fit',
           'validate']
