"""
配置文件模块
"""

from .settings import *
from .loader import load_config_file, resolve_options

__all__ = ['SKETCH_SETTINGS', 'MODEL_CONFIG', 'TRAIN_CONFIG', 'INFERENCE_SETTINGS',
           'EVAL_SETTINGS', 'ABSTRACTION_SETTINGS', 'RENDER_SETTINGS', 'LOG_CONFIG',
           'load_config_file', 'resolve_options']
