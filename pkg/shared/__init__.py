"""
共享组件模块
提供异常、日志、数值检查、报告格式化和文件写入等共享功能
"""

from .errors import *
from .logger import setup_logging, get_logger
from .validators import FiniteChecker, check_finite
from .report_formatter import ReportFormatter
from .io_utils import atomic_write_bytes, atomic_write_text

__all__ = ['GrouperError', 'ConfigurationError', 'ParseError', 'SketchLengthError',
           'ValidationError', 'NormalizationError', 'ShapeError', 'DomainError',
           'ContractError', 'OracleError', 'NonFiniteLossError', 'CheckpointIntegrityError',
           'CheckpointVersionError', 'EmptyInputError', 'DATA_ERRORS',
           'setup_logging', 'get_logger', 'FiniteChecker', 'check_finite',
           'ReportFormatter', 'atomic_write_bytes', 'atomic_write_text']
