"""
异常定义
所有模块共用的错误层次
"""

from typing import Optional


class GrouperError(Exception):
    """分组器错误基类"""


class ConfigurationError(GrouperError):
    """配置错误"""


class ParseError(GrouperError):
    """交换格式解析错误"""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)


class SketchLengthError(GrouperError):
    """草图长度超过上限"""

    def __init__(self, length: int, limit: int, index: Optional[int] = None):
        self.length = length
        self.limit = limit
        self.index = index
        where = f"sketch {index}: " if index is not None else ""
        super().__init__(f"{where}{length} segments exceeds N_max={limit}")


class ValidationError(GrouperError):
    """数据校验错误"""


class NormalizationError(GrouperError):
    """归一化错误"""


class ShapeError(GrouperError):
    """数组形状不匹配"""


class DomainError(GrouperError):
    """数值定义域错误"""


class ContractError(GrouperError):
    """调用约定被违反"""


class OracleError(GrouperError):
    """梯度检查的函数不确定"""


class NonFiniteLossError(GrouperError):
    """损失出现非有限值"""

    def __init__(self, term: str, value: float):
        self.term = term
        self.value = value
        super().__init__(f"non-finite loss term {term}={value}")


class CheckpointIntegrityError(GrouperError):
    """检查点文件损坏"""


class CheckpointVersionError(GrouperError):
    """检查点版本不兼容"""


class EmptyInputError(GrouperError):
    """输入为空"""


# 数据类错误，命令行返回码 2
DATA_ERRORS = (ParseError, SketchLengthError, ValidationError, NormalizationError,
               CheckpointIntegrityError, CheckpointVersionError, EmptyInputError)
