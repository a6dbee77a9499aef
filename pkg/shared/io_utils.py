"""
文件写入工具
先写临时文件再重命名，避免半写入的输出
"""

import os
import tempfile
from typing import Union


def atomic_write_bytes(path: str, data: bytes) -> None:
    """原子写入二进制文件"""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp_path = tempfile.mkstemp(prefix=".tmp-", dir=directory)
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(data)
        os.replace(tmp_path, path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.remove(tmp_path)
        raise


def atomic_write_text(path: str, text: Union[str, bytes]) -> None:
    """原子写入 UTF-8 文本文件"""
    data = text.encode("utf-8") if isinstance(text, str) else text
    atomic_write_bytes(path, data)
