"""
检查点读写
二进制格式: 头部 {magic, version, 超参数块}，按固定顺序的命名数组 (name, shape, data)，
末尾 SHA-256 校验和
"""

import hashlib
import json
import struct
from dataclasses import dataclass, field
from typing import Any, Dict, List, Tuple

import numpy as np

from grouper_model import GrouperParams, HyperParams
from shared.errors import CheckpointIntegrityError, CheckpointVersionError
from shared.io_utils import atomic_write_bytes
from .optimizer import AdamState

MAGIC = b"SKGRPCK\x00"
FORMAT_VERSION = 1
DIGEST_SIZE = 32


@dataclass
class Checkpoint:
    """参数、超参数、优化器状态和训练配置"""
    params: GrouperParams
    adam: AdamState
    config: Dict[str, Any] = field(default_factory=dict)
    version: int = FORMAT_VERSION

    @property
    def hyper(self) -> HyperParams:
        return self.params.hyper

    @property
    def step(self) -> int:
        return self.adam.step


def _named_arrays(c: Checkpoint) -> List[Tuple[str, np.ndarray]]:
    names = c.params.names()
    return ([(n, c.params[n]) for n in names]
            + [(f"adam.m/{n}", c.adam.m[n]) for n in names]
            + [(f"adam.v/{n}", c.adam.v[n]) for n in names])


def dumps_checkpoint(c: Checkpoint) -> bytes:
    """序列化检查点"""
    header = json.dumps({
        "hyper": c.hyper.to_dict(),
        "config": c.config,
        "step": c.adam.step,
    }, sort_keys=True).encode("utf-8")
    parts = [MAGIC, struct.pack("<II", c.version, len(header)), header]
    for name, array in _named_arrays(c):
        encoded = name.encode("utf-8")
        parts.append(struct.pack("<H", len(encoded)))
        parts.append(encoded)
        parts.append(struct.pack("<B", array.ndim))
        parts.append(struct.pack(f"<{array.ndim}Q", *array.shape))
        parts.append(np.ascontiguousarray(array, dtype="<f8").tobytes())
    body = b"".join(parts)
    return body + hashlib.sha256(body).digest()


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.offset = 0

    def take(self, size: int) -> bytes:
        if self.offset + size > len(self.data):
            raise CheckpointIntegrityError("checkpoint is truncated")
        chunk = self.data[self.offset:self.offset + size]
        self.offset += size
        return chunk

    def unpack(self, fmt: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))


def loads_checkpoint(data: bytes) -> Checkpoint:
    """反序列化检查点，检查版本和校验和"""
    reader = _Reader(data)
    if reader.take(len(MAGIC)) != MAGIC:
        raise CheckpointIntegrityError("not a grouper checkpoint (bad magic)")
    version, header_len = reader.unpack("<II")
    if version != FORMAT_VERSION:
        raise CheckpointVersionError(
            f"checkpoint format version {version} is incompatible with version {FORMAT_VERSION}")
    if len(data) < DIGEST_SIZE or hashlib.sha256(data[:-DIGEST_SIZE]).digest() != data[-DIGEST_SIZE:]:
        raise CheckpointIntegrityError("checkpoint checksum mismatch (truncated or corrupted)")

    reader.data = data[:-DIGEST_SIZE]
    try:
        header = json.loads(reader.take(header_len).decode("utf-8"))
        hyper = HyperParams.from_dict(header["hyper"])
    except (ValueError, KeyError) as e:
        raise CheckpointIntegrityError(f"unreadable checkpoint header: {e}")

    arrays: Dict[str, np.ndarray] = {}
    while reader.offset < len(reader.data):
        (name_len,) = reader.unpack("<H")
        name = reader.take(name_len).decode("utf-8")
        (ndim,) = reader.unpack("<B")
        shape = reader.unpack(f"<{ndim}Q") if ndim else ()
        count = int(np.prod(shape)) if ndim else 1
        arrays[name] = np.frombuffer(reader.take(8 * count), dtype="<f8").reshape(shape).astype(np.float64)

    names = [name for name, _ in hyper.shapes()]
    try:
        params = GrouperParams(hyper, {n: arrays[n] for n in names})
        adam = AdamState({n: arrays[f"adam.m/{n}"] for n in names},
                         {n: arrays[f"adam.v/{n}"] for n in names}, int(header["step"]))
    except KeyError as e:
        raise CheckpointIntegrityError(f"checkpoint is missing array {e}")
    return Checkpoint(params, adam, header.get("config", {}), version)


def save_checkpoint(c: Checkpoint, path: str) -> None:
    """写入检查点文件"""
    atomic_write_bytes(path, dumps_checkpoint(c))


def load_checkpoint(path: str) -> Checkpoint:
    """读取检查点文件"""
    with open(path, "rb") as handle:
        return loads_checkpoint(handle.read())
