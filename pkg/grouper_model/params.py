"""
分组器超参数和可学习参数
"""

from dataclasses import asdict, dataclass, fields
from typing import Any, Dict, Iterator, List, Mapping, Optional, Tuple

import numpy as np

from config.settings import MODEL_CONFIG
from diff_engine import Node, Tape, constant
from shared.errors import CheckpointIntegrityError, ConfigurationError

INPUT_DIM = 3  # (dx, dy, pen)


@dataclass(frozen=True)
class HyperParams:
    """模型超参数"""
    enc_hidden: int = MODEL_CONFIG["grouper"]["enc_hidden"]
    dec_hidden: int = MODEL_CONFIG["grouper"]["dec_hidden"]
    latent_dim: int = MODEL_CONFIG["grouper"]["latent_dim"]
    feat_dim: int = MODEL_CONFIG["grouper"]["feat_dim"]
    mixtures: int = MODEL_CONFIG["grouper"]["mixtures"]
    margin: float = MODEL_CONFIG["grouper"]["margin"]
    lambda_a: float = MODEL_CONFIG["grouper"]["lambda_a"]
    lambda_g: float = MODEL_CONFIG["grouper"]["lambda_g"]
    lambda_r: float = MODEL_CONFIG["grouper"]["lambda_r"]
    lambda_kl: Optional[float] = MODEL_CONFIG["grouper"]["lambda_kl"]
    lambda_l2: float = MODEL_CONFIG["grouper"]["lambda_l2"]
    triplets_per_sketch: int = MODEL_CONFIG["grouper"]["triplets_per_sketch"]
    exhaustive_triplets: bool = MODEL_CONFIG["grouper"]["exhaustive_triplets"]
    z_every_step: bool = MODEL_CONFIG["grouper"]["z_every_step"]
    classifier_hidden: int = MODEL_CONFIG["grouper"]["classifier_hidden"]
    max_segments: int = MODEL_CONFIG["grouper"]["max_segments"]

    def __post_init__(self):
        # lambda_kl 未给出时跟随 lambda_r
        kl = self.lambda_r if self.lambda_kl is None else self.lambda_kl
        try:
            object.__setattr__(self, "lambda_kl", float(kl))
        except (TypeError, ValueError):
            raise ConfigurationError(f"lambda_kl must be a number, got {self.lambda_kl!r}")
        for name in ("enc_hidden", "dec_hidden", "latent_dim", "feat_dim", "mixtures", "max_segments"):
            if getattr(self, name) < 1:
                raise ConfigurationError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.margin <= 0:
            raise ConfigurationError(f"margin must be > 0, got {self.margin}")
        for name in ("lambda_a", "lambda_g", "lambda_r", "lambda_kl", "lambda_l2"):
            if getattr(self, name) < 0:
                raise ConfigurationError(f"{name} must be >= 0, got {getattr(self, name)}")
        if self.triplets_per_sketch < 0 or self.classifier_hidden < 0:
            raise ConfigurationError("triplets_per_sketch and classifier_hidden must be >= 0")

    @classmethod
    def from_dict(cls, values: Optional[Mapping[str, Any]] = None, **overrides) -> "HyperParams":
        merged = dict(MODEL_CONFIG["grouper"])
        merged.update(values or {})
        merged.update(overrides)
        known = {f.name for f in fields(cls)}
        unknown = set(merged) - known
        if unknown:
            raise ConfigurationError(f"unknown hyper-parameters: {sorted(unknown)}")
        return cls(**merged)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    def shapes(self) -> List[Tuple[str, Tuple[int, ...]]]:
        """参数名和形状，固定顺序"""
        he, hd, z, f, m = self.enc_hidden, self.dec_hidden, self.latent_dim, self.feat_dim, self.mixtures
        dec_in = INPUT_DIM + (z if self.z_every_step else 0) + hd
        shapes = [
            ("enc_fw_W", (4 * he, INPUT_DIM + he)), ("enc_fw_b", (4 * he,)),
            ("enc_bw_W", (4 * he, INPUT_DIM + he)), ("enc_bw_b", (4 * he,)),
            ("mu_W", (z, 2 * he)), ("mu_b", (z,)),
            ("sigma_W", (z, 2 * he)), ("sigma_b", (z,)),
            ("init_W", (2 * hd, z)), ("init_b", (2 * hd,)),
            ("dec_W", (4 * hd, dec_in)), ("dec_b", (4 * hd,)),
            ("feat_W", (f, hd)), ("feat_b", (f,)),
        ]
        if self.classifier_hidden:
            shapes += [("cls_hidden_W", (self.classifier_hidden, f)),
                       ("cls_hidden_b", (self.classifier_hidden,)),
                       ("cls_W", (1, self.classifier_hidden)), ("cls_b", (1,))]
        else:
            shapes += [("cls_W", (1, f)), ("cls_b", (1,))]
        shapes += [("mdn_W", (6 * m + 2, hd)), ("mdn_b", (6 * m + 2,))]
        return shapes


class ParamNodes(dict):
    """绑定到计算图的参数节点，带超参数"""

    def __init__(self, hyper: HyperParams, nodes: Mapping[str, Node]):
        super().__init__(nodes)
        self.hyper = hyper


class GrouperParams:
    """分组器全部可学习参数的不可变快照"""

    def __init__(self, hyper: HyperParams, arrays: Mapping[str, np.ndarray]):
        self.hyper = hyper
        expected = hyper.shapes()
        missing = [name for name, _ in expected if name not in arrays]
        if missing:
            raise CheckpointIntegrityError(f"missing parameter arrays: {missing}")
        self._arrays = {}
        for name, shape in expected:
            array = np.array(arrays[name], dtype=np.float64, copy=True)
            if array.shape != shape:
                raise CheckpointIntegrityError(
                    f"parameter {name} has shape {array.shape}, hyper-parameters need {shape}")
            array.setflags(write=False)
            self._arrays[name] = array

    def __getitem__(self, name: str) -> np.ndarray:
        return self._arrays[name]

    def __iter__(self) -> Iterator[str]:
        return iter(self._arrays)

    def __len__(self) -> int:
        return len(self._arrays)

    def items(self):
        return self._arrays.items()

    def names(self) -> List[str]:
        return list(self._arrays)

    def count(self) -> int:
        return int(sum(a.size for a in self._arrays.values()))

    def bind(self, tape: Optional[Tape] = None) -> ParamNodes:
        """绑定为计算图节点；tape 为空时为常量"""
        if tape is None:
            nodes = {name: constant(a) for name, a in self._arrays.items()}
        else:
            nodes = {name: tape.variable(a, name=name) for name, a in self._arrays.items()}
        return ParamNodes(self.hyper, nodes)

    def replace(self, arrays: Mapping[str, np.ndarray]) -> "GrouperParams":
        merged = dict(self._arrays)
        merged.update(arrays)
        return GrouperParams(self.hyper, merged)


def init_params(hyper: HyperParams, rng: np.random.Generator) -> GrouperParams:
    """均匀初始化 ±1/sqrt(fan_in)，偏置为 0，遗忘门偏置为 1"""
    arrays = {}
    for name, shape in hyper.shapes():
        if len(shape) == 2:
            bound = 1.0 / np.sqrt(shape[1])
            arrays[name] = rng.uniform(-bound, bound, size=shape)
        else:
            arrays[name] = np.zeros(shape)
    for prefix, hidden in (("enc_fw", hyper.enc_hidden), ("enc_bw", hyper.enc_hidden),
                           ("dec", hyper.dec_hidden)):
        arrays[f"{prefix}_b"][hidden:2 * hidden] = 1.0
    return GrouperParams(hyper, arrays)


def as_nodes(params) -> ParamNodes:
    if isinstance(params, ParamNodes):
        return params
    if isinstance(params, GrouperParams):
        return params.bind()
    raise TypeError(f"expected GrouperParams or ParamNodes, got {type(params).__name__}")
