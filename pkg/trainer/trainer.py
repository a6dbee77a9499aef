"""
训练循环
按草图独立建图、批内平均梯度、全局范数裁剪、Adam 更新和学习率指数衰减
"""

from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from typing import Any, Callable, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from config.settings import TRAIN_CONFIG
from diff_engine import Tape
from grouper_model import GrouperParams, HyperParams, init_params, loss_full
from grouping_inference import group
from metrics import evaluate
from shared.errors import ConfigurationError, ContractError, DomainError, ValidationError
from shared.logger import get_logger
from shared.validators import check_finite
from stroke_core import GroupLabels, Sketch, augment, normalize
from .checkpoint import Checkpoint, save_checkpoint
from .optimizer import AdamState, adam_update, clip_by_global_norm, learning_rate

logger = get_logger(__name__)

Example = Tuple[Sketch, GroupLabels]
LOSS_TERMS = ("L_A", "L_G", "L_R", "L_KL")


@dataclass(frozen=True)
class TrainConfig:
    """训练配置"""
    lr0: float = TRAIN_CONFIG["lr0"]
    decay: float = TRAIN_CONFIG["decay"]
    beta1: float = TRAIN_CONFIG["beta1"]
    beta2: float = TRAIN_CONFIG["beta2"]
    epsilon: float = TRAIN_CONFIG["epsilon"]
    iters: int = TRAIN_CONFIG["iters"]
    batch: int = TRAIN_CONFIG["batch"]
    seed: int = TRAIN_CONFIG["seed"]
    checkpoint_every: int = TRAIN_CONFIG["checkpoint_every"]
    clip_norm: float = TRAIN_CONFIG["clip_norm"]
    weight_decay: float = TRAIN_CONFIG["weight_decay"]
    augment: bool = TRAIN_CONFIG["augment"]
    removal_prob: float = TRAIN_CONFIG["removal_prob"]
    distort_scale: float = TRAIN_CONFIG["distort_scale"]
    workers: int = TRAIN_CONFIG["workers"]
    log_every: int = TRAIN_CONFIG["log_every"]

    def __post_init__(self):
        if self.lr0 <= 0:
            raise ConfigurationError(f"lr0 must be > 0, got {self.lr0}")
        if not 0 < self.decay <= 1:
            raise ConfigurationError(f"decay must lie in (0, 1], got {self.decay}")
        for name in ("beta1", "beta2"):
            if not 0 <= getattr(self, name) < 1:
                raise ConfigurationError(f"{name} must lie in [0, 1), got {getattr(self, name)}")
        if self.epsilon <= 0:
            raise ConfigurationError(f"epsilon must be > 0, got {self.epsilon}")
        if self.iters < 0 or self.checkpoint_every < 0:
            raise ConfigurationError("iters and checkpoint_every must be >= 0")
        if self.batch < 1 or self.workers < 1 or self.log_every < 1:
            raise ConfigurationError("batch, workers and log_every must be >= 1")
        if self.clip_norm < 0 or self.weight_decay < 0:
            raise ConfigurationError("clip_norm and weight_decay must be >= 0")

    @classmethod
    def from_dict(cls, values: Optional[Mapping[str, Any]] = None, **overrides) -> "TrainConfig":
        merged = dict(TRAIN_CONFIG)
        merged.update(values or {})
        merged.update(overrides)
        unknown = set(merged) - {f.name for f in fields(cls)}
        if unknown:
            raise ConfigurationError(f"unknown training options: {sorted(unknown)}")
        return cls(**merged)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @property
    def augment_params(self) -> Dict[str, float]:
        return {"removal_prob": self.removal_prob, "distort_scale": self.distort_scale}


@dataclass
class TrainState:
    """优化线程独占的训练状态"""
    params: GrouperParams
    adam: AdamState
    rng: np.random.Generator

    @classmethod
    def initial(cls, hyper: HyperParams, seed: int) -> "TrainState":
        rng = np.random.default_rng(seed)
        params = init_params(hyper, rng)
        return cls(params, AdamState.zeros_like(dict(params.items())), rng)

    def checkpoint(self, config: TrainConfig) -> Checkpoint:
        return Checkpoint(self.params, self.adam, config.to_dict())


@dataclass
class FitResult:
    """训练结果：最终检查点、逐步损失和验证记录"""
    checkpoint: Checkpoint
    history: pd.DataFrame
    validation: pd.DataFrame = field(default_factory=pd.DataFrame)


def _sketch_gradients(sketch: Sketch, labels: GroupLabels, params: GrouperParams,
                      seed: int) -> Tuple[float, Dict[str, Any], Dict[str, np.ndarray]]:
    """单个草图的损失和梯度；每个工作线程有自己的计算带"""
    rng = np.random.default_rng(seed)
    with Tape() as tape:
        nodes = params.bind(tape)
        total, breakdown = loss_full(sketch, labels, nodes, rng)
        tape.backward(total)
    return float(total.value), breakdown, {name: node.grad for name, node in nodes.items()}


def train_step(batch: Sequence[Example], state: TrainState, config: TrainConfig
               ) -> Tuple[TrainState, float, Dict[str, float]]:
    """一步优化：批内平均 L_F，裁剪后以 lr0·decay^step 做 Adam 更新"""
    if not batch:
        raise ContractError("train_step needs a non-empty batch")
    seeds = [int(s) for s in state.rng.integers(0, 2 ** 63 - 1, size=len(batch))]
    jobs = [(sketch, labels, state.params, seed) for (sketch, labels), seed in zip(batch, seeds)]
    if config.workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(lambda job: _sketch_gradients(*job), jobs))
    else:
        results = [_sketch_gradients(*job) for job in jobs]

    count = float(len(results))
    grads = {name: sum(r[2][name] for r in results) / count for name in state.params.names()}
    if config.weight_decay:
        grads = {name: g + config.weight_decay * state.params[name] for name, g in grads.items()}
    grads, norm = clip_by_global_norm(grads, config.clip_norm)

    lr = learning_rate(config.lr0, config.decay, state.adam.step)
    updated, adam = adam_update(dict(state.params.items()), grads, state.adam, lr,
                                config.beta1, config.beta2, config.epsilon)
    report = check_finite(updated)
    if not report["is_finite"]:
        raise DomainError(f"parameter {report['first_offender']} became non-finite after update")

    loss = sum(r[0] for r in results) / count
    breakdown = {term: sum(r[1].get(term, 0.0) for r in results) / count for term in LOSS_TERMS}
    breakdown["degenerate"] = sum(bool(r[1]["global_degenerate"]) for r in results)
    breakdown["lr"] = lr
    breakdown["grad_norm"] = norm
    return TrainState(state.params.replace(updated), adam, state.rng), loss, breakdown


def _prepare(dataset: Sequence[Tuple[Sketch, Optional[GroupLabels]]]) -> List[Example]:
    prepared = []
    for index, (sketch, labels) in enumerate(dataset):
        if labels is None:
            raise ValidationError(f"training sketch {index} has no group labels")
        prepared.append((normalize(sketch), labels))
    return prepared


def _append_metrics(path: str, step: int, loss: float, breakdown: Mapping[str, float]) -> None:
    line = " ".join([str(step), f"{loss:.6f}"]
                    + [f"{breakdown[t]:.6f}" for t in LOSS_TERMS]
                    + [f"{breakdown['lr']:.8g}"])
    with open(path, "a", encoding="utf-8") as handle:
        handle.write(line + "\n")


def validate(params: GrouperParams, validation: Sequence[Tuple[Sketch, Optional[GroupLabels]]]
             ) -> Dict[str, float]:
    """用当前参数对验证集分组并计算平均指标"""
    truths = [labels for _, labels in validation]
    if any(t is None for t in truths):
        raise ValidationError("validation sketches need group labels")
    predictions = [group(sketch, params)[0] for sketch, _ in validation]
    report = evaluate(predictions, truths, [sketch.category for sketch, _ in validation])
    return dict(report.overall)


def fit(dataset: Sequence[Tuple[Sketch, Optional[GroupLabels]]], config: Optional[TrainConfig] = None,
        hyper: Optional[HyperParams] = None, checkpoint_path: Optional[str] = None,
        metrics_path: Optional[str] = None,
        validation: Optional[Sequence[Tuple[Sketch, Optional[GroupLabels]]]] = None,
        on_checkpoint: Optional[Callable[[int, Dict[str, float]], None]] = None) -> FitResult:
    """在带标签的数据集上训练 iters 步，返回最终检查点"""
    config = config or TrainConfig()
    hyper = hyper or HyperParams()
    if not dataset:
        raise ConfigurationError("training needs at least one labeled sketch")
    examples = _prepare(dataset)
    state = TrainState.initial(hyper, config.seed)
    logger.info(f"training {state.params.count()} parameters on {len(examples)} sketches "
                f"for {config.iters} iterations (batch {config.batch})")

    rows: List[Dict[str, float]] = []
    checks: List[Dict[str, float]] = []
    window: deque = deque(maxlen=config.log_every)
    order: List[int] = []
    batch_size = min(config.batch, len(examples))

    def save(step: int) -> None:
        if checkpoint_path:
            save_checkpoint(state.checkpoint(config), checkpoint_path)
        if validation:
            summary = validate(state.params, validation)
            checks.append({"step": step, **summary})
            logger.info(f"step {step} validation voi={summary['voi']:.4f} "
                        f"pri={summary['pri']:.4f} sc={summary['sc']:.4f}")
            if on_checkpoint:
                on_checkpoint(step, summary)

    for step in range(1, config.iters + 1):
        batch = []
        while len(batch) < batch_size:
            if not order:
                order = list(state.rng.permutation(len(examples)))
            sketch, labels = examples[order.pop(0)]
            if config.augment:
                sketch, labels = augment(sketch, labels, config.augment_params, state.rng)
            batch.append((sketch, labels))

        state, loss, breakdown = train_step(batch, state, config)
        rows.append({"step": step, "loss": loss, **{t: breakdown[t] for t in LOSS_TERMS},
                     "lr": breakdown["lr"]})
        window.append(loss)
        if metrics_path:
            _append_metrics(metrics_path, step, loss, breakdown)
        if step % config.log_every == 0:
            logger.info(f"step {step} moving-average loss {np.mean(window):.4f} "
                        f"lr {breakdown['lr']:.3e}")
        if config.checkpoint_every and step % config.checkpoint_every == 0 and step != config.iters:
            save(step)

    save(config.iters)
    history = pd.DataFrame(rows, columns=["step", "loss", *LOSS_TERMS, "lr"])
    return FitResult(state.checkpoint(config), history, pd.DataFrame(checks))
