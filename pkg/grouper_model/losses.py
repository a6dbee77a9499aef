"""
分组损失
局部分组损失 L_A、全局三元组损失 L_G、重建损失 L_R、KL 损失和完整目标 L_F
"""

from typing import Any, Callable, Dict, Tuple

import numpy as np

from diff_engine import (Node, constant, exp, l2_normalize, log, logsumexp, maximum, mean,
                         mul, slice_, square, sum_)
from shared.errors import ContractError, DomainError, NonFiniteLossError
from shared.logger import get_logger
from stroke_core import AffinityMatrix, GroupLabels, to_group_matrix
from .model import MixtureParams, _deltas, affinity_node, decode, encode, sample_latent
from .params import as_nodes

logger = get_logger(__name__)

CLAMP = 1e-7
LOG_2PI = float(np.log(2.0 * np.pi))


def _as_node(value) -> Node:
    if isinstance(value, Node):
        return value
    if isinstance(value, AffinityMatrix):
        return constant(value.values)
    return constant(np.asarray(value, dtype=np.float64))


def _as_array(value) -> np.ndarray:
    if isinstance(value, AffinityMatrix):
        return value.values
    if isinstance(value, GroupLabels):
        return to_group_matrix(value).values
    return np.asarray(value, dtype=np.float64)


def loss_local(G_hat, G) -> Node:
    """逐对二元交叉熵，对全部 N² 有序对求和（含对角线）"""
    G_hat = _as_node(G_hat)
    target = _as_array(G)
    if G_hat.shape != target.shape or G_hat.value.ndim != 2:
        raise ContractError(f"loss_local: prediction {G_hat.shape} vs ground truth {target.shape}")
    low = maximum(G_hat, CLAMP)
    clamped = 1.0 - maximum(1.0 - low, CLAMP)
    positive = mul(constant(target), log(clamped))
    negative = mul(constant(1.0 - target), log(1.0 - clamped))
    return -sum_(positive + negative)


def loss_l2_affinity(G_hat, G) -> Node:
    """预测亲和矩阵与真值的均方误差"""
    G_hat = _as_node(G_hat)
    target = _as_array(G)
    if G_hat.shape != target.shape:
        raise ContractError(f"loss_l2_affinity: prediction {G_hat.shape} vs ground truth {target.shape}")
    return mean(square(G_hat - constant(target)))


def valid_triplet_count(labels: np.ndarray) -> Tuple[np.ndarray, int]:
    """每个锚点的有效三元组数和总数"""
    _, inverse, counts = np.unique(labels, return_inverse=True, return_counts=True)
    sizes = counts[inverse.reshape(-1)]
    per_anchor = (sizes - 1) * (len(labels) - sizes)
    return per_anchor, int(per_anchor.sum())


def sample_triplets(labels: np.ndarray, count: int, rng: np.random.Generator,
                    exhaustive: bool = False) -> np.ndarray:
    """均匀采样 (anchor, positive, negative) 三元组，返回 (T, 3)"""
    labels = np.asarray(labels)
    per_anchor, total = valid_triplet_count(labels)
    if total == 0:
        return np.zeros((0, 3), dtype=int)
    indices = np.arange(len(labels))
    if exhaustive or total <= count:
        triplets = [(i, p, n)
                    for i in indices if per_anchor[i]
                    for p in indices[(labels == labels[i]) & (indices != i)]
                    for n in indices[labels != labels[i]]]
        return np.array(triplets, dtype=int)

    anchors = rng.choice(indices, size=count, p=per_anchor / total)
    triplets = np.empty((count, 3), dtype=int)
    for t, i in enumerate(anchors):
        positives = indices[(labels == labels[i]) & (indices != i)]
        negatives = indices[labels != labels[i]]
        triplets[t] = (i, positives[rng.integers(len(positives))], negatives[rng.integers(len(negatives))])
    return triplets


def loss_global(G_hat, labels, margin: float, rng: np.random.Generator,
                triplets_per_sketch: int = 0, exhaustive: bool = False) -> Tuple[Node, bool]:
    """l2 归一化亲和矩阵行上的三元组损失，返回 (损失, 是否退化)"""
    if margin <= 0:
        raise ContractError(f"margin must be > 0, got {margin}")
    G_hat = _as_node(G_hat)
    labels = labels.labels if isinstance(labels, GroupLabels) else np.asarray(labels)
    n = len(labels)
    if G_hat.shape != (n, n):
        raise ContractError(f"loss_global: prediction {G_hat.shape} vs {n} labels")

    count = triplets_per_sketch or 4 * n
    triplets = sample_triplets(labels, count, rng, exhaustive)
    if len(triplets) == 0:
        logger.warning("no valid triplet (need >= 2 groups and a group with >= 2 members); L_G = 0")
        return constant(0.0), True

    rows = l2_normalize(G_hat)
    anchor = slice_(rows, triplets[:, 0])
    d_pos = sum_(square(anchor - slice_(rows, triplets[:, 1])), axis=1)
    d_neg = sum_(square(anchor - slice_(rows, triplets[:, 2])), axis=1)
    return mean(maximum(margin + d_pos - d_neg, 0.0)), False


def loss_recon(mdn: MixtureParams, sketch) -> Node:
    """第 i 步的混合密度预测第 i+1 段：负对数似然加笔状态交叉熵，按步平均"""
    deltas = _deltas(sketch)
    n = len(deltas)
    if mdn.steps != n:
        raise ContractError(f"loss_recon: {mdn.steps} decoder steps for {n} segments")
    if n < 2:
        return constant(0.0)
    steps = n - 1
    m = mdn.pi.shape[1]
    head = (slice(0, steps),)
    targets = deltas[1:]

    dx = constant(np.repeat(targets[:, :1], m, axis=1))
    dy = constant(np.repeat(targets[:, 1:2], m, axis=1))
    log_sx = log(slice_(mdn.sigma_x, head))
    log_sy = log(slice_(mdn.sigma_y, head))
    rho = slice_(mdn.rho, head)
    zx = (dx - slice_(mdn.mu_x, head)) * exp(-log_sx)
    zy = (dy - slice_(mdn.mu_y, head)) * exp(-log_sy)
    log_one_minus = log(1.0 - square(rho))
    quad = square(zx) + square(zy) - 2.0 * rho * zx * zy
    log_density = (-LOG_2PI - log_sx - log_sy - 0.5 * log_one_minus
                   - 0.5 * quad * exp(-log_one_minus))
    log_mix = logsumexp(log(slice_(mdn.pi, head)) + log_density, axis=1)
    offset_term = -mean(log_mix)

    logits = slice_(mdn.pen_logits, head)
    truth = targets[:, 2].astype(int)
    chosen = slice_(logits, (np.arange(steps), truth))
    pen_term = mean(logsumexp(logits, axis=1) - chosen)
    return offset_term + pen_term


def loss_kl(mu, sigma) -> Node:
    """KL(N(mu, sigma²) || N(0, I))，对维度求和"""
    mu, sigma = _as_node(mu), _as_node(sigma)
    return -0.5 * sum_(1.0 + 2.0 * log(sigma) - square(mu) - square(sigma))


def _guarded(term: str, compute: Callable[[], Any]) -> Any:
    """原语产生非有限值时报告出错的损失项"""
    try:
        return compute()
    except DomainError as e:
        raise NonFiniteLossError(term, float("nan")) from e


def loss_full(sketch, labels: GroupLabels, params, rng: np.random.Generator
              ) -> Tuple[Node, Dict[str, float]]:
    """L_F = λa·L_A + λg·L_G + λr·L_R + λkl·L_KL (+ λl2·L_l2)，分项为加权前数值"""
    p = as_nodes(params)
    hyper = p.hyper
    if len(labels) != len(_deltas(sketch)):
        raise ContractError("labels and sketch lengths differ")

    def forward():
        mu, sigma = encode(sketch, p)
        z = sample_latent(mu, sigma, rng)
        output = decode(sketch, z, p)
        return mu, sigma, output, affinity_node(output.features, p)

    mu, sigma, output, G_hat = _guarded("forward", forward)
    G = to_group_matrix(labels)

    terms = {
        "L_A": _guarded("L_A", lambda: loss_local(G_hat, G)),
        "L_R": _guarded("L_R", lambda: loss_recon(output.mdn, sketch)),
        "L_KL": _guarded("L_KL", lambda: loss_kl(mu, sigma)),
    }
    terms["L_G"], degenerate = _guarded("L_G", lambda: loss_global(
        G_hat, labels, hyper.margin, rng, hyper.triplets_per_sketch, hyper.exhaustive_triplets))
    if hyper.lambda_l2:
        terms["L_l2"] = _guarded("L_l2", lambda: loss_l2_affinity(G_hat, G))

    def combine():
        total = (terms["L_A"] * hyper.lambda_a + terms["L_G"] * hyper.lambda_g
                 + terms["L_R"] * hyper.lambda_r + terms["L_KL"] * hyper.lambda_kl)
        if "L_l2" in terms:
            total = total + terms["L_l2"] * hyper.lambda_l2
        return total

    total = _guarded("L_F", combine)
    breakdown = {name: float(node.value) for name, node in terms.items()}
    breakdown["global_degenerate"] = degenerate
    return total, breakdown
