"""
编码器-解码器分组模型
双向循环编码器 -> 高斯隐变量 -> 以 z 为条件的循环解码器，
解码器输出 128 维判别特征和混合密度参数
"""

from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np

from diff_engine import (Node, abs_, affine, concat, constant, exp, reshape, sigmoid,
                         slice_, softmax, tanh)
from stroke_core import AffinityKind, AffinityMatrix, Sketch
from .lstm import lstm_run
from .params import GrouperParams, ParamNodes, as_nodes

RHO_LIMIT = 1.0 - 1e-6

ParamsLike = Union[GrouperParams, ParamNodes]


@dataclass
class MixtureParams:
    """每步的二元高斯混合参数和笔状态 logits"""
    pi: Node          # (N, M)，softmax 归一化
    mu_x: Node        # (N, M)
    mu_y: Node        # (N, M)
    sigma_x: Node     # (N, M)，正
    sigma_y: Node     # (N, M)，正
    rho: Node         # (N, M)，(-1, 1)
    pen_logits: Node  # (N, 2)

    @property
    def steps(self) -> int:
        return self.pi.shape[0]


@dataclass
class DecoderOutput:
    """解码器输出"""
    features: Node        # (N, feat_dim)
    mdn: MixtureParams


def _deltas(sketch) -> np.ndarray:
    if isinstance(sketch, Sketch):
        return sketch.deltas
    return np.asarray(sketch, dtype=np.float64).reshape(-1, 3)


def _lift(value) -> Node:
    return value if isinstance(value, Node) else constant(value)


def encode(sketch, params: ParamsLike) -> Tuple[Node, Node]:
    """双向编码，返回 (mu, sigma)"""
    p = as_nodes(params)
    hidden = p.hyper.enc_hidden
    rows = [constant(row) for row in _deltas(sketch)]
    zero = constant(np.zeros(hidden))
    forward = lstm_run(rows, zero, zero, p["enc_fw_W"], p["enc_fw_b"])[-1]
    backward = lstm_run(rows[::-1], zero, zero, p["enc_bw_W"], p["enc_bw_b"])[-1]
    both = concat([forward, backward])
    mu = affine(p["mu_W"], both, p["mu_b"])
    sigma_hat = affine(p["sigma_W"], both, p["sigma_b"])
    return mu, exp(sigma_hat * 0.5)


def sample_latent(mu, sigma, rng: np.random.Generator) -> Node:
    """重参数化采样 z = mu + sigma * eps"""
    mu, sigma = _lift(mu), _lift(sigma)
    eps = rng.standard_normal(mu.shape)
    return mu + sigma * constant(eps)


def decode(sketch, z, params: ParamsLike) -> DecoderOutput:
    """教师强制解码，每步输出特征和混合密度参数"""
    p = as_nodes(params)
    hyper = p.hyper
    hidden, m = hyper.dec_hidden, hyper.mixtures
    z = _lift(z)

    init = tanh(affine(p["init_W"], z, p["init_b"]))
    h0 = slice_(init, slice(0, hidden))
    c0 = slice_(init, slice(hidden, 2 * hidden))
    rows = [constant(row) for row in _deltas(sketch)]
    inputs = [concat([row, z]) for row in rows] if hyper.z_every_step else rows
    states = lstm_run(inputs, h0, c0, p["dec_W"], p["dec_b"])
    H = concat([reshape(s, (1, hidden)) for s in states], axis=0)

    features = affine(p["feat_W"], H, p["feat_b"])
    Y = affine(p["mdn_W"], H, p["mdn_b"])

    def block(k: int, width: int = m) -> Node:
        return slice_(Y, (slice(None), slice(k * m, k * m + width)))

    mdn = MixtureParams(
        pi=softmax(block(0)),
        mu_x=block(1),
        mu_y=block(2),
        sigma_x=exp(block(3)),
        sigma_y=exp(block(4)),
        rho=tanh(block(5)) * RHO_LIMIT,
        pen_logits=block(6, 2),
    )
    return DecoderOutput(features, mdn)


def _pair_index(n: int) -> Tuple[np.ndarray, np.ndarray]:
    return np.divmod(np.arange(n * n), n)


def affinity_node(features, params: ParamsLike) -> Node:
    """训练用的 N×N 预测亲和矩阵（对角线不覆盖）"""
    p = as_nodes(params)
    features = _lift(features)
    n = features.shape[0]
    ii, jj = _pair_index(n)
    diff = abs_(slice_(features, ii) - slice_(features, jj))
    if p.hyper.classifier_hidden:
        diff = tanh(affine(p["cls_hidden_W"], diff, p["cls_hidden_b"]))
    logits = affine(p["cls_W"], diff, p["cls_b"])
    return sigmoid(reshape(logits, (n, n)))


def predict_affinity(features, params: ParamsLike) -> AffinityMatrix:
    """预测亲和矩阵，对角线置 1"""
    values = np.array(affinity_node(features, params).value)
    upper = np.triu(values, 1)
    values = upper + upper.T
    np.fill_diagonal(values, 1.0)
    return AffinityMatrix(values, AffinityKind.PREDICTED)


def forward_affinity(sketch, params: ParamsLike) -> AffinityMatrix:
    """测试时前向：z 取隐变量均值"""
    mu, _ = encode(sketch, params)
    output = decode(sketch, mu, params)
    return predict_affinity(output.features, params)
