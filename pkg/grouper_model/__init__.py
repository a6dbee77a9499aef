"""
分组模型模块
提供编码器、解码器、亲和矩阵预测和全部训练损失
"""

from .params import HyperParams, GrouperParams, ParamNodes, init_params, as_nodes
from .model import (MixtureParams, DecoderOutput, encode, sample_latent, decode,
                    affinity_node, predict_affinity, forward_affinity)
from .losses import (loss_local, loss_global, loss_recon, loss_kl, loss_full,
                     loss_l2_affinity, sample_triplets, valid_triplet_count)

__all__ = ['HyperParams', 'GrouperParams', 'ParamNodes', 'init_params', 'as_nodes',
           'MixtureParams', 'DecoderOutput', 'encode', 'sample_latent', 'decode',
           'affinity_node', 'predict_affinity', 'forward_affinity', 'loss_local',
           'loss_global', 'loss_recon', 'loss_kl', 'loss_full', 'loss_l2_affinity',
           'sample_triplets', 'valid_triplet_count']
