"""
组重要性和抽象化
I = I_L · I_N + I_D；I_L 为长度占比，I_N 为段数占比，
I_D = max(w, h) · N_k / Σ_i d(M_k, M_i)，删除 I < I_delta 的组
"""

from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
import pandas as pd

from config.settings import ABSTRACTION_SETTINGS
from shared.errors import ContractError, ValidationError
from shared.logger import get_logger
from .polylines import PolylineGroups

logger = get_logger(__name__)


@dataclass(frozen=True)
class ImportanceScores:
    """每组的 I_L、I_N、I_D 和 I，按组号升序"""
    groups: np.ndarray
    I_L: np.ndarray
    I_N: np.ndarray
    I_D: np.ndarray
    clamped: List[int] = field(default_factory=list)  # I_D 分母被钳制的组

    @property
    def I(self) -> np.ndarray:
        return self.I_L * self.I_N + self.I_D

    def top_group(self) -> int:
        return int(self.groups[int(np.argmax(self.I))])

    def as_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"group": self.groups, "I_L": self.I_L, "I_N": self.I_N,
                             "I_D": self.I_D, "I": self.I,
                             "clamped": np.isin(self.groups, self.clamped)})


def importance(groups: PolylineGroups,
               clamp: float = ABSTRACTION_SETTINGS["distance_clamp"]) -> ImportanceScores:
    """按长度、数量和分布计算每组重要性"""
    if groups.labels is None:
        raise ValidationError("importance needs grouped polylines")
    labels = groups.labels
    ids, counts = np.unique(labels, return_counts=True)
    n = len(labels)
    extent = max(groups.bbox)

    lengths = groups.segment_lengths()
    total_length = lengths.sum()
    means = groups.segment_means()

    I_N = counts / n
    if total_length > 0:
        I_L = np.array([lengths[labels == k].sum() for k in ids]) / total_length
    else:
        logger.warning("all segments have zero length; length share falls back to count share")
        I_L = I_N.copy()

    I_D = np.empty(len(ids))
    clamped = []
    epsilon = clamp * extent
    for index, (k, count) in enumerate(zip(ids, counts)):
        member_means = means[labels == k]
        centre = member_means.mean(axis=0)
        spread = np.hypot(*(member_means - centre).T).sum()
        if spread < epsilon:
            clamped.append(int(k))
            spread = epsilon
        I_D[index] = extent * count / spread
    if clamped:
        logger.warning(f"I_D distance sum clamped to {epsilon:g} for groups {clamped}")
    return ImportanceScores(ids, I_L, I_N, I_D, clamped)


def abstract(groups: PolylineGroups, I_delta: float,
             scores: Optional[ImportanceScores] = None) -> PolylineGroups:
    """删除重要性低于 I_delta 的组，至少保留最重要的一组"""
    if I_delta < 0:
        raise ContractError(f"I_delta must be >= 0, got {I_delta}")
    scores = scores or importance(groups)
    kept = set(scores.groups[scores.I >= I_delta].tolist())
    kept.add(scores.top_group())
    removed = sorted(set(scores.groups.tolist()) - kept)
    if not removed:
        return groups
    logger.info(f"I_delta={I_delta:g}: removing groups {removed}")
    return groups.subset(np.isin(groups.labels, sorted(kept)))
