"""
平均链接凝聚聚类
从单元素簇开始，反复合并平均簇间亲和度最大的一对，直到最大值不超过 0.5
"""

from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from config.settings import INFERENCE_SETTINGS
from stroke_core import AffinityMatrix, GroupLabels, canonicalize


@dataclass
class ClusterState:
    """当前簇（按最小成员排序）及簇间亲和度之和"""
    clusters: List[List[int]]
    totals: np.ndarray  # 簇间亲和度之和

    @classmethod
    def singletons(cls, values: np.ndarray) -> "ClusterState":
        return cls([[i] for i in range(len(values))], np.array(values, dtype=np.float64))

    @property
    def sizes(self) -> np.ndarray:
        return np.array([len(c) for c in self.clusters], dtype=np.float64)

    @property
    def linkage(self) -> np.ndarray:
        """平均簇间亲和度（对称）"""
        sizes = self.sizes
        return self.totals / np.outer(sizes, sizes)

    def best_pair(self) -> Optional[Tuple[int, int, float]]:
        """平均亲和度最大的簇对；相同时取最小的 (a, b)"""
        k = len(self.clusters)
        if k < 2:
            return None
        mean = np.where(np.triu(np.ones((k, k), dtype=bool), 1), self.linkage, -np.inf)
        flat = int(np.argmax(mean))
        a, b = divmod(flat, k)
        return a, b, float(mean[a, b])

    def merge(self, a: int, b: int) -> None:
        """把簇 b 并入簇 a（a < b，保持按最小成员排序）"""
        self.clusters[a] = sorted(self.clusters[a] + self.clusters[b])
        del self.clusters[b]
        totals = self.totals.copy()
        totals[a, :] += totals[b, :]
        totals[:, a] += totals[:, b]
        self.totals = np.delete(np.delete(totals, b, axis=0), b, axis=1)

    def labels(self, n: int) -> np.ndarray:
        labels = np.empty(n, dtype=int)
        for k, members in enumerate(self.clusters):
            labels[members] = k
        return canonicalize(labels)


def cluster_affinity(G_hat: AffinityMatrix,
                     threshold: float = INFERENCE_SETTINGS["merge_threshold"]) -> GroupLabels:
    """对预测亲和矩阵做平均链接聚类，组数自动确定"""
    values = G_hat.values if isinstance(G_hat, AffinityMatrix) else np.asarray(G_hat, dtype=np.float64)
    state = ClusterState.singletons(values)
    while True:
        best = state.best_pair()
        if best is None or not best[2] > threshold:
            break
        state.merge(best[0], best[1])
    return GroupLabels(state.labels(len(values)))
