"""
草图抽象化合成
(栅格 -> 折线) -> 分组 -> 重要性 -> 在每个阈值下删除不重要的组
"""

from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from config.settings import ABSTRACTION_SETTINGS
from grouping_inference import group
from shared.errors import ContractError
from shared.logger import get_logger
from stroke_core import GroupLabels, Sketch
from .importance import abstract, importance
from .polylines import PolylineGroups
from .raster import trace_edges

logger = get_logger(__name__)


def synthesize(source: Union[np.ndarray, Sketch], model=None,
               thresholds: Optional[Sequence[float]] = None,
               labels: Optional[GroupLabels] = None,
               relative: bool = ABSTRACTION_SETTINGS["relative_thresholds"]
               ) -> List[Tuple[Sketch, GroupLabels]]:
    """每个阈值输出一个抽象草图及其组号；relative 时阈值乘以最大组重要性"""
    thresholds = list(ABSTRACTION_SETTINGS["thresholds"] if thresholds is None else thresholds)
    if not thresholds:
        raise ContractError("at least one threshold is needed")
    if any(t < 0 for t in thresholds):
        raise ContractError(f"thresholds must be >= 0, got {thresholds}")
    if labels is None and model is None:
        raise ContractError("either group labels or a model checkpoint is needed")

    params = getattr(model, "params", model)
    limit = params.hyper.max_segments if params is not None else None
    if isinstance(source, Sketch):
        polylines = PolylineGroups.from_sketch(source)
        sketch = source
    else:
        polylines = trace_edges(source)
        sketch = polylines.to_sketch(max_segments=limit or len(polylines))

    if labels is None:
        labels = group(sketch, params)[0]
    grouped = polylines.with_labels(labels)
    scores = importance(grouped)
    scale = float(scores.I.max()) if relative else 1.0
    logger.info(f"{len(scores.groups)} groups, importance {np.round(scores.I, 4).tolist()}")

    results = []
    for threshold in thresholds:
        kept = abstract(grouped, threshold * scale, scores)
        mode = "relative" if relative else "absolute"
        provenance = f"abstract I_delta={threshold:g} ({mode})"
        out = kept.to_sketch(provenance=provenance, max_segments=max(len(kept), limit or 0))
        results.append((out, GroupLabels(kept.labels)))
    return results
