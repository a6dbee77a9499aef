"""
数据集级评估
逐草图指标，按类别平均，再对类别平均得到总体结果
"""

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

import pandas as pd

from config.settings import EVAL_SETTINGS
from shared.errors import ContractError
from shared.report_formatter import ReportFormatter
from .partition import LabelsLike, pri, sc, voi

METRIC_COLUMNS = ["voi", "pri", "sc"]
AVERAGE_ROW = "Average"
UNCATEGORIZED = "uncategorized"


@dataclass(frozen=True)
class PartitionMetrics:
    """单个草图的划分指标"""
    voi: float
    pri: float
    sc: float

    @classmethod
    def compute(cls, prediction: LabelsLike, truth: LabelsLike,
                weights: Optional[Sequence[float]] = None, symmetric_sc: bool = False) -> "PartitionMetrics":
        return cls(voi(prediction, truth, weights), pri(prediction, truth, weights),
                   sc(prediction, truth, weights, symmetric=symmetric_sc))


@dataclass
class EvaluationReport:
    """逐草图、逐类别和总体指标"""
    per_sketch: pd.DataFrame
    per_category: pd.DataFrame
    overall: Dict[str, float]
    weighting: str = EVAL_SETTINGS["weighting"]
    symmetric_sc: bool = EVAL_SETTINGS["symmetric_sc"]

    def table(self) -> pd.DataFrame:
        """类别行加 Average 行"""
        rows = self.per_category.reset_index()
        average = pd.DataFrame([{"category": AVERAGE_ROW, **self.overall}])
        return pd.concat([rows, average], ignore_index=True)[["category"] + METRIC_COLUMNS]

    def format(self, delimiter: str = EVAL_SETTINGS["delimiter"]) -> str:
        notes = [
            f"voi in bits (log base {EVAL_SETTINGS['log_base']}); lower is better",
            "pri, sc in [0, 1]; higher is better",
            f"segment weighting: {self.weighting}",
            "sc: " + ("mean of both covering directions" if self.symmetric_sc
                      else "covering of human grouping by machine grouping"),
        ]
        return ReportFormatter(delimiter).format_table(self.table(), notes)


def evaluate(predictions: Sequence[LabelsLike], ground_truths: Sequence[LabelsLike],
             categories: Optional[Sequence[Optional[str]]] = None,
             weights: Optional[Sequence[Sequence[float]]] = None,
             symmetric_sc: bool = EVAL_SETTINGS["symmetric_sc"]) -> EvaluationReport:
    """草图内等权平均到类别，再对类别等权平均"""
    if len(predictions) != len(ground_truths):
        raise ContractError(f"{len(predictions)} predictions for {len(ground_truths)} ground truths")
    if not predictions:
        raise ContractError("nothing to evaluate")
    categories = list(categories) if categories is not None else [None] * len(predictions)
    if len(categories) != len(predictions) or (weights is not None and len(weights) != len(predictions)):
        raise ContractError("categories and weights must align with predictions")

    rows: List[Dict] = []
    for index, (prediction, truth) in enumerate(zip(predictions, ground_truths)):
        sketch_weights = weights[index] if weights is not None else None
        metrics = PartitionMetrics.compute(prediction, truth, sketch_weights, symmetric_sc)
        rows.append({"sketch": index, "category": categories[index] or UNCATEGORIZED,
                     "voi": metrics.voi, "pri": metrics.pri, "sc": metrics.sc})

    per_sketch = pd.DataFrame(rows)
    per_category = per_sketch.groupby("category", sort=True)[METRIC_COLUMNS].mean()
    overall = {name: float(per_category[name].mean()) for name in METRIC_COLUMNS}
    return EvaluationReport(per_sketch, per_category, overall,
                            "equal" if weights is None else "arc-length", symmetric_sc)
