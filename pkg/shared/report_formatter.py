"""
报告格式化器
"""

from typing import Iterable, List, Optional

import pandas as pd


class ReportFormatter:
    """分隔符文本报告格式化器"""

    def __init__(self, delimiter: str = "\t", precision: int = 4):
        self.delimiter = delimiter
        self.precision = precision

    def format_table(self, frame: pd.DataFrame, header_notes: Optional[Iterable[str]] = None) -> str:
        """将表格格式化为带注释头的分隔符文本"""
        lines: List[str] = [f"# {note}" for note in (header_notes or [])]
        lines.append(self.delimiter.join(str(c) for c in frame.columns))
        for row in frame.itertuples(index=False):
            cells = []
            for value in row:
                if isinstance(value, float):
                    cells.append(f"{value:.{self.precision}f}")
                else:
                    cells.append(str(value))
            lines.append(self.delimiter.join(cells))
        return "\n".join(lines) + "\n"
