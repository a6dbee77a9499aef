import numpy as np
from typing import Any, Dict, Mapping


class FiniteChecker:
    """数值有限性检查器"""

    def __init__(self):
        self.check_patterns = {
            'nan': np.isnan,
            'inf': np.isinf
        }

    def check_arrays(self, arrays: Mapping[str, Any]) -> Dict[str, Any]:
        """检查一组命名数组"""
        issues = []

        for name, value in arrays.items():
            data = np.asarray(value, dtype=np.float64)
            for category, predicate in self.check_patterns.items():
                count = int(predicate(data).sum())
                if count:
                    issues.append({
                        "name": name,
                        "category": category,
                        "count": count
                    })

        return {
            "is_finite": len(issues) == 0,
            "issues": issues,
            "first_offender": issues[0]["name"] if issues else None
        }


def check_finite(arrays: Mapping[str, Any]) -> Dict[str, Any]:
    """检查数组是否全部有限"""
    return FiniteChecker().check_arrays(arrays)
