"""
配置文件加载
key=value 文本格式，优先级: 命令行参数 > 配置文件 > 默认值
"""

from typing import Any, Dict, Mapping, Optional

from shared.errors import ConfigurationError


def load_config_file(path: str) -> Dict[str, str]:
    """读取 key=value 配置文件"""
    values = {}
    try:
        with open(path, encoding="utf-8") as handle:
            lines = handle.readlines()
    except OSError as e:
        raise ConfigurationError(f"无法读取配置文件 {path}: {e}")

    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"{path}:{lineno}: expected key=value, got {raw.strip()!r}")
        key, value = line.split("=", 1)
        values[key.strip().replace("-", "_")] = value.strip()
    return values


def _coerce(key: str, raw: Any, default: Any) -> Any:
    if not isinstance(raw, str) or isinstance(default, str) or default is None:
        return raw
    try:
        if isinstance(default, bool):
            lowered = raw.lower()
            if lowered in ("1", "true", "yes", "on"):
                return True
            if lowered in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float):
            return float(raw)
        if isinstance(default, (list, tuple)):
            return [type(default[0])(v) if default else float(v)
                    for v in raw.replace(",", " ").split()]
    except ValueError:
        raise ConfigurationError(f"invalid value for {key}: {raw!r}")
    return raw


def resolve_options(defaults: Mapping[str, Any],
                    file_values: Optional[Mapping[str, str]] = None,
                    flags: Optional[Mapping[str, Any]] = None) -> Dict[str, Any]:
    """合并默认值、配置文件和命令行参数"""
    resolved = dict(defaults)
    for key, raw in (file_values or {}).items():
        if key in resolved:
            resolved[key] = _coerce(key, raw, defaults[key])
    for key, value in (flags or {}).items():
        if value is not None and key in resolved:
            resolved[key] = value
    return resolved
