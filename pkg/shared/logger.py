"""
日志配置
"""

import logging
import logging.handlers
from typing import Any, Dict, Optional

from config.settings import LOG_CONFIG


def setup_logging(config: Optional[Dict[str, Any]] = None, level: Optional[str] = None) -> None:
    """根据 LOG_CONFIG 配置根日志；重复调用只替换本模块加的 handler"""
    cfg = dict(LOG_CONFIG)
    cfg.update(config or {})
    if level:
        cfg["level"] = level

    root = logging.getLogger()
    for handler in list(root.handlers):
        if getattr(handler, "_grouper_handler", False):
            root.removeHandler(handler)

    formatter = logging.Formatter(cfg["format"])
    if cfg.get("file"):
        handler = logging.handlers.RotatingFileHandler(
            cfg["file"], maxBytes=cfg["max_size"], backupCount=cfg["backup_count"],
            encoding="utf-8")
    else:
        handler = logging.StreamHandler()
    handler.setFormatter(formatter)
    handler._grouper_handler = True
    root.addHandler(handler)
    root.setLevel(cfg["level"])


def get_logger(name: str) -> logging.Logger:
    """获取模块日志器"""
    return logging.getLogger(name)
