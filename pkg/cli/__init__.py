"""
命令行模块
提供子命令、SVG 渲染和 QuickDraw 导入功能
"""

from .commands import CommandResult, build_parser, run, main
from .render import render_svg
from .quickdraw import parse_quickdraw

__all__ = ['CommandResult', 'build_parser', 'run', 'main', 'render_svg', 'parse_quickdraw']
