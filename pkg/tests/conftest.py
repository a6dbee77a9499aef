import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from grouper_model import HyperParams, init_params  # noqa: E402
from stroke_core import GroupLabels, Sketch  # noqa: E402

DATA_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), "data")


def pytest_addoption(parser):
    parser.addoption("--run-slow", action="store_true", default=False,
                     help="运行完整训练的学习验收测试（数分钟）")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: 完整规模训练，默认跳过，用 --run-slow 运行")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--run-slow"):
        return
    skip = pytest.mark.skip(reason="需要 --run-slow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def tiny_hyper():
    """梯度检查和快速训练用的小模型"""
    return HyperParams(enc_hidden=4, dec_hidden=6, latent_dim=3, feat_dim=5, mixtures=2)


@pytest.fixture
def tiny_params(tiny_hyper):
    return init_params(tiny_hyper, np.random.default_rng(7))


@pytest.fixture
def two_stroke_sketch():
    """两笔画: (0,0)->(10,0)->(10,10) 和 (15,15)->(20,15)"""
    deltas = np.array([[0, 0, 0], [10, 0, 0], [0, 10, 1], [5, 5, 0], [5, 0, 1]], dtype=float)
    return Sketch(deltas, category="toy")


@pytest.fixture
def two_stroke_labels():
    return GroupLabels(np.array([0, 0, 0, 1, 1]))


@pytest.fixture
def small_labeled():
    """6 段、两组，用于梯度检查"""
    deltas = np.array([[0.5, -0.2, 0], [1.0, 0.3, 0], [-0.4, 0.8, 1],
                       [2.0, 1.5, 0], [0.7, -0.9, 0], [-0.3, 0.6, 1]], dtype=float)
    return Sketch(deltas), GroupLabels(np.array([0, 0, 0, 1, 1, 1]))


@pytest.fixture
def data_dir():
    return DATA_DIR
