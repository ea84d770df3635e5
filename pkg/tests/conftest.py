# -*- coding: utf-8 -*-
"""
pytest 公共配置：把 src 加入导入路径，提供带种子的随机数生成器
"""
import sys
from pathlib import Path

import numpy as np
import pytest

# 确保可以导入 src 下的模块
ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / 'src'))


def pytest_addoption(parser):
    parser.addoption('--runslow', action='store_true', default=False, help='运行标记为 slow 的验收测试')


def pytest_collection_modifyitems(config, items):
    if config.getoption('--runslow'):
        return
    skip_slow = pytest.mark.skip(reason='需要 --runslow')
    for item in items:
        if 'slow' in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def rng():
    return np.random.default_rng(20240101)


@pytest.fixture
def project_root() -> Path:
    return ROOT


@pytest.fixture
def fixture_edges(project_root) -> Path:
    return project_root / 'data' / 'fixtures' / 'uci_fixture_n50.edges'
