# -*- coding: utf-8 -*-
"""
一键复现实验表格并保存结果到 output/ 目录：
- 依次运行 config/experiments/ 下的实验配置（距离表、QQ、方差、一致性）
- 运行真实数据流水线：UC Irvine 数据存在时使用全量数据，否则使用 n=50 夹具
- 每个实验写到 output/<时间戳>/<实验名>/，附运行清单
"""
import sys
from pathlib import Path
from datetime import datetime

# 项目根目录
ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / 'src'))

import logging
from modules.config import get_config
from modules.errors import P0DPError
from modules.experiments import SimConfig, run_campaign, run_realdata, write_realdata_report
from modules.utils import LogUtils

DEFAULT_CAMPAIGNS = ('distance_table', 'variance', 'consistency', 'qq')


def ensure_dirs() -> Path:
    ts = datetime.now().strftime('%Y%m%d_%H%M%S')
    out = ROOT / 'output' / ts
    out.mkdir(parents=True, exist_ok=True)
    (ROOT / 'logs').mkdir(parents=True, exist_ok=True)
    return out


def run_realdata_stage(outdir: Path, repetitions: int, base_seed: int) -> dict:
    config = get_config()
    dataset = config.resolve_path('experiments.dataset_path', 'data/uci/CollegeMsg.txt')
    edges = dataset if dataset.exists() else config.resolve_path(
        'experiments.fixture_path', 'data/fixtures/uci_fixture_n50.edges')
    epsilons = ['logn_q', '2', '3']

    report = run_realdata(edges, epsilons, repetitions, base_seed)
    payload = {'edges': str(edges), 'epsilons': epsilons, 'repetitions': repetitions}
    return write_realdata_report(report, outdir / 'realdata', payload, base_seed)


def run_pipeline(names, realdata_reps: int = 200, base_seed: int = 20240101) -> int:
    try:
        LogUtils.setup_logging(log_dir=ROOT / 'logs', log_level='INFO')
    except Exception:
        pass
    logger = logging.getLogger('reproduce_tables')

    outdir = ensure_dirs()
    results = {}

    try:
        for name in names:
            config_path = ROOT / 'config' / 'experiments' / f'{name}.json'
            if not config_path.exists():
                print(f'[错误] 找不到实验配置: {config_path}')
                return 2
            cfg = SimConfig.load(config_path)
            results[name] = run_campaign(cfg, outdir / name)

        results['realdata'] = run_realdata_stage(outdir, realdata_reps, base_seed)

        print('RESULT: OK')
        for name, result in results.items():
            print(f'RESULT_PATHS[{name}]:', result['files'])
        return 0

    except P0DPError as e:
        logger.error(f'复现失败: {e}')
        print('RESULT: FAIL')
        print('ERROR:', str(e))
        return 3


if __name__ == '__main__':
    # 支持命令行指定实验名（逗号分隔），否则运行全部
    selected = DEFAULT_CAMPAIGNS
    if len(sys.argv) >= 2 and sys.argv[1].strip():
        selected = tuple(s.strip() for s in sys.argv[1].split(',') if s.strip())
    sys.exit(run_pipeline(selected))
