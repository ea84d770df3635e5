"""
⌨️ 命令行模块
sample / flip / laplace / denoise / fit / simulate / analyze 七个子命令
"""

import argparse
import io
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from .config import CONFIG
from .errors import DatasetMissingError, DomainError, NumericalFailure, P0DPError
from .estimation import fit_denoised_laplace, fit_laplace, fit_ldp, fit_mle, variance_report
from .graph_core import BiDegreeSequence, IntegerBiSequence, bi_degree_sequence, load_edge_list, write_edge_list
from .p0_model import linear_parameters, sample_graph
from .privacy_mechanisms import (PairwiseFlipSpec, PrivacyBudget, dyad_ratio_from_edge_flip, edge_flip,
                                 edge_flip_ratio, epsilon_schedule, laplace_release, pairwise_edge_flip,
                                 verify_pairwise_ldp)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERICAL = 3


class UsageError(Exception):
    """命令行用法错误"""


class _Parser(argparse.ArgumentParser):
    """用法错误时抛出异常而不是直接退出，以便返回约定的退出码"""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        raise UsageError(message)


# ========== 输入输出 ==========

def _read_text(path: Optional[str]) -> str:
    if path in (None, '-'):
        return sys.stdin.read()
    file_path = Path(path)
    if not file_path.exists():
        raise DatasetMissingError(file_path, "请检查 --in 指定的路径")
    return file_path.read_text(encoding='utf-8')


def _write_text(path: Optional[str], text: str) -> None:
    if path in (None, '-'):
        sys.stdout.write(text)
        return
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(text, encoding='utf-8')
    logger.info(f"💾 已写出 {out}")


def sequence_frame(values: Sequence[float], label: str = 'kind') -> pd.DataFrame:
    """把 2n 向量展开为 "index,<label>,value" 表（出度块在前）"""
    values = np.asarray(values)
    n = values.shape[0] // 2
    return pd.DataFrame({
        'index': np.concatenate([np.arange(n), np.arange(n)]),
        label: ['out'] * n + ['in'] * n,
        'value': values,
    })


def _frame_to_csv(frame: pd.DataFrame) -> str:
    return frame.to_csv(index=False, lineterminator='\n')


def parse_sequence_csv(text: str) -> np.ndarray:
    """
    读取 "index,kind,value" 或 "index,block,value" 格式的双序列

    Returns:
        长度 2n 的向量（出度块在前）
    """
    try:
        frame = pd.read_csv(io.StringIO(text))
    except (pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise DomainError(f"序列 CSV 解析失败: {e}") from None
    label = 'kind' if 'kind' in frame.columns else 'block'
    if not {'index', label, 'value'} <= set(frame.columns):
        raise DomainError(f"序列 CSV 需要列 index,kind,value（或 index,block,value），实际为 {list(frame.columns)}")
    blocks = []
    for name in ('out', 'in'):
        part = frame[frame[label] == name].sort_values('index')
        if not np.array_equal(part['index'].to_numpy(), np.arange(len(part))):
            raise DomainError(f"{name} 块的下标必须为 0..n−1")
        blocks.append(part['value'].to_numpy())
    if blocks[0].shape != blocks[1].shape or blocks[0].shape[0] < 2:
        raise DomainError("出度块与入度块长度必须相等且至少为 2")
    return np.concatenate(blocks)


def _read_degrees(path: Optional[str]) -> np.ndarray:
    """--in 为 .csv 时按序列 CSV 读取，否则按边列表读取并取双度序列"""
    text = _read_text(path)
    if path and path.endswith('.csv'):
        return parse_sequence_csv(text)
    return bi_degree_sequence(load_edge_list(text)).as_vector()


def _integer_vector(values: np.ndarray) -> np.ndarray:
    if not np.all(values == np.round(values)):
        raise DomainError("该模式需要整数序列")
    return values.astype(np.int64)


# ========== 子命令 ==========

def cmd_sample(args: argparse.Namespace) -> int:
    theta = linear_parameters(args.n, args.L)
    graph = sample_graph(theta, args.seed)
    logger.info(f"🎲 已抽样 p0 图: n={graph.n}, 边数 {graph.num_edges}")
    _write_text(args.out, write_edge_list(graph))
    return EXIT_OK


def cmd_flip(args: argparse.Namespace) -> int:
    graph = load_edge_list(_read_text(args.input))
    if args.pairwise:
        try:
            gammas = [float(x) for x in args.pairwise.split(',')]
        except ValueError:
            raise UsageError("--pairwise 需要三个逗号分隔的数值 g1,g2,g3") from None
        if len(gammas) != 3:
            raise UsageError("--pairwise 需要三个逗号分隔的数值 g1,g2,g3")
        spec = PairwiseFlipSpec(*gammas)
        if args.epsilon is not None:
            epsilon = epsilon_schedule(args.epsilon, graph.n)
            satisfied = verify_pairwise_ldp(spec, epsilon)
            logger.info(f"成对翻转 ε={epsilon:.4g} 弱边 LDP 条件: {'满足' if satisfied else '不满足'}")
        released = pairwise_edge_flip(graph, spec, args.seed)
    else:
        if args.epsilon is None:
            raise UsageError("flip 需要 --epsilon 或 --pairwise")
        budget = PrivacyBudget(epsilon_schedule(args.epsilon, graph.n))
        logger.info(f"🔐 边翻转: ε={budget.epsilon:.4g}, p={budget.flip_keep_prob:.6f}, "
                    f"单边比值 {edge_flip_ratio(budget):.4g}, 二元组比值 {dyad_ratio_from_edge_flip(budget):.4g}")
        released = edge_flip(graph, budget, args.seed)
    _write_text(args.out, write_edge_list(released))
    return EXIT_OK


def cmd_laplace(args: argparse.Namespace) -> int:
    degrees = BiDegreeSequence.from_vector(_integer_vector(_read_degrees(args.input)))
    budget = PrivacyBudget(epsilon_schedule(args.epsilon, degrees.n))
    z = laplace_release(degrees, budget, args.seed)
    logger.info(f"🔐 离散拉普拉斯发布: ε={budget.epsilon:.4g}, λ={budget.laplace_scale:.6f}")
    _write_text(args.out, _frame_to_csv(sequence_frame(z.as_vector(), label='block')))
    return EXIT_OK


def cmd_denoise(args: argparse.Namespace) -> int:
    from .denoise import denoise_l1

    values = _integer_vector(_read_degrees(args.input))
    result = denoise_l1(IntegerBiSequence(values), args.n)
    logger.info(f"🧹 去噪完成: L1 代价 {result.l1_cost}, 精确解 {result.exact}")
    if args.out and args.out.endswith('.json'):
        _write_text(args.out, result.to_json(ensure_ascii=False, indent=2) + "\n")
    else:
        _write_text(args.out, _frame_to_csv(sequence_frame(result.sequence.as_vector())))
    return EXIT_OK


def cmd_fit(args: argparse.Namespace) -> int:
    values = _read_degrees(args.input)
    n = values.shape[0] // 2
    p = 1.0
    if args.mode == 'mle':
        fit = fit_mle(BiDegreeSequence.from_vector(_integer_vector(values)))
    elif args.mode == 'laplace':
        fit = fit_laplace(IntegerBiSequence(_integer_vector(values)))
    elif args.mode == 'denoised':
        fit = fit_denoised_laplace(IntegerBiSequence(_integer_vector(values)))
    else:
        if args.epsilon is None:
            raise UsageError("--mode ldp 需要 --epsilon")
        budget = PrivacyBudget(epsilon_schedule(args.epsilon, n))
        p = budget.flip_keep_prob
        fit = fit_ldp(BiDegreeSequence.from_vector(_integer_vector(values)), budget.epsilon)

    payload: Dict[str, Any] = {'mode': args.mode, 'fit': json.loads(fit.to_json())}
    if fit.converged:
        report = variance_report(fit.theta_hat, p, k=min(args.k, 2 * n - 1))
        payload['variance'] = json.loads(report.to_json())
    _write_text(args.out, json.dumps(payload, ensure_ascii=False, indent=2) + "\n")

    if not fit.converged:
        raise NumericalFailure(f"估计不存在: {fit.failure_reason.value}", fit)
    logger.info(f"✅ 估计收敛: 迭代 {fit.iterations} 次, 残差 {fit.residual_inf:.3e}")
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace) -> int:
    from .experiments import SimConfig, run_campaign

    config_path = Path(args.config)
    if not config_path.exists():
        raise DatasetMissingError(config_path, "请检查 --config 指定的路径")
    cfg = SimConfig.load(config_path)
    outdir = Path(args.outdir) if args.outdir else CONFIG.resolve_path('experiments.output_dir', 'output') / cfg.name
    result = run_campaign(cfg, outdir, workers=args.workers)
    logger.info(f"🏁 实验完成: {result['files']}")
    return EXIT_OK


def cmd_analyze(args: argparse.Namespace) -> int:
    from .dataset_client import DatasetClient
    from .experiments import MECHANISMS, run_realdata, write_realdata_report

    if args.fixture:
        edges = CONFIG.resolve_path('experiments.fixture_path', 'data/fixtures/uci_fixture_n50.edges')
    elif args.edges:
        edges = Path(args.edges)
    else:
        client = DatasetClient()
        if args.download:
            result = client.download()
            if not result['success']:
                raise DatasetMissingError(client.target_path, result['error'])
        edges = client.target_path

    epsilons = [token.strip() for token in args.epsilons.split(',') if token.strip()]
    mechanisms = [m.strip() for m in args.mechanisms.split(',')] if args.mechanisms else list(MECHANISMS)
    report = run_realdata(edges, epsilons, args.reps, args.seed, mechanisms=mechanisms, workers=args.workers,
                          iterate_filter=args.iterate_filter)
    outdir = Path(args.outdir) if args.outdir else CONFIG.resolve_path('experiments.output_dir', 'output') / 'realdata'
    config_payload = {'edges': str(edges), 'epsilons': epsilons, 'repetitions': args.reps,
                      'base_seed': args.seed, 'mechanisms': mechanisms, 'iterate_filter': args.iterate_filter}
    write_realdata_report(report, outdir, config_payload, args.seed)
    for row in report.summary.to_dict(orient='records'):
        logger.info(f"ε={row['epsilon_token']} {row['mechanism']}: α 距离 {row['mean_alpha_distance']:.3f}, "
                    f"β 距离 {row['mean_beta_distance']:.3f}, 失败 {row['failure_percent']:.1f}%")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog='p0dp', description='有向网络隐私发布与 p0 模型参数估计')
    sub = parser.add_subparsers(dest='verb', metavar='{sample,flip,laplace,denoise,fit,simulate,analyze}',
                                parser_class=_Parser)
    sub.required = True

    p = sub.add_parser('sample', help='按线性参数设计抽样一张 p0 图（输出边列表）')
    p.add_argument('--n', type=int, required=True)
    p.add_argument('--L', type=float, default=0.0)
    p.add_argument('--seed', type=int, default=None)
    p.add_argument('--out')
    p.set_defaults(handler=cmd_sample)

    p = sub.add_parser('flip', help='边翻转或成对边翻转（边列表 → 边列表）')
    p.add_argument('--in', dest='input')
    p.add_argument('--epsilon')
    p.add_argument('--seed', type=int, default=None)
    p.add_argument('--out')
    p.add_argument('--pairwise', help='g1,g2,g3')
    p.set_defaults(handler=cmd_flip)

    p = sub.add_parser('laplace', help='离散拉普拉斯发布双度序列（输出 index,block,value）')
    p.add_argument('--in', dest='input')
    p.add_argument('--epsilon', required=True)
    p.add_argument('--seed', type=int, default=None)
    p.add_argument('--out')
    p.set_defaults(handler=cmd_laplace)

    p = sub.add_parser('denoise', help='L1 去噪含噪双序列（输出 index,kind,value 或 JSON）')
    p.add_argument('--in', dest='input')
    p.add_argument('--n', type=int, default=None)
    p.add_argument('--out')
    p.set_defaults(handler=cmd_denoise)

    p = sub.add_parser('fit', help='估计 p0 参数（输出 FitResult + VarianceReport JSON）')
    p.add_argument('--in', dest='input')
    p.add_argument('--mode', choices=('mle', 'laplace', 'denoised', 'ldp'), default='mle')
    p.add_argument('--epsilon')
    p.add_argument('--k', type=int, default=2, help='协方差块大小')
    p.add_argument('--out')
    p.set_defaults(handler=cmd_fit)

    p = sub.add_parser('simulate', help='按 SimConfig JSON 运行蒙特卡洛实验')
    p.add_argument('--config', required=True)
    p.add_argument('--outdir')
    p.add_argument('--workers', type=int, default=None)
    p.set_defaults(handler=cmd_simulate)

    p = sub.add_parser('analyze', help='UC Irvine 真实数据流水线')
    p.add_argument('--edges')
    p.add_argument('--fixture', action='store_true', help='使用仓库内 n=50 的固定子图')
    p.add_argument('--download', action='store_true', help='数据集缺失时自动下载')
    p.add_argument('--epsilons', default='logn_q,2,3')
    p.add_argument('--mechanisms')
    p.add_argument('--reps', type=int, default=200)
    p.add_argument('--seed', type=int, default=20240101)
    p.add_argument('--outdir')
    p.add_argument('--workers', type=int, default=None)
    p.add_argument('--iterate-filter', action='store_true', help='反复剪枝直到子图内度都超过阈值')
    p.set_defaults(handler=cmd_analyze)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """
    命令行入口

    Returns:
        退出码：0 成功，1 用法错误，2 数据错误，3 数值失败
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.handler(args)
    except SystemExit as e:
        return EXIT_OK if not e.code else EXIT_USAGE
    except UsageError as e:
        print(f"用法错误: {e}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalFailure as e:
        reason = e.fit_result.failure_reason.value if e.fit_result is not None else 'unknown'
        print(f"failure_reason: {reason}", file=sys.stderr)
        logger.error(f"❌ {e}")
        return EXIT_NUMERICAL
    except (DomainError, DatasetMissingError, OSError) as e:
        print(f"数据错误: {e}", file=sys.stderr)
        logger.error(f"❌ {e}")
        return EXIT_DATA
    except P0DPError as e:
        print(f"错误: {e}", file=sys.stderr)
        return EXIT_DATA
