"""
🧪 蒙特卡洛实验模块
距离表、QQ 正态性研究、方差比较、一致性研究与 UC Irvine 真实数据流水线
"""

import hashlib
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from dataclasses_json import dataclass_json
from scipy import stats

from .config import CONFIG
from .denoise import denoise_l1
from .errors import DomainError, NumericalFailure
from .estimation import (FailureReason, FitResult, SolverOptions, estimator_variances, fit_laplace,
                         fit_ldp, fit_mle, standardized_stats)
from .graph_core import (BiDegreeSequence, DirectedGraph, bi_degree_sequence, degree_quantiles, drop_zero_degree,
                         parse_edge_list, preprocess_subgraph, single_pass_filter)
from .p0_model import Theta, linear_parameters, sample_graph
from .privacy_mechanisms import PrivacyBudget, edge_flip, epsilon_schedule, laplace_release
from .utils import FileUtils, RandomUtils, SystemUtils

logger = logging.getLogger(__name__)

MECHANISMS = ('laplace', 'denoised_laplace', 'edge_flip')
CAMPAIGN_KINDS = ('distance', 'qq', 'variance', 'consistency')
L_TOKENS = ('zero', 'loglog_n', 'sqrt_log_n', 'log_n')


def resolve_L(token: Union[str, float], n: int) -> float:
    """
    解析参数范围 L 的记号

    "zero" → 0；"loglog_n" → log(log n)；"sqrt_log_n" → (log n)^{1/2}；"log_n" → log n；其余按字面数值
    """
    key = str(token).strip().lower()
    if key == 'zero':
        return 0.0
    if key == 'loglog_n':
        return math.log(math.log(n))
    if key == 'sqrt_log_n':
        return math.sqrt(math.log(n))
    if key == 'log_n':
        return math.log(n)
    try:
        value = float(key)
    except ValueError:
        raise DomainError(f"无法识别的 L 记号: {token}（可选 {L_TOKENS} 或数值）") from None
    if value < 0:
        raise DomainError("L 必须非负")
    return value


def default_pairs(n: int) -> List[Tuple[int, int]]:
    """QQ 研究的三组下标对 (1,2)、(n/2, n/2+1)、(n−1, n)，转换为 0 基"""
    half = n // 2
    return [(0, 1), (half - 1, half), (n - 2, n - 1)]


@dataclass_json
@dataclass
class SimConfig:
    """实验配置

    epsilon_spec 与 L_spec 为记号列表：ε 可取数值或 "logn_q"/"logn_h"，
    L 可取 "zero"/"loglog_n"/"sqrt_log_n"/"log_n" 或数值
    """

    n_values: List[int]
    epsilon_spec: List[str]
    L_spec: List[str] = field(default_factory=lambda: ['zero'])
    repetitions: int = 100
    base_seed: int = 20240101
    mechanisms: List[str] = field(default_factory=lambda: list(MECHANISMS))
    kind: str = 'distance'
    name: str = 'campaign'
    pairs: Optional[List[List[int]]] = None
    stat_kinds: List[str] = field(default_factory=lambda: ['xi'])
    inject_truth: bool = False

    def __post_init__(self):
        self.n_values = [int(n) for n in self.n_values]
        self.epsilon_spec = [str(e) for e in self.epsilon_spec]
        self.L_spec = [str(v) for v in self.L_spec]
        if self.repetitions < 1:
            raise DomainError("repetitions 至少为 1")
        if not self.n_values or min(self.n_values) < 2:
            raise DomainError("n_values 不能为空且每个 n ≥ 2")
        if not self.epsilon_spec or not self.L_spec:
            raise DomainError("epsilon_spec 与 L_spec 不能为空")
        unknown = set(self.mechanisms) - set(MECHANISMS)
        if unknown:
            raise DomainError(f"未知机制: {sorted(unknown)}（可选 {MECHANISMS}）")
        if self.kind not in CAMPAIGN_KINDS:
            raise DomainError(f"未知实验类型: {self.kind}（可选 {CAMPAIGN_KINDS}）")
        for n in self.n_values:
            for token in self.epsilon_spec:
                epsilon_schedule(token, n)
            for token in self.L_spec:
                resolve_L(token, n)

    @classmethod
    def load(cls, path: Union[str, Path]) -> 'SimConfig':
        """从 JSON 文件读取配置"""
        with open(path, 'r', encoding='utf-8') as f:
            return cls.from_json(f.read())

    def config_hash(self) -> str:
        """规范化 JSON 的 SHA-256"""
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(',', ':'))
        return hashlib.sha256(canonical.encode('utf-8')).hexdigest()

    def cells(self) -> List[Dict[str, Any]]:
        """展开 (n, ε, L) 网格"""
        grid = []
        for n in self.n_values:
            for eps_index, eps_token in enumerate(self.epsilon_spec):
                for L_index, L_token in enumerate(self.L_spec):
                    grid.append({
                        'n': n,
                        'eps_index': eps_index,
                        'epsilon_token': eps_token,
                        'epsilon': epsilon_schedule(eps_token, n),
                        'L_index': L_index,
                        'L_token': L_token,
                        'L': resolve_L(L_token, n),
                    })
        return grid

    def pairs_for(self, n: int) -> List[Tuple[int, int]]:
        if self.pairs is None:
            return default_pairs(n)
        return [(int(i), int(j)) for i, j in self.pairs]


# ========== 并行与随机流 ==========

_WORKER_STATE: Dict[str, Any] = {}


def _set_worker_state(**state: Any) -> None:
    _WORKER_STATE.clear()
    _WORKER_STATE.update(state)


def parallel_map(func: Callable, tasks: Sequence[Any], workers: Optional[int] = None,
                 initializer: Optional[Callable] = None, initargs: Tuple = ()) -> List[Any]:
    """
    保序并行映射；workers ≤ 1 时在当前进程内顺序执行

    结果只依赖任务本身（随机流由任务键派生），与进程数无关
    """
    workers = CONFIG.get_worker_count() if workers is None else max(1, int(workers))
    tasks = list(tasks)
    if workers <= 1 or len(tasks) <= 1:
        if initializer is not None:
            initializer(*initargs)
        return [func(task) for task in tasks]

    chunksize = max(1, len(tasks) // (workers * 4))
    with ProcessPoolExecutor(max_workers=workers, initializer=initializer, initargs=initargs) as executor:
        return list(executor.map(func, tasks, chunksize=chunksize))


def _cell_rng(base_seed: int, cell: Dict[str, Any], rep: int, tag: str) -> np.random.Generator:
    return RandomUtils.rng(base_seed, cell['n'], cell['eps_index'], cell['L_index'], rep, tag)


def _release(g: DirectedGraph, d: BiDegreeSequence, budget: PrivacyBudget, mechanisms: Sequence[str],
             rng_for: Callable[[str], np.random.Generator]) -> Dict[str, Any]:
    """按机制发布；去噪拉普拉斯与非去噪拉普拉斯共用同一份 z"""
    released: Dict[str, Any] = {}
    if 'laplace' in mechanisms or 'denoised_laplace' in mechanisms:
        z = laplace_release(d, budget, rng_for('laplace'))
        if 'laplace' in mechanisms:
            released['laplace'] = z
        if 'denoised_laplace' in mechanisms:
            released['denoised_laplace'] = denoise_l1(z).sequence
    if 'edge_flip' in mechanisms:
        released['edge_flip'] = bi_degree_sequence(edge_flip(g, budget, rng_for('edge_flip')))
    return released


def _fit_released(mechanism: str, released: Dict[str, Any], epsilon: float,
                  options: Optional[SolverOptions]) -> FitResult:
    if mechanism == 'laplace':
        return fit_laplace(released['laplace'], options)
    if mechanism == 'denoised_laplace':
        return fit_mle(released['denoised_laplace'], options)
    return fit_ldp(released['edge_flip'], epsilon, options)


def _stat_p(mechanism: str, epsilon: float) -> float:
    """标准化统计量的 p：拉普拉斯两种估计用 p = 1"""
    return PrivacyBudget(epsilon).flip_keep_prob if mechanism == 'edge_flip' else 1.0


# 标准化所用的方差：拉普拉斯两种估计没有自己的渐近方差，借用 p = 1 的 MLE 方差
VARIANCE_SOURCES = {
    'edge_flip': 'edge_flip_sigma_at_theta_hat',
    'laplace': 'mle_p1_at_theta_hat',
    'denoised_laplace': 'mle_p1_at_theta_hat',
}


# ========== 距离表 ==========

def _distance_rep(task: Tuple) -> Dict[str, float]:
    cell, rep, base_seed, mechanisms = task
    theta = linear_parameters(cell['n'], cell['L'])
    g = sample_graph(theta, _cell_rng(base_seed, cell, rep, 'graph'))
    d = bi_degree_sequence(g)
    released = _release(g, d, PrivacyBudget(cell['epsilon']), mechanisms,
                        lambda tag: _cell_rng(base_seed, cell, rep, tag))
    original = d.as_vector()
    return {m: float(np.abs(original - released[m].as_vector()).max()) for m in mechanisms}


def run_distance_table(cfg: SimConfig, workers: Optional[int] = None) -> pd.DataFrame:
    """
    原始与发布双度序列的平均 ℓ∞ 距离（每个 (n, ε, L, 机制) 一行，附标准误）

    拉普拉斯为 z，去噪拉普拉斯为 d̂_de，边翻转为 d′
    """
    rows = []
    for cell in cfg.cells():
        tasks = [(cell, rep, cfg.base_seed, tuple(cfg.mechanisms)) for rep in range(cfg.repetitions)]
        results = parallel_map(_distance_rep, tasks, workers)
        for mechanism in cfg.mechanisms:
            values = np.array([r[mechanism] for r in results])
            rows.append({
                'n': cell['n'],
                'epsilon_token': cell['epsilon_token'],
                'epsilon': cell['epsilon'],
                'L_token': cell['L_token'],
                'L': cell['L'],
                'mechanism': mechanism,
                'repetitions': cfg.repetitions,
                'mean_distance': float(values.mean()),
                'std_error': float(values.std(ddof=1) / math.sqrt(values.size)) if values.size > 1 else 0.0,
            })
        logger.info(f"📏 距离表单元完成: n={cell['n']}, ε={cell['epsilon_token']}, L={cell['L_token']}")
    return pd.DataFrame(rows)


# ========== QQ 研究 ==========

def qq_quantile_pairs(values: Sequence[float], points: Optional[int] = None) -> pd.DataFrame:
    """标准正态理论分位数与经验分位数配对，概率取 k/(points+1)"""
    points = points or CONFIG.get('experiments.qq_quantile_points', 99)
    values = np.asarray(values, dtype=float)
    values = values[np.isfinite(values)]
    probs = np.arange(1, points + 1) / (points + 1)
    empirical = np.quantile(values, probs) if values.size else np.full(points, np.nan)
    return pd.DataFrame({'probability': probs, 'theoretical': stats.norm.ppf(probs), 'empirical': empirical})


def _qq_rep(task: Tuple) -> List[Dict[str, Any]]:
    cell, rep, base_seed, mechanisms, pairs, kinds, inject_truth, options = task
    theta_star = linear_parameters(cell['n'], cell['L'])
    g = sample_graph(theta_star, _cell_rng(base_seed, cell, rep, 'graph'))
    d = bi_degree_sequence(g)
    released = _release(g, d, PrivacyBudget(cell['epsilon']), mechanisms,
                        lambda tag: _cell_rng(base_seed, cell, rep, tag))

    rows = []
    for mechanism in mechanisms:
        if inject_truth:
            fit = FitResult(theta_hat=theta_star, converged=True, iterations=0, residual_inf=0.0)
        else:
            fit = _fit_released(mechanism, released, cell['epsilon'], options)

        values: Dict[str, np.ndarray] = {}
        reason = fit.failure_reason.value
        if fit.converged:
            try:
                p = _stat_p(mechanism, cell['epsilon'])
                for kind in kinds:
                    values[kind] = standardized_stats(fit.theta_hat, theta_star, p, pairs, kind)
            except DomainError:
                reason = 'degenerate_variance'
                values = {}

        for kind in kinds:
            for index, (i, j) in enumerate(pairs):
                rows.append({
                    'rep': rep,
                    'mechanism': mechanism,
                    'pair_i': i,
                    'pair_j': j,
                    'kind': kind,
                    'value': float(values[kind][index]) if kind in values else float('nan'),
                    'converged': kind in values,
                    'failure_reason': 'none' if kind in values else reason,
                    'variance_source': VARIANCE_SOURCES[mechanism],
                })
    return rows


def run_qq_study(cfg: SimConfig, workers: Optional[int] = None,
                 options: Optional[SolverOptions] = None) -> Dict[str, pd.DataFrame]:
    """
    标准化统计量的正态性研究

    Returns:
        {'records': 每次重复的统计量（失败行保留，值为 NaN），
         'quantiles': 理论-经验分位数配对，
         'summary': 均值、方差、KS 统计量与失败率}
    """
    records, quantile_frames, summary = [], [], []
    for cell in cfg.cells():
        pairs = cfg.pairs_for(cell['n'])
        tasks = [(cell, rep, cfg.base_seed, tuple(cfg.mechanisms), pairs, tuple(cfg.stat_kinds),
                  cfg.inject_truth, options) for rep in range(cfg.repetitions)]
        cell_rows = [row for rows in parallel_map(_qq_rep, tasks, workers) for row in rows]
        frame = pd.DataFrame(cell_rows)
        for key in ('n', 'epsilon_token', 'epsilon', 'L_token', 'L'):
            frame.insert(len(frame.columns), key, cell[key])
        records.append(frame)

        for (mechanism, i, j, kind), group in frame.groupby(['mechanism', 'pair_i', 'pair_j', 'kind'], sort=False):
            values = group.loc[group['converged'], 'value'].to_numpy()
            failure_rate = 1.0 - values.size / len(group)
            entry = {
                'n': cell['n'], 'epsilon_token': cell['epsilon_token'], 'epsilon': cell['epsilon'],
                'L_token': cell['L_token'], 'L': cell['L'], 'mechanism': mechanism,
                'pair_i': i, 'pair_j': j, 'kind': kind, 'variance_source': VARIANCE_SOURCES[mechanism],
                'repetitions': len(group), 'successes': int(values.size), 'failure_rate': failure_rate,
                'mean': float('nan'), 'variance': float('nan'), 'q95': float('nan'),
                'ks_statistic': float('nan'), 'ks_pvalue': float('nan'), 'note': '',
            }
            if values.size:
                ks = stats.kstest(values, 'norm')
                entry.update({
                    'mean': float(values.mean()),
                    'variance': float(values.var(ddof=1)) if values.size > 1 else 0.0,
                    'q95': float(np.quantile(values, 0.95)),
                    'ks_statistic': float(ks.statistic),
                    'ks_pvalue': float(ks.pvalue),
                })
                pairs_frame = qq_quantile_pairs(values)
                for key in ('n', 'epsilon_token', 'L_token', 'mechanism', 'pair_i', 'pair_j', 'kind'):
                    pairs_frame.insert(len(pairs_frame.columns), key, entry[key])
                quantile_frames.append(pairs_frame)
            else:
                entry['note'] = 'estimate did not exist'
                logger.warning(f"{mechanism} 在 n={cell['n']}, ε={cell['epsilon_token']}, "
                               f"L={cell['L_token']} 的全部重复中估计均不存在")
            summary.append(entry)
        logger.info(f"📈 QQ 单元完成: n={cell['n']}, ε={cell['epsilon_token']}, L={cell['L_token']}")

    return {
        'records': pd.concat(records, ignore_index=True),
        'quantiles': pd.concat(quantile_frames, ignore_index=True) if quantile_frames else pd.DataFrame(
            columns=['probability', 'theoretical', 'empirical']),
        'summary': pd.DataFrame(summary),
    }


# ========== 方差比较 ==========

def coordinate_labels(n: int) -> List[str]:
    return [f"alpha_{i + 1}" for i in range(n)] + [f"beta_{j + 1}" for j in range(n - 1)]


def run_variance_comparison(theta: Theta, epsilon: float) -> pd.DataFrame:
    """四种估计量逐坐标渐近方差对照表"""
    columns = estimator_variances(theta, epsilon)
    frame = pd.DataFrame({'index': np.arange(2 * theta.n - 1), 'coordinate': coordinate_labels(theta.n)})
    for name in ('mle', 'laplace', 'denoised_laplace', 'edge_flip'):
        frame[name] = columns[name]
    return frame


def run_variance_campaign(cfg: SimConfig) -> pd.DataFrame:
    frames = []
    for cell in cfg.cells():
        frame = run_variance_comparison(linear_parameters(cell['n'], cell['L']), cell['epsilon'])
        for position, key in enumerate(('n', 'epsilon_token', 'epsilon', 'L_token', 'L')):
            frame.insert(position, key, cell[key])
        frames.append(frame)
    return pd.concat(frames, ignore_index=True)


# ========== 一致性研究 ==========

def _consistency_rep(task: Tuple) -> List[Dict[str, Any]]:
    cell, rep, base_seed, mechanisms, options = task
    theta_star = linear_parameters(cell['n'], cell['L'])
    g = sample_graph(theta_star, _cell_rng(base_seed, cell, rep, 'graph'))
    d = bi_degree_sequence(g)
    released = _release(g, d, PrivacyBudget(cell['epsilon']), mechanisms,
                        lambda tag: _cell_rng(base_seed, cell, rep, tag))
    rows = []
    for mechanism in mechanisms:
        fit = _fit_released(mechanism, released, cell['epsilon'], options)
        error = float('nan')
        if fit.converged:
            error = float(max(np.abs(fit.theta_hat.alpha - theta_star.alpha).max(),
                              np.abs(fit.theta_hat.beta - theta_star.beta).max()))
        rows.append({'rep': rep, 'mechanism': mechanism, 'converged': fit.converged,
                     'failure_reason': fit.failure_reason.value, 'error_inf': error})
    return rows


def run_consistency_study(cfg: SimConfig, workers: Optional[int] = None,
                          options: Optional[SolverOptions] = None) -> pd.DataFrame:
    """每个 (n, ε, L, 机制) 的 ‖θ̂ − θ*‖∞ 中位数与估计存在频率"""
    rows = []
    for cell in cfg.cells():
        tasks = [(cell, rep, cfg.base_seed, tuple(cfg.mechanisms), options) for rep in range(cfg.repetitions)]
        frame = pd.DataFrame([row for rows_ in parallel_map(_consistency_rep, tasks, workers) for row in rows_])
        for mechanism, group in frame.groupby('mechanism', sort=False):
            errors = group.loc[group['converged'], 'error_inf'].to_numpy()
            entry = {
                'n': cell['n'], 'epsilon_token': cell['epsilon_token'], 'epsilon': cell['epsilon'],
                'L_token': cell['L_token'], 'L': cell['L'], 'mechanism': mechanism,
                'repetitions': len(group),
                'existence_frequency': errors.size / len(group),
                'median_error_inf': float(np.median(errors)) if errors.size else float('nan'),
                'mean_error_inf': float(errors.mean()) if errors.size else float('nan'),
            }
            for reason in FailureReason:
                if reason is not FailureReason.NONE:
                    entry[f'failures_{reason.value}'] = int((group['failure_reason'] == reason.value).sum())
            rows.append(entry)
        logger.info(f"🎯 一致性单元完成: n={cell['n']}, ε={cell['epsilon_token']}, L={cell['L_token']}")
    return pd.DataFrame(rows)


# ========== 真实数据 ==========

@dataclass
class RealDataReport:
    """真实数据流水线报告"""

    ingestion: Dict[str, int]
    preprocessing: Dict[str, Any]
    mle: Dict[str, Any]
    summary: pd.DataFrame
    records: pd.DataFrame

    def to_dict(self) -> Dict[str, Any]:
        return {
            'ingestion': self.ingestion,
            'preprocessing': self.preprocessing,
            'mle': self.mle,
            'summary': self.summary.to_dict(orient='records'),
        }


def _init_realdata_worker(graph: DirectedGraph, mle: Theta) -> None:
    _set_worker_state(graph=graph, mle=mle)


def _realdata_rep(task: Tuple) -> List[Dict[str, Any]]:
    eps_index, eps_token, epsilon, rep, base_seed, mechanisms, options = task
    g: DirectedGraph = _WORKER_STATE['graph']
    mle: Theta = _WORKER_STATE['mle']
    d = bi_degree_sequence(g)
    released = _release(g, d, PrivacyBudget(epsilon), mechanisms,
                        lambda tag: RandomUtils.rng(base_seed, 'realdata', eps_index, rep, tag))

    rows = []
    for mechanism in mechanisms:
        fit = _fit_released(mechanism, released, epsilon, options)
        alpha_dist = beta_dist = float('nan')
        if fit.converged:
            alpha_dist = float(np.abs(fit.theta_hat.alpha - mle.alpha).max())
            beta_dist = float(np.abs(fit.theta_hat.beta - mle.beta).max())
        rows.append({
            'epsilon_token': eps_token, 'epsilon': epsilon, 'rep': rep, 'mechanism': mechanism,
            'converged': fit.converged, 'failure_reason': fit.failure_reason.value,
            'alpha_distance': alpha_dist, 'beta_distance': beta_dist,
            'degree_distance': float(np.abs(d.as_vector() - released[mechanism].as_vector()).max()),
        })
    return rows


def run_realdata(edge_list_path: Union[str, Path], epsilon_values: Sequence[Union[str, float]],
                 repetitions: int, base_seed: int, mechanisms: Sequence[str] = MECHANISMS,
                 thresholds: Tuple[int, int] = (5, 5), workers: Optional[int] = None,
                 options: Optional[SolverOptions] = None, iterate_filter: bool = False) -> RealDataReport:
    """
    真实数据流水线：读取 → 删除零度节点 → 度过滤 → MLE → 每个 (ε, 重复, 机制) 发布并估计

    默认按删除零度节点后的度单次过滤（过滤后的子图里度可以低于阈值）；
    iterate_filter 为真时反复剪枝直到子图内每个节点都超过阈值。两种结果的节点数都写进报告。

    Raises:
        DatasetMissingError: 边列表文件不存在
        NumericalFailure: 预处理后的图上 MLE 不存在
    """
    from .dataset_client import DatasetClient

    path = DatasetClient().ensure_available(edge_list_path)
    if repetitions < 1:
        raise DomainError("repetitions 至少为 1")
    unknown = set(mechanisms) - set(MECHANISMS)
    if unknown:
        raise DomainError(f"未知机制: {sorted(unknown)}")

    with open(path, 'r', encoding='utf-8') as f:
        parsed = parse_edge_list(f)
    graph = parsed.graph
    ingestion = {'nodes': graph.n, 'edges': graph.num_edges,
                 'self_loops_dropped': parsed.self_loops_dropped,
                 'duplicates_collapsed': parsed.duplicates_collapsed}

    nonzero, _ = drop_zero_degree(graph)
    single, _ = single_pass_filter(nonzero, *thresholds)
    try:
        iterated, _ = preprocess_subgraph(nonzero, *thresholds)
    except DomainError:
        if iterate_filter:
            raise
        iterated = None
    sub = iterated if iterate_filter else single
    seq = bi_degree_sequence(sub)
    preprocessing = {
        'zero_degree_removed': graph.n - nonzero.n,
        'after_zero_degree': nonzero.n,
        'thresholds': list(thresholds),
        'filter': 'iterated' if iterate_filter else 'single_pass',
        'analyzed_nodes': sub.n,
        'analyzed_edges': sub.num_edges,
        'quantiles': degree_quantiles(seq),
        'single_pass_nodes': single.n,
        'iterated_nodes': iterated.n if iterated is not None else 0,
    }

    mle_fit = fit_mle(seq, options)
    if not mle_fit.converged:
        logger.error(f"❌ 预处理后的图上 MLE 不存在: {mle_fit.failure_reason.value}")
        raise NumericalFailure(f"预处理后的图上 MLE 不存在: {mle_fit.failure_reason.value}", mle_fit)
    logger.info(f"✅ MLE 收敛: n={sub.n}, 迭代 {mle_fit.iterations} 次")

    tasks = []
    epsilons = []
    for eps_index, token in enumerate(epsilon_values):
        epsilon = epsilon_schedule(token, sub.n)
        epsilons.append((str(token), epsilon))
        tasks.extend((eps_index, str(token), epsilon, rep, base_seed, tuple(mechanisms), options)
                     for rep in range(repetitions))
    results = parallel_map(_realdata_rep, tasks, workers, initializer=_init_realdata_worker,
                           initargs=(sub, mle_fit.theta_hat))
    records = pd.DataFrame([row for rows in results for row in rows])

    summary = []
    for (token, epsilon) in epsilons:
        for mechanism in mechanisms:
            group = records[(records['epsilon_token'] == token) & (records['mechanism'] == mechanism)]
            ok = group[group['converged']]
            summary.append({
                'epsilon_token': token, 'epsilon': epsilon, 'mechanism': mechanism,
                'repetitions': len(group),
                'failure_percent': 100.0 * (1.0 - len(ok) / len(group)),
                'mean_alpha_distance': float(ok['alpha_distance'].mean()) if len(ok) else float('nan'),
                'var_alpha_distance': float(ok['alpha_distance'].var(ddof=1)) if len(ok) > 1 else float('nan'),
                'mean_beta_distance': float(ok['beta_distance'].mean()) if len(ok) else float('nan'),
                'var_beta_distance': float(ok['beta_distance'].var(ddof=1)) if len(ok) > 1 else float('nan'),
                'mean_degree_distance': float(group['degree_distance'].mean()),
            })
    logger.info(f"🏁 真实数据分析完成: {len(epsilons)} 个 ε × {repetitions} 次重复")
    return RealDataReport(ingestion=ingestion, preprocessing=preprocessing,
                          mle={**mle_fit.to_summary(), 'n': sub.n},
                          summary=pd.DataFrame(summary), records=records)


# ========== 输出 ==========

def write_manifest(outdir: Union[str, Path], config_payload: Dict[str, Any], base_seed: int,
                   files: Sequence[Union[str, Path]]) -> Path:
    """写出运行清单：配置哈希、基础种子、软件与依赖版本、系统信息、输出文件及其 SHA-256"""
    canonical = json.dumps(config_payload, sort_keys=True, separators=(',', ':'), default=str)
    manifest = {
        'timestamp': datetime.now().isoformat(),
        'config': config_payload,
        'config_hash': hashlib.sha256(canonical.encode('utf-8')).hexdigest(),
        'base_seed': base_seed,
        'software_version': CONFIG.get('app.version', 'unknown'),
        'libraries': SystemUtils.get_library_versions(),
        'system': SystemUtils.get_system_info(),
        'outputs': [str(Path(f).name) for f in files],
        'output_sha256': {str(Path(f).name): FileUtils.sha256_file(f) for f in files},
    }
    return FileUtils.write_json(Path(outdir) / 'manifest.json', manifest)


def _write_csv(frame: pd.DataFrame, path: Path) -> Path:
    frame.to_csv(path, index=False, lineterminator='\n')
    logger.info(f"💾 已写出 {path} ({len(frame)} 行)")
    return path


def run_campaign(cfg: SimConfig, outdir: Union[str, Path], workers: Optional[int] = None) -> Dict[str, Any]:
    """
    按 cfg.kind 运行实验并把 CSV 与运行清单写到 outdir

    Returns:
        结果字典 {'success': True, 'files': [...], 'manifest': 路径}
    """
    outdir = FileUtils.ensure_directory(outdir)
    logger.info(f"🚀 开始实验 {cfg.name} ({cfg.kind}): n={cfg.n_values}, ε={cfg.epsilon_spec}, "
                f"L={cfg.L_spec}, 重复 {cfg.repetitions} 次")

    if cfg.kind == 'distance':
        files = [_write_csv(run_distance_table(cfg, workers), outdir / 'distance_table.csv')]
    elif cfg.kind == 'qq':
        frames = run_qq_study(cfg, workers)
        files = [
            _write_csv(frames['records'], outdir / 'qq_records.csv'),
            _write_csv(frames['quantiles'], outdir / 'qq_quantiles.csv'),
            _write_csv(frames['summary'], outdir / 'qq_summary.csv'),
        ]
    elif cfg.kind == 'variance':
        files = [_write_csv(run_variance_campaign(cfg), outdir / 'variance_comparison.csv')]
    else:
        files = [_write_csv(run_consistency_study(cfg, workers), outdir / 'consistency.csv')]

    manifest = write_manifest(outdir, cfg.to_dict(), cfg.base_seed, files)
    return {'success': True, 'files': [str(f) for f in files], 'manifest': str(manifest)}


def write_realdata_report(report: RealDataReport, outdir: Union[str, Path], config_payload: Dict[str, Any],
                          base_seed: int) -> Dict[str, Any]:
    """写出真实数据报告：汇总 CSV、逐次重复 CSV、预处理 JSON 与运行清单"""
    outdir = FileUtils.ensure_directory(outdir)
    files = [
        _write_csv(report.summary, outdir / 'realdata_summary.csv'),
        _write_csv(report.records, outdir / 'realdata_records.csv'),
        FileUtils.write_json(outdir / 'realdata_report.json', report.to_dict()),
    ]
    manifest = write_manifest(outdir, config_payload, base_seed, files)
    return {'success': True, 'files': [str(f) for f in files], 'manifest': str(manifest)}
