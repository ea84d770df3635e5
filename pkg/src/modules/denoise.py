"""
🧹 去噪模块
把含噪整数双序列按 L1 距离投影到可图双度序列集合上（贪心启发式 + 小规模穷举基准）
"""

import logging
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional, Tuple

import numpy as np
from dataclasses_json import config, dataclass_json

from .config import CONFIG
from .errors import DomainError
from .graph_core import BiDegreeSequence, IntegerBiSequence, fca_violations, is_bigraphical

logger = logging.getLogger(__name__)


def _encode_sequence(seq: BiDegreeSequence) -> list:
    return [int(x) for x in seq.as_vector()]


@dataclass_json
@dataclass
class DenoiseResult:
    """去噪结果

    Attributes:
        sequence: 可图的双度序列
        l1_cost: Σ|z_i − sequence_i|
        exact: 由穷举基准得到时为 True
    """

    sequence: BiDegreeSequence = field(metadata=config(
        encoder=_encode_sequence,
        decoder=BiDegreeSequence.from_vector,
    ))
    l1_cost: int
    exact: bool = False


def _check_length(z: IntegerBiSequence, n: Optional[int]) -> int:
    if n is None:
        return z.n
    if z.values.shape[0] != 2 * n:
        raise DomainError(f"序列长度 {z.values.shape[0]} 与 2n={2 * n} 不符")
    return n


def _equalize_sums(values: np.ndarray, z: np.ndarray, n: int) -> None:
    """
    逐单位调整使出度和等于入度和

    候选：和偏大时减少出度或增加入度，偏小时相反。
    排序键依次为 边际 L1 代价、离边界的余量（大者优先）、出度块优先、下标最小
    """
    top = n - 1
    index = np.arange(n)
    while True:
        gap = int(values[:n].sum() - values[n:].sum())
        if gap == 0:
            return
        out_step, in_step = (-1, 1) if gap > 0 else (1, -1)
        costs, rooms, blocks, positions = [], [], [], []
        for block, step in ((0, out_step), (1, in_step)):
            current = values[block * n:(block + 1) * n]
            target = z[block * n:(block + 1) * n]
            moved = current + step
            allowed = (moved >= 0) & (moved <= top)
            room = current if step < 0 else top - current
            cost = np.abs(target - moved) - np.abs(target - current)
            costs.append(np.where(allowed, cost, np.iinfo(np.int64).max))
            rooms.append(room)
            blocks.append(np.full(n, block))
            positions.append(index)
        cost = np.concatenate(costs)
        room = np.concatenate(rooms)
        order = np.lexsort((np.concatenate(positions), np.concatenate(blocks), -room, cost))
        chosen = int(order[0])
        values[chosen] += out_step if chosen < n else in_step


def _repair_graphicality(values: np.ndarray, n: int) -> None:
    """
    成对减一修复 Fulkerson–Chen–Anstee 违背

    出度坐标取减一后最大违背量最小者（按 (出度, 入度) 等价类只评估一次，平局取最小下标）；
    入度坐标取当前入度最大者（平局取最小下标），使右端下降最少
    """
    while True:
        out, inn = values[:n], values[n:]
        violations = fca_violations(out, inn)
        if violations.max() <= 0:
            return

        best_out, best_score = -1, None
        seen = set()
        for i in np.flatnonzero(out > 0):
            key = (int(out[i]), int(inn[i]))
            if key in seen:
                continue
            seen.add(key)
            trial = out.copy()
            trial[i] -= 1
            score = int(fca_violations(trial, inn).max())
            if best_score is None or score < best_score:
                best_out, best_score = int(i), score

        best_in = int(np.argmax(inn))
        if best_out < 0 or inn[best_in] <= 0:
            # 出度和与入度和相等且非零时两者必然同时存在
            raise DomainError("无法继续修复：出度或入度已全为 0")
        values[best_out] -= 1
        values[n + best_in] -= 1


def denoise_l1(z: IntegerBiSequence, n: Optional[int] = None) -> DenoiseResult:
    """
    L1 去噪：返回与 z 距离较小的可图双度序列

    步骤：(1) 截断到 [0, n−1]；(2) 调整出入度和相等；(3) 成对减一直到满足 FCA 条件。
    n 不超过 denoise.oracle_threshold 时改用穷举基准，得到精确最小值。

    Args:
        z: 含噪整数双序列（长度 2n）
        n: 节点数（缺省时取长度的一半）

    Returns:
        DenoiseResult
    """
    n = _check_length(z, n)
    if n <= CONFIG.get('denoise.oracle_threshold', 0):
        return brute_force_denoise_oracle(z, n)

    target = z.as_vector().astype(np.int64)
    if is_bigraphical(target, n):
        return DenoiseResult(sequence=BiDegreeSequence.from_vector(target), l1_cost=0, exact=False)

    values = np.clip(target, 0, n - 1)
    _equalize_sums(values, target, n)
    _repair_graphicality(values, n)

    cost = int(np.abs(target - values).sum())
    logger.debug(f"去噪完成: n={n}, L1 代价 {cost}")
    return DenoiseResult(sequence=BiDegreeSequence.from_vector(values), l1_cost=cost, exact=False)


@lru_cache(maxsize=None)
def _all_bidegree_sequences(n: int) -> np.ndarray:
    """枚举 n 个节点的全部 2^{n(n−1)} 张有向图，返回按字典序排列的不同双度序列"""
    rows, cols = np.nonzero(~np.eye(n, dtype=bool))
    graphs = np.arange(1 << rows.shape[0], dtype=np.int64)
    bits = (graphs[:, None] >> np.arange(rows.shape[0])) & 1
    incidence = np.zeros((rows.shape[0], 2 * n), dtype=np.int64)
    incidence[np.arange(rows.shape[0]), rows] = 1
    incidence[np.arange(rows.shape[0]), n + cols] = 1
    sequences = np.unique(bits @ incidence, axis=0)
    sequences.setflags(write=False)
    logger.debug(f"枚举 n={n} 的有向图: {graphs.shape[0]} 张, {sequences.shape[0]} 个不同双度序列")
    return sequences


def brute_force_denoise_oracle(z: IntegerBiSequence, n: Optional[int] = None) -> DenoiseResult:
    """
    穷举基准：在全部可实现的双度序列中取 L1 距离最小者（平局取字典序最小）

    Raises:
        DomainError: n > denoise.oracle_max_n（默认 4）
    """
    n = _check_length(z, n)
    max_n = CONFIG.get('denoise.oracle_max_n', 4)
    if n > max_n:
        raise DomainError(f"穷举基准只支持 n ≤ {max_n}，实际 n={n}")
    if n < 2:
        raise DomainError("节点数至少为 2")

    candidates = _all_bidegree_sequences(n)
    costs = np.abs(candidates - z.as_vector()[None, :]).sum(axis=1)
    best = int(np.argmin(costs))
    return DenoiseResult(sequence=BiDegreeSequence.from_vector(candidates[best]),
                         l1_cost=int(costs[best]), exact=True)


def oracle_gap(z: IntegerBiSequence) -> Tuple[int, int]:
    """(启发式代价, 精确代价)，用于统计启发式与最优解的差距"""
    return denoise_l1(z).l1_cost, brute_force_denoise_oracle(z).l1_cost
