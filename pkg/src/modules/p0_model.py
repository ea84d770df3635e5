"""
📈 p0 模型模块
参数化、边概率、图抽样、对数似然与仿真用线性参数设计
"""

import logging
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np
from dataclasses_json import config, dataclass_json
from scipy.special import expit

from .errors import DomainError
from .graph_core import DirectedGraph, bi_degree_sequence
from .utils import RandomUtils

logger = logging.getLogger(__name__)


def _array_field():
    return field(metadata=config(
        encoder=lambda a: [float(x) for x in a],
        decoder=lambda v: np.asarray(v, dtype=float),
    ))


@dataclass_json
@dataclass(frozen=True)
class Theta:
    """p0 模型参数 θ = (α₁..α_n, β₁..β_n)，β_n 恒为 0

    Attributes:
        alpha: 出向性参数，长度 n
        beta: 入向性参数，长度 n，最后一个元素固定为 0
    """

    alpha: np.ndarray = _array_field()
    beta: np.ndarray = _array_field()

    def __post_init__(self):
        alpha = np.array(self.alpha, dtype=float)
        beta = np.array(self.beta, dtype=float)
        if alpha.ndim != 1 or alpha.shape != beta.shape:
            raise DomainError("alpha 与 beta 必须是等长一维向量")
        if alpha.shape[0] < 2:
            raise DomainError("节点数至少为 2")
        if not (np.isfinite(alpha).all() and np.isfinite(beta).all()):
            raise DomainError("参数必须全部有限")
        if beta[-1] != 0.0:
            raise DomainError(f"识别约束要求 β_n = 0，实际为 {beta[-1]}")
        alpha.setflags(write=False)
        beta.setflags(write=False)
        object.__setattr__(self, 'alpha', alpha)
        object.__setattr__(self, 'beta', beta)

    @property
    def n(self) -> int:
        return self.alpha.shape[0]

    @property
    def inf_norm(self) -> float:
        return float(max(np.abs(self.alpha).max(), np.abs(self.beta).max()))

    def free_vector(self) -> np.ndarray:
        """自由坐标 (α₁..α_n, β₁..β_{n−1})，长度 2n−1"""
        return np.concatenate([self.alpha, self.beta[:-1]])

    @classmethod
    def from_free_vector(cls, values: np.ndarray) -> 'Theta':
        values = np.asarray(values, dtype=float)
        if values.ndim != 1 or values.shape[0] % 2 == 0:
            raise DomainError("自由参数向量长度必须为 2n−1")
        n = (values.shape[0] + 1) // 2
        return cls(values[:n], np.append(values[n:], 0.0))

    @classmethod
    def zeros(cls, n: int) -> 'Theta':
        return cls(np.zeros(n), np.zeros(n))


def pair_logits(alpha: np.ndarray, beta: np.ndarray) -> np.ndarray:
    """x_ij = α_i + β_j 的 n×n 矩阵"""
    return np.add.outer(np.asarray(alpha, dtype=float), np.asarray(beta, dtype=float))


def logistic(x: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
    """数值稳定的 logistic 函数 e^x / (1 + e^x)"""
    return expit(x)


def edge_probability_matrix(theta: Theta) -> np.ndarray:
    """P_ij = P(a_ij = 1)，对角线置 0"""
    probs = logistic(pair_logits(theta.alpha, theta.beta))
    np.fill_diagonal(probs, 0.0)
    return probs


def edge_probability(theta: Theta, i: int, j: int) -> float:
    """
    单条边的概率 e^{α_i+β_j} / (1 + e^{α_i+β_j})

    Raises:
        DomainError: i == j 或下标越界
    """
    if i == j:
        raise DomainError("自环没有边概率 (i == j)")
    if not (0 <= i < theta.n and 0 <= j < theta.n):
        raise DomainError(f"节点下标越界: ({i}, {j})，n={theta.n}")
    return float(logistic(theta.alpha[i] + theta.beta[j]))


def expected_degrees(theta: Theta, p: float = 1.0) -> np.ndarray:
    """
    翻转机制下的期望双度 E[d′]（p = 1 即原始期望度）

    P(a′_ij = 1) = p·P_ij + (1−p)(1−P_ij)
    """
    probs = logistic(pair_logits(theta.alpha, theta.beta))
    flipped = p * probs + (1.0 - p) * (1.0 - probs)
    np.fill_diagonal(flipped, 0.0)
    return np.concatenate([flipped.sum(axis=1), flipped.sum(axis=0)])


def sample_graph(theta: Theta, rng: Optional[Union[int, np.random.Generator]] = None) -> DirectedGraph:
    """按 p0 模型独立伯努利抽样一张有向图（给定种子时确定）"""
    rng = RandomUtils.as_generator(rng)
    probs = edge_probability_matrix(theta)
    adjacency = rng.random(probs.shape) < probs
    np.fill_diagonal(adjacency, False)
    return DirectedGraph(adjacency)


def log_likelihood(theta: Theta, g: DirectedGraph) -> float:
    """
    对数似然 Σ α_i d_i⁺ + Σ β_j d_j⁻ − c(α, β)

    c(α, β) = Σ_{i≠j} log(1 + e^{α_i+β_j})
    """
    if theta.n != g.n:
        raise DomainError(f"参数维度 {theta.n} 与图节点数 {g.n} 不一致")
    seq = bi_degree_sequence(g)
    log_partition = np.logaddexp(0.0, pair_logits(theta.alpha, theta.beta))
    np.fill_diagonal(log_partition, 0.0)
    return float(theta.alpha @ seq.out_degrees + theta.beta @ seq.in_degrees - log_partition.sum())


def linear_parameters(n: int, L: float) -> Theta:
    """
    线性参数设计：α*_{i+1} = (n−1−i)L/(n−1)，β*_i = α*_i (i < n)，β*_n = 0

    Args:
        n: 节点数 (≥ 2)
        L: 参数范围 (≥ 0)
    """
    if n < 2:
        raise DomainError("节点数至少为 2")
    if L < 0:
        raise DomainError("L 必须非负")
    alpha = (n - 1 - np.arange(n)) * L / (n - 1)
    beta = alpha.copy()
    beta[-1] = 0.0
    return Theta(alpha, beta)
