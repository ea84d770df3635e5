"""
🔐 隐私机制模块
输入扰动（边翻转、成对边翻转）与输出扰动（离散拉普拉斯）发布机制、预算运算与隐私条件校验
"""

import logging
import math
import warnings
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple, Union

import numpy as np
from dataclasses_json import dataclass_json
from scipy.special import expit

from .config import CONFIG
from .errors import DomainError
from .graph_core import BiDegreeSequence, DirectedGraph, IntegerBiSequence
from .utils import RandomUtils

logger = logging.getLogger(__name__)

RandomSource = Optional[Union[int, np.random.Generator]]

# 一条边同时改变一个出度和一个入度，双度序列的全局敏感度 Δf = 2
BIDEGREE_SENSITIVITY = 2


@dataclass_json
@dataclass(frozen=True)
class PrivacyBudget:
    """隐私预算 ε 及其派生量

    翻转保留概率 p = 1/(1+e^{−ε})；离散拉普拉斯尺度 λ = e^{−ε/Δf}，Δf = 2
    """

    epsilon: float

    def __post_init__(self):
        if not (self.epsilon > 0 and math.isfinite(self.epsilon)):
            raise DomainError(f"隐私预算必须为正的有限数，实际为 {self.epsilon}")

    @property
    def flip_keep_prob(self) -> float:
        return float(expit(self.epsilon))

    @property
    def flip_prob(self) -> float:
        """1 − p，直接由 e^{−ε}/(1+e^{−ε}) 计算以避免相消误差"""
        return float(expit(-self.epsilon))

    @property
    def laplace_scale(self) -> float:
        return math.exp(-self.epsilon / CONFIG.get('privacy.sensitivity', BIDEGREE_SENSITIVITY))

    @classmethod
    def from_laplace_scale(cls, lam: float) -> 'PrivacyBudget':
        """由拉普拉斯尺度反推预算 ε = −Δf·log λ"""
        if not 0.0 < lam < 1.0:
            raise DomainError(f"λ 必须在 (0, 1) 内，实际为 {lam}")
        return cls(-CONFIG.get('privacy.sensitivity', BIDEGREE_SENSITIVITY) * math.log(lam))


@dataclass_json
@dataclass(frozen=True)
class PairwiseFlipSpec:
    """成对边翻转的转移参数

    二元组 (a_ij, a_ji) 保持不变的概率 γ₁，变到只有一个坐标不同的状态各 γ₂，
    两个坐标都不同的状态 γ₃；约束 γ₁ + 2γ₂ + γ₃ = 1
    """

    gamma1: float
    gamma2: float
    gamma3: float

    def __post_init__(self):
        gammas = (self.gamma1, self.gamma2, self.gamma3)
        if min(gammas) < 0:
            raise DomainError(f"γ 必须非负: {gammas}")
        total = self.gamma1 + 2 * self.gamma2 + self.gamma3
        tolerance = CONFIG.get('privacy.pairwise_tolerance', 1e-12)
        if abs(total - 1.0) > tolerance:
            raise DomainError(f"γ₁ + 2γ₂ + γ₃ = {total}，应为 1")

    @classmethod
    def from_edge_flip(cls, p: float) -> 'PairwiseFlipSpec':
        """两条边独立翻转对应的成对参数 (p², p(1−p), (1−p)²)"""
        return cls(p * p, p * (1 - p), (1 - p) * (1 - p))

    def change_probabilities(self) -> np.ndarray:
        """改变模式 (不变, 只翻 a_ij, 只翻 a_ji, 都翻) 的概率"""
        probs = np.array([self.gamma1, self.gamma2, self.gamma2, self.gamma3])
        return probs / probs.sum()

    def transition_matrix(self) -> np.ndarray:
        """4×4 转移矩阵，状态顺序 (0,0), (0,1), (1,0), (1,1)"""
        states = np.array([[0, 0], [0, 1], [1, 0], [1, 1]])
        hamming = np.abs(states[:, None, :] - states[None, :, :]).sum(axis=2)
        return np.array([self.gamma1, self.gamma2, self.gamma3])[hamming]


def flip_transition_matrix(p: float) -> np.ndarray:
    """单条边翻转的 2×2 转移矩阵 Q[x, y] = P(a′ = y | a = x)"""
    return np.array([[p, 1 - p], [1 - p, p]])


def pairwise_transition_matrix(spec: PairwiseFlipSpec) -> np.ndarray:
    """成对翻转的 4×4 转移矩阵"""
    return spec.transition_matrix()


def _keep_and_flip(p: Union[PrivacyBudget, float]) -> Tuple[float, float]:
    if isinstance(p, PrivacyBudget):
        return p.flip_keep_prob, p.flip_prob
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"翻转保留概率必须在 [0, 1] 内，实际为 {p}")
    return p, 1.0 - p


def edge_flip_ratio(p: Union[PrivacyBudget, float]) -> float:
    """单条边转移概率比的上确界 max{1, p/(1−p), (1−p)/p}

    传入 PrivacyBudget 时 1−p 由 ε 直接计算，比值精确到机器精度
    """
    keep, flip = _keep_and_flip(p)
    if keep == 0.0 or flip == 0.0:
        return math.inf
    return max(1.0, keep / flip, flip / keep)


def dyad_ratio_from_edge_flip(p: Union[PrivacyBudget, float]) -> float:
    """逐边独立翻转在二元组层面的比值 γ₁/γ₃ = (p/(1−p))²"""
    return edge_flip_ratio(p) ** 2


def edge_flip(g: DirectedGraph, budget: PrivacyBudget, rng: RandomSource = None) -> DirectedGraph:
    """
    边翻转机制：每个非对角元以概率 p 保留、以 1−p 取反

    Args:
        g: 原始有向图
        budget: 隐私预算
        rng: 随机源（整数种子或 Generator）

    Returns:
        翻转后的合成有向图
    """
    rng = RandomUtils.as_generator(rng)
    flips = rng.random((g.n, g.n)) < budget.flip_prob
    released = np.logical_xor(g.adjacency, flips)
    np.fill_diagonal(released, False)
    logger.debug(f"边翻转完成: ε={budget.epsilon}, n={g.n}")
    return DirectedGraph(released, labels=g.labels)


def pairwise_edge_flip(g: DirectedGraph, spec: PairwiseFlipSpec, rng: RandomSource = None) -> DirectedGraph:
    """
    成对边翻转：每个无序对 {i, j} 的二元组 (a_ij, a_ji) 联合转移一次

    改变模式与当前状态无关，因此按 (γ₁, γ₂, γ₂, γ₃) 抽取异或掩码即可
    """
    rng = RandomUtils.as_generator(rng)
    rows, cols = np.triu_indices(g.n, k=1)
    patterns = rng.choice(4, size=rows.shape[0], p=spec.change_probabilities())

    released = np.array(g.adjacency, copy=True)
    flip_forward = (patterns == 1) | (patterns == 3)
    flip_backward = (patterns == 2) | (patterns == 3)
    released[rows, cols] ^= flip_forward
    released[cols, rows] ^= flip_backward
    return DirectedGraph(released, labels=g.labels)


def verify_pairwise_ldp(spec: PairwiseFlipSpec, epsilon: float) -> bool:
    """
    检查成对翻转是否满足 ε-弱边 LDP：e^{−ε} ≤ γ₁/γ₂, γ₁/γ₃, γ₂/γ₃ ≤ e^{ε}

    分母为 0 而分子非 0 时不满足；0/0 不构成约束
    """
    if epsilon < 0:
        raise DomainError("ε 必须非负")
    upper = math.exp(epsilon) * (1 + 1e-12)
    lower = math.exp(-epsilon) * (1 - 1e-12)
    for numerator, denominator in ((spec.gamma1, spec.gamma2),
                                   (spec.gamma1, spec.gamma3),
                                   (spec.gamma2, spec.gamma3)):
        if denominator == 0 and numerator == 0:
            continue
        if denominator == 0 or numerator == 0:
            return False
        ratio = numerator / denominator
        if not lower <= ratio <= upper:
            return False
    return True


def _check_scale(lam: float) -> None:
    if not 0.0 < lam < 1.0:
        raise DomainError(f"离散拉普拉斯尺度 λ 必须在 (0, 1) 内，实际为 {lam}")


def discrete_laplace_sample(lam: float, rng: RandomSource = None,
                            size: Optional[Union[int, Sequence[int]]] = None) -> Union[int, np.ndarray]:
    """
    离散拉普拉斯抽样：两个独立 Geometric(1−λ) 之差

    P(X = x) = ((1−λ)/(1+λ))·λ^{|x|}

    Args:
        lam: 尺度 λ ∈ (0, 1)
        rng: 随机源
        size: None 返回单个整数，否则返回数组
    """
    _check_scale(lam)
    rng = RandomUtils.as_generator(rng)
    draws = rng.geometric(1.0 - lam, size=size) - rng.geometric(1.0 - lam, size=size)
    if size is None:
        return int(draws)
    return np.asarray(draws, dtype=np.int64)


def discrete_laplace_pmf(x: Union[int, np.ndarray], lam: float) -> Union[float, np.ndarray]:
    """离散拉普拉斯概率质量函数"""
    _check_scale(lam)
    return (1 - lam) / (1 + lam) * np.power(lam, np.abs(x))


def discrete_laplace_variance(lam: float) -> float:
    """单次离散拉普拉斯噪声的方差 2λ/(1−λ)²"""
    _check_scale(lam)
    return 2 * lam / (1 - lam) ** 2


def laplace_release(d: BiDegreeSequence, budget: PrivacyBudget, rng: RandomSource = None) -> IntegerBiSequence:
    """离散拉普拉斯发布：z = d + e，2n 个噪声独立，λ = e^{−ε/2}"""
    noise = discrete_laplace_sample(budget.laplace_scale, rng, size=2 * d.n)
    return IntegerBiSequence(d.as_vector() + noise)


def compose_budgets(budgets: Sequence[float]) -> float:
    """
    顺序组合：多个机制依次作用时预算相加

    空列表返回 0 并发出 RuntimeWarning
    """
    budgets = list(budgets)
    if not budgets:
        logger.warning("组合的预算列表为空，返回 0")
        warnings.warn("组合的预算列表为空", RuntimeWarning, stacklevel=2)
        return 0.0
    if any(not b > 0 for b in budgets):
        raise DomainError(f"所有预算必须为正: {budgets}")
    return float(math.fsum(budgets))


def epsilon_schedule(token: Union[str, float], n: int) -> float:
    """
    解析预算记号

    "logn_q" → log n / n^{1/4}；"logn_h" → log n / n^{1/2}；其余按字面数值
    """
    if isinstance(token, str):
        key = token.strip().lower()
        if key == 'logn_q':
            return math.log(n) / n ** 0.25
        if key == 'logn_h':
            return math.log(n) / n ** 0.5
        try:
            value = float(key)
        except ValueError:
            raise DomainError(f"无法识别的预算记号: {token}") from None
    else:
        value = float(token)
    if not value > 0:
        raise DomainError(f"隐私预算必须为正: {token}")
    return value
