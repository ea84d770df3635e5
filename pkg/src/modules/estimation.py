"""
🧮 参数估计模块
MLE、非去噪拉普拉斯、去噪拉普拉斯与边 LDP 四种估计共用的矩方程求解器，
以及 Jacobian V、近似逆 S、方差 σ²、渐近协方差与标准化统计量
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from dataclasses_json import config, dataclass_json
from scipy import linalg
from scipy.special import expit, logsumexp

from .config import CONFIG
from .errors import DomainError, StructureError
from .graph_core import BiDegreeSequence, IntegerBiSequence
from .p0_model import Theta, pair_logits
from .privacy_mechanisms import PrivacyBudget, discrete_laplace_variance

logger = logging.getLogger(__name__)

VectorLike = Union[BiDegreeSequence, IntegerBiSequence, Sequence[float], np.ndarray]


def _array_field(default_empty: bool = False):
    kwargs = {'default_factory': lambda: np.zeros(0)} if default_empty else {}
    return field(metadata=config(
        encoder=lambda a: np.asarray(a, dtype=float).tolist(),
        decoder=lambda v: np.asarray(v, dtype=float),
    ), **kwargs)


def _target_vector(target: VectorLike) -> np.ndarray:
    if isinstance(target, (BiDegreeSequence, IntegerBiSequence)):
        target = target.as_vector()
    values = np.asarray(target, dtype=float)
    if values.ndim != 1 or values.shape[0] % 2 or values.shape[0] < 4:
        raise DomainError(f"目标向量长度必须为偶数 2n 且 n ≥ 2，实际为 {values.shape}")
    return values


def _check_keep_prob(p: float) -> None:
    if not 0.5 < p <= 1.0:
        raise DomainError(f"翻转保留概率必须在 (1/2, 1] 内，实际为 {p}（p = 1/2 时机制不可逆）")


class FailureReason(str, Enum):
    """求解失败原因"""

    NONE = 'none'
    DEGREE_OUT_OF_RANGE = 'degree_out_of_range'
    DIVERGED = 'diverged'
    MAX_ITERATIONS = 'max_iterations'


@dataclass_json
@dataclass(frozen=True)
class SolverOptions:
    """不动点求解器选项

    Attributes:
        tolerance: 残差 ‖F‖∞ 的收敛阈值
        max_iterations: 最大迭代次数
        parameter_bound: ‖θ‖∞ 超过该值判为发散
        damping: 初始阻尼系数 (0, 1]
        fallback_damping: 检测到振荡后改用的阻尼系数
        oscillation_window: 残差在该窗口内不下降即视为振荡
        newton_threshold: 去偏残差低于该值后改用牛顿步，0 表示只用不动点迭代
    """

    tolerance: float = 1e-8
    max_iterations: int = 5000
    parameter_bound: float = 30.0
    damping: float = 1.0
    fallback_damping: float = 0.5
    oscillation_window: int = 20
    newton_threshold: float = 1.0

    def __post_init__(self):
        if not self.tolerance > 0:
            raise DomainError("tolerance 必须为正")
        if self.max_iterations < 1:
            raise DomainError("max_iterations 至少为 1")
        if not self.parameter_bound > 0:
            raise DomainError("parameter_bound 必须为正")
        if not (0 < self.damping <= 1 and 0 < self.fallback_damping <= 1):
            raise DomainError("阻尼系数必须在 (0, 1] 内")
        if self.oscillation_window < 1:
            raise DomainError("oscillation_window 至少为 1")
        if self.newton_threshold < 0:
            raise DomainError("newton_threshold 不能为负")

    @classmethod
    def from_config(cls, **overrides: Any) -> 'SolverOptions':
        """从全局配置的 solver 段构造，关键字参数优先"""
        section = CONFIG.get_solver_config()
        values = {name: section[name] for name in cls.__dataclass_fields__ if name in section}
        values.update(overrides)
        return cls(**values)


@dataclass_json
@dataclass
class FitResult:
    """一次估计的结果

    converged 为真时 residual_inf ≤ tolerance 且 failure_reason == none；
    degree_out_of_range 时不迭代，theta_hat 为 None
    """

    theta_hat: Optional[Theta]
    converged: bool
    iterations: int
    residual_inf: float
    failure_reason: FailureReason = FailureReason.NONE
    p: float = 1.0

    @property
    def failed(self) -> bool:
        return not self.converged

    def to_summary(self) -> Dict[str, Any]:
        """与流水线结果字典一致的摘要形式"""
        summary = {
            'success': self.converged,
            'iterations': self.iterations,
            'residual_inf': self.residual_inf,
        }
        if not self.converged:
            summary['error'] = self.failure_reason.value
        return summary


@dataclass_json
@dataclass
class VarianceReport:
    """方差相关量汇总

    v_diag 与 sigma2 长度 2n（最后一个元素对应 β_n）；per_coordinate_variance 为 M 的对角线，长度 2n−1
    """

    p: float
    v_diag: np.ndarray = _array_field()
    v_2n_2n: float = 0.0
    sigma2: np.ndarray = _array_field(default_empty=True)
    per_coordinate_variance: np.ndarray = _array_field(default_empty=True)
    covariance_block: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)), metadata=config(
        encoder=lambda a: np.asarray(a, dtype=float).tolist(),
        decoder=lambda v: np.asarray(v, dtype=float),
    ))


# ========== 矩方程 ==========

def debias_sequence(dprime: VectorLike, p: float, n: Optional[int] = None) -> np.ndarray:
    """
    去偏翻转后的度：d̃ = (d′ − (n−1)(1−p)) / (2p−1)

    Args:
        dprime: 翻转后的双度（长度 2n）
        p: 翻转保留概率，必须在 (1/2, 1] 内
        n: 节点数（缺省时取长度的一半）

    Raises:
        DomainError: p ≤ 1/2
    """
    _check_keep_prob(p)
    values = _target_vector(dprime)
    if n is None:
        n = values.shape[0] // 2
    if values.shape[0] != 2 * n:
        raise DomainError(f"序列长度 {values.shape[0]} 与 2n={2 * n} 不符")
    if p == 1.0:
        return values.copy()
    return (values - (n - 1) * (1 - p)) / (2 * p - 1)


def _flipped_edge_probabilities(alpha: np.ndarray, beta: np.ndarray, p: float) -> np.ndarray:
    """P(a′_ij = 1) = p·σ(x_ij) + (1−p)(1−σ(x_ij))，对角线为 0"""
    probs = expit(pair_logits(alpha, beta))
    if p != 1.0:
        probs = p * probs + (1 - p) * (1 - probs)
    np.fill_diagonal(probs, 0.0)
    return probs


def moment_residual(alpha: np.ndarray, beta: np.ndarray, target: VectorLike, p: float = 1.0) -> np.ndarray:
    """完整的 2n 个矩方程残差（不固定 β_n）"""
    target = _target_vector(target)
    probs = _flipped_edge_probabilities(np.asarray(alpha, dtype=float), np.asarray(beta, dtype=float), p)
    return np.concatenate([probs.sum(axis=1), probs.sum(axis=0)]) - target


def residual_F(theta: Theta, target: VectorLike, p: float = 1.0) -> np.ndarray:
    """
    矩方程残差 F(θ)，长度 2n−1（丢弃冗余的最后一个入度方程）

    F_i = Σ_{k≠i} (p e^{α_i+β_k} + 1−p)/(1 + e^{α_i+β_k}) − target_i，入度行对称
    """
    target = _target_vector(target)
    if target.shape[0] != 2 * theta.n:
        raise DomainError(f"目标长度 {target.shape[0]} 与参数维度 2n={2 * theta.n} 不符")
    return moment_residual(theta.alpha, theta.beta, target, p)[:-1]


def _fixed_point_step(alpha: np.ndarray, beta: np.ndarray,
                      log_out: np.ndarray, log_in: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """对数空间的 Jacobi 不动点更新

    α_i ← log d̃_i⁺ − log Σ_{k≠i} e^{β_k}/(1+e^{α_i+β_k})
    β_j ← log d̃_j⁻ − log Σ_{k≠j} e^{α_k}/(1+e^{α_k+β_j})
    """
    n = alpha.shape[0]
    log_one_plus = np.logaddexp(0.0, pair_logits(alpha, beta))
    diagonal = np.eye(n, dtype=bool)

    out_terms = beta[None, :] - log_one_plus
    out_terms[diagonal] = -np.inf
    in_terms = alpha[:, None] - log_one_plus
    in_terms[diagonal] = -np.inf

    new_alpha = log_out - logsumexp(out_terms, axis=1)
    new_beta = np.zeros(n)
    new_beta[:-1] = log_in - logsumexp(in_terms, axis=0)[:-1]
    return new_alpha, new_beta


def _newton_step(alpha: np.ndarray, beta: np.ndarray,
                 debiased: np.ndarray) -> Optional[Tuple[np.ndarray, np.ndarray]]:
    """p = 1 方程组上的牛顿步 δ = −V⁻¹F，步长减半直到残差下降；失败返回 None"""
    n = alpha.shape[0]
    F = moment_residual(alpha, beta, debiased, 1.0)[:-1]
    try:
        delta = linalg.solve(jacobian_V(Theta(alpha, beta), 1.0), -F, assume_a='pos')
    except (linalg.LinAlgError, ValueError):
        return None

    current = float(np.abs(F).max())
    step = 1.0
    for _ in range(12):
        trial_alpha = alpha + step * delta[:n]
        trial_beta = beta.copy()
        trial_beta[:-1] += step * delta[n:]
        trial = float(np.abs(moment_residual(trial_alpha, trial_beta, debiased, 1.0)[:-1]).max())
        if np.isfinite(trial) and trial < current:
            return trial_alpha, trial_beta
        step /= 2
    return None


def solve_p0(target: VectorLike, p: float = 1.0, options: Optional[SolverOptions] = None) -> FitResult:
    """
    求解 p0 模型的矩方程（p = 1 时即似然方程）

    先按 p 去偏，再在 p = 1 的方程组上做阻尼不动点迭代；初值 θ = 0，β_n 固定为 0。
    振荡（残差在 oscillation_window 次迭代内未下降）时改用 fallback_damping；
    去偏残差低于 newton_threshold 后用 Jacobian V 做牛顿步，不动点迭代在解附近只有线性收敛。

    Args:
        target: 长度 2n 的目标度向量（可为实数、可不满足和相等）
        p: 翻转保留概率 (1/2, 1]
        options: 求解器选项，缺省取全局配置

    Returns:
        FitResult（不存在解不抛异常，由 failure_reason 表示）
    """
    options = options or SolverOptions.from_config()
    target = _target_vector(target)
    n = target.shape[0] // 2
    debiased = debias_sequence(target, p, n)

    if np.any(debiased <= 0) or np.any(debiased >= n - 1):
        logger.debug(f"去偏度超出 (0, {n - 1})，估计不存在")
        return FitResult(theta_hat=None, converged=False, iterations=0, residual_inf=math.inf,
                         failure_reason=FailureReason.DEGREE_OUT_OF_RANGE, p=p)

    log_out = np.log(debiased[:n])
    log_in = np.log(debiased[n:2 * n - 1])
    alpha = np.zeros(n)
    beta = np.zeros(n)
    damping = options.damping
    history: List[float] = []

    residual = float(np.abs(moment_residual(alpha, beta, target, p)[:-1]).max())
    iteration = 0
    while residual > options.tolerance:
        if iteration >= options.max_iterations:
            logger.debug(f"达到最大迭代次数 {options.max_iterations}，残差 {residual:.3e}")
            return FitResult(theta_hat=Theta(alpha, beta), converged=False, iterations=iteration,
                             residual_inf=residual, failure_reason=FailureReason.MAX_ITERATIONS, p=p)
        iteration += 1

        refined = None
        if 0 < residual / (2 * p - 1) < options.newton_threshold:
            refined = _newton_step(alpha, beta, debiased)
        if refined is None:
            new_alpha, new_beta = _fixed_point_step(alpha, beta, log_out, log_in)
            alpha = (1 - damping) * alpha + damping * new_alpha
            beta = (1 - damping) * beta + damping * new_beta
        else:
            alpha, beta = refined

        if not (np.isfinite(alpha).all() and np.isfinite(beta).all()):
            logger.debug(f"第 {iteration} 次迭代出现非有限值")
            return FitResult(theta_hat=None, converged=False, iterations=iteration,
                             residual_inf=math.inf, failure_reason=FailureReason.DIVERGED, p=p)
        if max(np.abs(alpha).max(), np.abs(beta).max()) > options.parameter_bound:
            logger.debug(f"第 {iteration} 次迭代 ‖θ‖∞ 超过 {options.parameter_bound}")
            return FitResult(theta_hat=Theta(alpha, beta), converged=False, iterations=iteration,
                             residual_inf=float(np.abs(moment_residual(alpha, beta, target, p)[:-1]).max()),
                             failure_reason=FailureReason.DIVERGED, p=p)

        residual = float(np.abs(moment_residual(alpha, beta, target, p)[:-1]).max())
        history.append(residual)
        window = options.oscillation_window
        if (damping != options.fallback_damping and len(history) > window
                and residual >= history[-window - 1]):
            logger.warning(f"⚠️ 残差在 {window} 次迭代内未下降，阻尼 {damping} → {options.fallback_damping}")
            damping = options.fallback_damping
            history.clear()

    logger.debug(f"不动点迭代收敛: n={n}, p={p}, 迭代 {iteration} 次, 残差 {residual:.3e}")
    return FitResult(theta_hat=Theta(alpha, beta), converged=True, iterations=iteration,
                     residual_inf=residual, failure_reason=FailureReason.NONE, p=p)


def fit_mle(d: BiDegreeSequence, options: Optional[SolverOptions] = None) -> FitResult:
    """非隐私 MLE：target = d，p = 1"""
    return solve_p0(d.as_vector(), 1.0, options)


def fit_laplace(z: IntegerBiSequence, options: Optional[SolverOptions] = None) -> FitResult:
    """非去噪拉普拉斯估计：直接用含噪序列 z 作为目标，p = 1"""
    return solve_p0(z.as_vector(), 1.0, options)


def fit_ldp(dprime: BiDegreeSequence, epsilon: float, options: Optional[SolverOptions] = None) -> FitResult:
    """边 LDP 估计：翻转后的双度 d′，p = 1/(1+e^{−ε})"""
    return solve_p0(dprime.as_vector(), PrivacyBudget(epsilon).flip_keep_prob, options)


def fit_denoised_laplace(z: IntegerBiSequence, options: Optional[SolverOptions] = None) -> FitResult:
    """去噪拉普拉斯估计：先做 L1 去噪得到可图序列，再按 p = 1 求解"""
    from .denoise import denoise_l1

    return fit_mle(denoise_l1(z).sequence, options)


# ========== Jacobian 与近似逆 ==========

def _pair_weights(theta: Theta, p: float) -> np.ndarray:
    """w_ij = (2p−1) e^{x}/(1+e^{x})²，对角线为 0"""
    probs = expit(pair_logits(theta.alpha, theta.beta))
    weights = (2 * p - 1) * probs * (1 - probs)
    np.fill_diagonal(weights, 0.0)
    return weights


def _full_v_diagonal(weights: np.ndarray) -> np.ndarray:
    """v_ii，i = 1..2n（最后一个即 v_{2n,2n}）"""
    return np.concatenate([weights.sum(axis=1), weights.sum(axis=0)])


def jacobian_V(theta: Theta, p: float = 1.0) -> np.ndarray:
    """
    F(θ) 的 Jacobian，(2n−1)×(2n−1) 对称矩阵

    V₁₁、V₂₂ 为对角阵；V₁₂[i, j] = w_ij（i ≠ j），对角位置为 0
    """
    _check_keep_prob(p)
    n = theta.n
    weights = _pair_weights(theta, p)
    diagonal = _full_v_diagonal(weights)[:-1]
    V = np.diag(diagonal)
    V[:n, n:] = weights[:, :-1]
    V[n:, :n] = weights[:, :-1].T
    return V


def row_completion(V: np.ndarray) -> np.ndarray:
    """v_{2n,i} = v_ii − Σ_{j≠i} v_ij"""
    V = np.asarray(V, dtype=float)
    return 2 * V.diagonal() - V.sum(axis=1)


def is_structured_jacobian(V: np.ndarray, atol: float = 1e-12) -> bool:
    """
    判断 V 是否具有 L_n(m, M) 类的结构：
    对称、非负、V₁₁ 与 V₂₂ 为对角阵、V₁₂ 对角为 0、对角占优且对角为正
    """
    V = np.asarray(V, dtype=float)
    if V.ndim != 2 or V.shape[0] != V.shape[1] or V.shape[0] < 3 or V.shape[0] % 2 == 0:
        return False
    if not np.isfinite(V).all():
        return False
    n = (V.shape[0] + 1) // 2
    scale = max(1.0, float(np.abs(V).max()))
    tol = atol * scale
    if not np.allclose(V, V.T, rtol=0.0, atol=tol):
        return False
    if (V < -tol).any() or (V.diagonal() <= 0).any():
        return False
    off_diagonal = V - np.diag(V.diagonal())
    if np.abs(off_diagonal[:n, :n]).max() > tol or np.abs(off_diagonal[n:, n:]).max(initial=0.0) > tol:
        return False
    if np.abs(np.diagonal(V[:n - 1, n:])).max(initial=0.0) > tol:
        return False
    return bool((row_completion(V) >= -tol * V.shape[0]).all())


def approx_inverse_S(V: np.ndarray) -> np.ndarray:
    """
    V⁻¹ 的近似 S

    s_ij = δ_ij/v_ii + 1/v_{2n,2n}（同块），−1/v_{2n,2n}（跨块），
    其中 v_{2n,2n} = Σ_i (v_ii − Σ_{j≠i} v_ij)

    Raises:
        StructureError: V 不满足 L_n(m, M) 的结构
    """
    if not is_structured_jacobian(V):
        logger.error("矩阵不满足 L_n(m, M) 结构，无法构造近似逆")
        raise StructureError("矩阵不满足 L_n(m, M) 结构（对称、非负、块对角、对角占优）")
    V = np.asarray(V, dtype=float)
    n = (V.shape[0] + 1) // 2
    v_2n_2n = float(row_completion(V).sum())
    if not v_2n_2n > 0:
        raise StructureError(f"v_2n,2n = {v_2n_2n} 必须为正")

    S = np.full(V.shape, 1.0 / v_2n_2n)
    S[:n, n:] = -1.0 / v_2n_2n
    S[n:, :n] = -1.0 / v_2n_2n
    S[np.diag_indices_from(S)] += 1.0 / V.diagonal()
    return S


# ========== 方差 ==========

def sigma_squared(theta: Theta, p: float = 1.0) -> np.ndarray:
    """
    翻转后度的方差 σ_i²，长度 2n

    每一项 [p e^x + 1−p][(1−p)e^x + p]/(1+e^x)² 即 Bernoulli(P(a′=1)) 的方差
    """
    _check_keep_prob(p)
    q = _flipped_edge_probabilities(theta.alpha, theta.beta, p)
    terms = q * (1 - q)
    return np.concatenate([terms.sum(axis=1), terms.sum(axis=0)])


def _covariance_matrix(sigma2: np.ndarray, v_full: np.ndarray) -> np.ndarray:
    """M：块结构同 S，σ²_{2n}/v²_{2n,2n} 作为公共项"""
    n = sigma2.shape[0] // 2
    common = sigma2[-1] / v_full[-1] ** 2
    M = np.full((2 * n - 1, 2 * n - 1), common)
    M[:n, n:] = -common
    M[n:, :n] = -common
    M[np.diag_indices_from(M)] += sigma2[:-1] / v_full[:-1] ** 2
    return M


def asymptotic_covariance(theta: Theta, p: float, k: int) -> np.ndarray:
    """
    θ̂ − θ* 前 k 个分量的渐近协方差（M 的左上 k×k 块）

    Raises:
        DomainError: k 不在 [1, 2n−1] 内
    """
    if not 1 <= k <= 2 * theta.n - 1:
        raise DomainError(f"k 必须在 [1, {2 * theta.n - 1}] 内，实际为 {k}")
    sigma2 = sigma_squared(theta, p)
    v_full = _full_v_diagonal(_pair_weights(theta, p))
    return _covariance_matrix(sigma2, v_full)[:k, :k]


def variance_report(theta: Theta, p: float = 1.0, k: int = 2) -> VarianceReport:
    """汇总 v_ii、σ_i²、M 的对角线与左上 k×k 块"""
    if not 1 <= k <= 2 * theta.n - 1:
        raise DomainError(f"k 必须在 [1, {2 * theta.n - 1}] 内，实际为 {k}")
    sigma2 = sigma_squared(theta, p)
    v_full = _full_v_diagonal(_pair_weights(theta, p))
    M = _covariance_matrix(sigma2, v_full)
    return VarianceReport(
        p=p,
        v_diag=v_full,
        v_2n_2n=float(v_full[-1]),
        sigma2=sigma2,
        per_coordinate_variance=M.diagonal().copy(),
        covariance_block=M[:k, :k].copy(),
    )


def laplace_variance_s_n2(n: int, epsilon: float) -> float:
    """s_n² = Var(Σe_i⁺ − Σ_{i<n} e_i⁻) = (2n−1)·2λ/(1−λ)²，λ = e^{−ε/2}"""
    if n < 2:
        raise DomainError("节点数至少为 2")
    return (2 * n - 1) * discrete_laplace_variance(PrivacyBudget(epsilon).laplace_scale)


def estimator_variances(theta: Theta, epsilon: float) -> Dict[str, np.ndarray]:
    """
    四种估计量逐坐标的渐近方差（长度 2n−1）

    mle / denoised_laplace: 1/ṽ_ii + 1/ṽ_2n,2n
    laplace: 再加 s_n²/ṽ²_2n,2n
    edge_flip: σ_i²/v_ii² + σ²_2n/v²_2n,2n，p = 1/(1+e^{−ε})
    """
    baseline = variance_report(theta, 1.0).per_coordinate_variance
    v_tilde_2n = _full_v_diagonal(_pair_weights(theta, 1.0))[-1]
    laplace = baseline + laplace_variance_s_n2(theta.n, epsilon) / v_tilde_2n ** 2
    edge_flip = variance_report(theta, PrivacyBudget(epsilon).flip_keep_prob).per_coordinate_variance
    return {
        'mle': baseline,
        'laplace': laplace,
        'denoised_laplace': baseline.copy(),
        'edge_flip': edge_flip,
    }


# ========== 标准化统计量 ==========

STAT_KINDS = ('xi', 'zeta', 'eta')


def standardized_stats(theta_hat: Theta, theta_star: Theta, p: float,
                       pairs: Sequence[Tuple[int, int]], kind: str = 'xi',
                       v_diag: Optional[np.ndarray] = None,
                       sigma2: Optional[np.ndarray] = None) -> np.ndarray:
    """
    标准化统计量（下标 0 基）

    xi:   [α̂_i − α̂_j − (α*_i − α*_j)] / (σ̂_i²/v̂_ii² + σ̂_j²/v̂_jj²)^{1/2}
    zeta: (α̂_i + β̂_j − α*_i − β*_j) / (σ̂_i²/v̂_ii² + σ̂_{n+j}²/v̂_{n+j,n+j}²)^{1/2}
    eta:  [β̂_i − β̂_j − (β*_i − β*_j)] / (σ̂_{n+i}²/v̂²_{n+i} + σ̂_{n+j}²/v̂²_{n+j})^{1/2}

    v̂、σ̂ 缺省在 theta_hat 处按 p 计算，也可显式传入（长度 2n）

    Raises:
        DomainError: 种类未知、下标越界或分母非正
    """
    if kind not in STAT_KINDS:
        raise DomainError(f"未知的统计量种类: {kind}（可选 {STAT_KINDS}）")
    if theta_hat.n != theta_star.n:
        raise DomainError("θ̂ 与 θ* 维度不一致")
    n = theta_hat.n
    if v_diag is None:
        v_diag = _full_v_diagonal(_pair_weights(theta_hat, p))
    if sigma2 is None:
        sigma2 = sigma_squared(theta_hat, p)
    v_diag = np.asarray(v_diag, dtype=float)
    sigma2 = np.asarray(sigma2, dtype=float)
    if v_diag.shape != (2 * n,) or sigma2.shape != (2 * n,):
        raise DomainError("v̂ 与 σ̂² 的长度必须为 2n")

    with np.errstate(divide='ignore', invalid='ignore'):
        ratio = sigma2 / v_diag ** 2
    delta = np.concatenate([theta_hat.alpha - theta_star.alpha, theta_hat.beta - theta_star.beta])

    values = []
    for i, j in pairs:
        if not (0 <= i < n and 0 <= j < n):
            raise DomainError(f"下标越界: ({i}, {j})，n={n}")
        if kind == 'xi':
            first, second, sign = i, j, -1.0
        elif kind == 'zeta':
            first, second, sign = i, n + j, 1.0
        else:
            first, second, sign = n + i, n + j, -1.0
        denominator = ratio[first] + ratio[second]
        if not (np.isfinite(denominator) and denominator > 0 and v_diag[first] > 0 and v_diag[second] > 0):
            raise DomainError(f"统计量 ({i}, {j}) 的分母非正")
        values.append((delta[first] + sign * delta[second]) / math.sqrt(denominator))
    return np.asarray(values, dtype=float)
