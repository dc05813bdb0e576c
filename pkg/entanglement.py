import math
from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np

from config import config
from db import log
from errors import ArgumentError, NumericalError
from hilbert import DensityMatrix, partial_trace, sigma_y

MatrixLike = Union[DensityMatrix, np.ndarray]

_YY = np.kron(sigma_y(), sigma_y())


@dataclass(frozen=True)
class ConcurrenceResult:
    value: float
    lambdas: Tuple[float, float, float, float]
    route: str = "hermitian"  # hermitian: √ρ 形式；product: 非正定矩阵退回 ρρ̃ 本征值

    def __float__(self) -> float:
        return self.value


@dataclass(frozen=True)
class CkwReport:
    lhs: float
    rhs: float
    satisfied: bool
    c_c2c1: float = 0.0
    c_c2a1: float = 0.0
    trace: float = 1.0


def _two_qubit_matrix(rho: MatrixLike) -> np.ndarray:
    if isinstance(rho, DensityMatrix):
        if rho.space.dims != (2, 2):
            raise ArgumentError(f"需要两量子比特空间，当前维数 {rho.space.dims}（{rho.space.names}）")
        return np.asarray(rho.elements)
    m = np.asarray(rho, dtype=complex)
    if m.shape != (4, 4):
        raise ArgumentError(f"需要 4×4 矩阵，当前形状 {m.shape}")
    return m


def spin_flip(rho: MatrixLike) -> np.ndarray:
    """ρ̃ = (σ_y⊗σ_y) ρ* (σ_y⊗σ_y)"""
    m = _two_qubit_matrix(rho)
    return _YY @ m.conj() @ _YY


def concurrence(rho: MatrixLike, renormalize: bool = False) -> ConcurrenceResult:
    """
    两量子比特 Wootters 并发度 C = max(0, λ₁−λ₂−λ₃−λ₄)

    正定矩阵走厄米形式：λᵢ 为 √ρ (σ_y⊗σ_y) √ρ* 的奇异值，
    与 √ρ ρ̃ √ρ 本征值的平方根相同，但零附近不损失精度。
    按 verbatim 闭式公式装配的矩阵可能不是正定的，此时退回非厄米乘积 ρρ̃ 的本征值并记录警告。

    Args:
        rho: 4×4 密度矩阵（迹可以小于 1）
        renormalize: True 时先除以迹

    Returns:
        ConcurrenceResult
    """
    m = _two_qubit_matrix(rho)
    if renormalize:
        tr = np.trace(m).real
        if tr <= 0:
            raise ArgumentError(f"迹为 {tr}，无法归一化")
        m = m / tr
    herm = (m + m.conj().T) / 2
    try:
        evals, vecs = np.linalg.eigh(herm)
    except np.linalg.LinAlgError as e:
        raise NumericalError(f"密度矩阵本征分解失败: {e}")

    if evals[0] >= -config.POSITIVITY_TOL:
        evals = np.where(evals < config.SQRT_EIGEN_CUTOFF, 0.0, evals)
        sqrt_rho = (vecs * np.sqrt(evals)) @ vecs.conj().T
        try:
            lambdas = np.linalg.svd(sqrt_rho @ _YY @ sqrt_rho.conj(), compute_uv=False)
        except np.linalg.LinAlgError as e:
            raise NumericalError(f"奇异值分解失败: {e}")
        route = "hermitian"
    else:
        log("WARNING", f"矩阵非正定（最小本征值 {evals[0]:.3e}），按 ρρ̃ 乘积本征值计算并发度")
        try:
            mu = np.linalg.eigvals(m @ spin_flip(m)).real
        except np.linalg.LinAlgError as e:
            raise NumericalError(f"ρρ̃ 本征值求解失败: {e}")
        if mu.min() < -config.EIGEN_CLAMP_TOL:
            raise NumericalError(f"ρρ̃ 出现负本征值 {mu.min():.3e}")
        lambdas = np.sqrt(np.clip(mu, 0.0, None))
        route = "product"

    lambdas = np.sort(lambdas)[::-1]
    value = max(0.0, float(lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3]))
    return ConcurrenceResult(value, tuple(float(x) for x in lambdas), route)


def reduced_single(rho: DensityMatrix, label: str) -> DensityMatrix:
    """单个子系统的约化密度矩阵"""
    return partial_trace(rho, {label})


def pure_bipartite_concurrence(rho_reduced: MatrixLike) -> float:
    """
    纯态近似 C_{A(BC)} ≈ 2√det ρ_A

    Args:
        rho_reduced: 2×2 约化密度矩阵，迹偏离 1 时记录警告但照常计算
    """
    m = rho_reduced.elements if isinstance(rho_reduced, DensityMatrix) else np.asarray(rho_reduced, dtype=complex)
    if m.shape != (2, 2):
        raise ArgumentError(f"需要 2×2 矩阵，当前形状 {m.shape}")
    tr = np.trace(m).real
    if abs(tr - 1.0) > config.TRACE_WARN_TOL:
        log("WARNING", f"约化矩阵迹为 {tr:.9g}，2√det 按原矩阵计算")
    det = float(np.linalg.det(m).real)
    return 2.0 * math.sqrt(max(0.0, det))


def tangle(c: Union[ConcurrenceResult, float]) -> float:
    v = float(c)
    return v * v


def ckw_from_reduced(
    rho_c1c2: MatrixLike, rho_c2a1: MatrixLike, rho_c2: MatrixLike, trace: float = 1.0
) -> CkwReport:
    """由三个约化矩阵直接组装 CKW 两侧：lhs = C²_{C2C1} + C²_{C2A1}，rhs = (2√det ρ_C2)²"""
    c1 = concurrence(rho_c1c2)
    c2 = concurrence(rho_c2a1)
    lhs = tangle(c1) + tangle(c2)
    rhs = pure_bipartite_concurrence(rho_c2) ** 2
    return CkwReport(lhs, rhs, lhs <= rhs + config.CKW_SLACK, c1.value, c2.value, float(trace))


def ckw_check(rho_tripartite: DensityMatrix) -> CkwReport:
    """
    C1⊗C2⊗A1 三体态的 CKW 单配性检验

    Args:
        rho_tripartite: 标签恰为 {C1, C2, A1} 的 8×8 密度矩阵

    Returns:
        CkwReport: 附带 tr ρ 作为诊断
    """
    space = rho_tripartite.space
    if set(space.names) != {"C1", "C2", "A1"} or space.dims != (2, 2, 2):
        raise ArgumentError(f"ckw_check 需要 C1、C2、A1 三个量子比特，当前 {space.names} / {space.dims}")
    return ckw_from_reduced(
        partial_trace(rho_tripartite, {"C1", "C2"}),
        partial_trace(rho_tripartite, {"C2", "A1"}),
        reduced_single(rho_tripartite, "C2"),
        rho_tripartite.trace().real,
    )
