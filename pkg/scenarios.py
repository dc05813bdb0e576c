"""
腔-原子系统的闭式态与曲线

- 三体（C1、C2、A1）单配性：理想纯态与耗散 α 系数混合态
- 四体（C1、C2、A1、A2）纠缠交换：理想纯态与耗散 α 系数约化态
- 各场景的扫描生成器，解析（α 闭式）与数值（主方程基准）两条路径

α 系数有两种模式：verbatim 按印刷的闭式公式求值；limit-consistent 只修正 α₅，
使 κ→0 极限与理想态一致（三体 α₅ 减半，四体 α₅ 的 cos gt 换成 cos² gt）。
"""
import math
from dataclasses import dataclass
from typing import List, NamedTuple, Sequence, Tuple

import numpy as np

from config import config
from db import log
from dynamics import IntegratorConfig, oracle_quadripartite, oracle_tripartite
from entanglement import ckw_check, ckw_from_reduced, concurrence, reduced_single
from errors import ArgumentError, AssemblyError, ConfigurationError, ConsistencyError, NumericalError
from hilbert import DensityMatrix, Ket, SpaceSpec, partial_trace, space_of, superpose

TRIPARTITE = "tripartite"
QUADRIPARTITE = "quadripartite"
VERBATIM = "verbatim"
LIMIT_CONSISTENT = "limit-consistent"
ALPHA_MODES = (VERBATIM, LIMIT_CONSISTENT)
ANALYTIC = "analytic"
NUMERIC = "numeric"
METHODS = (ANALYTIC, NUMERIC)

TRIPARTITE_SPACE = space_of("C1", "C2", "A1")
QUADRIPARTITE_SPACE = space_of("C1", "C2", "A1", "A2")


@dataclass(frozen=True)
class AlphaSet:
    alpha: Tuple[complex, complex, complex, complex, complex, complex]
    scenario: str
    mode: str
    gt: float
    k1: float
    k2: float

    def __post_init__(self):
        if len(self.alpha) != 6:
            raise ArgumentError(f"α 系数必须为 6 个，当前 {len(self.alpha)}")
        if self.scenario not in (TRIPARTITE, QUADRIPARTITE):
            raise ArgumentError(f"未知场景: {self.scenario}")
        if self.mode not in ALPHA_MODES:
            raise ArgumentError(f"未知 α 模式: {self.mode}")
        object.__setattr__(self, "alpha", tuple(complex(a) for a in self.alpha))

    @property
    def params(self) -> Tuple[float, float, float]:
        return self.gt, self.k1, self.k2

    def trace(self) -> float:
        """三体装配矩阵的迹 α₁+α₂+α₃（不强制为 1）"""
        a = self.alpha
        if self.scenario == TRIPARTITE:
            return float((a[0] + a[1] + a[2]).real)
        return float((a[0] + a[1] + a[2] + a[3]).real)


@dataclass(frozen=True)
class ScenarioRow:
    scenario: str
    gt: float
    kappa1_over_g: float
    kappa2_over_g: float
    quantity: str
    value: float
    method: str

    def __post_init__(self):
        if not math.isfinite(self.value):
            raise NumericalError(f"{self.scenario}/{self.quantity} 在 gt={self.gt:.6g} 处取值非有限: {self.value}", time=self.gt)
        if self.quantity.startswith("C_") and not -1e-12 <= self.value <= 1 + 1e-9:
            raise NumericalError(f"并发度 {self.quantity} = {self.value} 超出 [0, 1]", time=self.gt)
        if self.method not in METHODS:
            raise ArgumentError(f"未知计算方法: {self.method}")


class TripartiteReduced(NamedTuple):
    c1c2: DensityMatrix
    c2a1: DensityMatrix
    c1a1: DensityMatrix


class SwapReduced(NamedTuple):
    c1c2: DensityMatrix
    a1a2: DensityMatrix


def _check_kappas(k1: float, k2: float):
    if not (k1 >= 0 and k2 >= 0):
        raise ConfigurationError(f"κ/g 必须 ≥ 0，当前 κ₁/g={k1}, κ₂/g={k2}")


def _check_mode(mode: str):
    if mode not in ALPHA_MODES:
        raise ConfigurationError(f"未知 α 模式: {mode}，可选 {ALPHA_MODES}")


def _assemble(space: SpaceSpec, terms: Sequence[Tuple[complex, object, object]]) -> np.ndarray:
    """Σ coeff |ket⟩⟨bra|"""
    mat = np.zeros((space.total_dim, space.total_dim), dtype=complex)
    for coeff, ket, bra in terms:
        mat[space.encode(ket), space.encode(bra)] += coeff
    return mat


def _checked(space: SpaceSpec, mat: np.ndarray, what: str) -> DensityMatrix:
    err = float(np.max(np.abs(mat - mat.conj().T)))
    if err > config.HERMITIAN_TOL:
        raise AssemblyError(f"{what} 装配后非厄米，偏差 {err:.3e}")
    return DensityMatrix(space, mat)


def _crosscheck(printed: DensityMatrix, traced: DensityMatrix, what: str):
    if printed.space != traced.space:
        raise ConsistencyError(f"{what}: 空间顺序不一致 {printed.space.names} vs {traced.space.names}")
    err = float(np.max(np.abs(printed.elements - traced.elements)))
    if err > config.REDUCED_CROSSCHECK_TOL:
        raise ConsistencyError(f"{what}: 印刷公式与偏迹结果相差 {err:.3e}")


# ==================== 三体：理想纯态 ====================

def ideal_tripartite_state(gt: float) -> Ket:
    """(|0₁1₂g₁⟩ + cos gt|1₁0₂g₁⟩ − sin gt|0₁0₂e₁⟩)/√2"""
    r = 1 / math.sqrt(2)
    return superpose(
        TRIPARTITE_SPACE,
        [
            (r, (0, 1, "g")),
            (r * math.cos(gt), (1, 0, "g")),
            (-r * math.sin(gt), (0, 0, "e")),
        ],
    )


def ideal_tripartite_concurrences(gt: float) -> Tuple[float, float, float]:
    """
    理想三体的三对并发度 (C_C1C2, C_C2A1, C_C1A1) = (|cos gt|, |sin gt|, |cos gt sin gt|)

    闭式结果同时与 态→偏迹→并发度 流水线比对，超差抛出 ConsistencyError
    """
    c, s = math.cos(gt), math.sin(gt)
    closed = (abs(c), abs(s), abs(c * s))
    rho = ideal_tripartite_state(gt).to_density()
    pipeline = (
        concurrence(partial_trace(rho, {"C1", "C2"})).value,
        concurrence(partial_trace(rho, {"C2", "A1"})).value,
        concurrence(partial_trace(rho, {"C1", "A1"})).value,
    )
    _agree(closed, pipeline, ("C_C1C2", "C_C2A1", "C_C1A1"), gt)
    return closed


def _agree(closed: Sequence[float], pipeline: Sequence[float], names: Sequence[str], gt: float):
    for name, a, b in zip(names, closed, pipeline):
        if abs(a - b) > config.CONSISTENCY_TOL:
            raise ConsistencyError(f"{name} 在 gt={gt:.9g} 处闭式 {a:.12g} 与流水线 {b:.12g} 不一致", time=gt)


# ==================== 三体：耗散 ====================

def alpha_tripartite(gt: float, k1: float, k2: float, mode: str = VERBATIM) -> AlphaSet:
    """
    久期近似下三体混合态的 α₁…α₆（t = gt/g，κ 以 κ/g 给出）

    Args:
        gt: Rabi 角
        k1, k2: κ₁/g, κ₂/g
        mode: verbatim 按印刷公式；limit-consistent 将 α₅ 减半
    """
    _check_kappas(k1, k2)
    _check_mode(mode)
    t = gt
    c, s = math.cos(gt), math.sin(gt)
    e1 = math.exp(-k1 * t)
    e1h = math.exp(-k1 * t / 2)
    e2 = math.exp(-k2 * t)
    e22 = math.exp(-2 * k2 * t)

    a1 = (1 - e1 / 2) * e22
    a2 = c * c * e1 * (1 - e22 / 2)
    a3 = s * s * e1 * (1 - e22 / 2)
    a4 = c * e1h * e2 / 2
    a5 = 1j * math.sin(2 * gt) * e1 * (1 - e22 / 2)
    a6 = 1j * (e1h * s / 2 - k1 * e1h * c / 4 + k1 / 4) * e2
    if mode == LIMIT_CONSISTENT:
        a5 = a5 / 2
    return AlphaSet((a1, a2, a3, a4, a5, a6), TRIPARTITE, mode, gt, k1, k2)


def dissipative_tripartite_state(alphas: AlphaSet) -> DensityMatrix:
    """
    九项装配的 8×8 三体矩阵；迹 = α₁+α₂+α₃，不归一化
    （泄漏到 |0₁0₂g₁⟩ 的布居不在印刷的展开中）
    """
    if alphas.scenario != TRIPARTITE:
        raise ArgumentError(f"需要三体 α 系数，当前 {alphas.scenario}")
    a1, a2, a3, a4, a5, a6 = alphas.alpha
    s01g, s10g, s00e = (0, 1, "g"), (1, 0, "g"), (0, 0, "e")
    mat = _assemble(
        TRIPARTITE_SPACE,
        [
            (a1, s01g, s01g),
            (a2, s10g, s10g),
            (a3, s00e, s00e),
            (a4, s01g, s10g),
            (a4, s10g, s01g),
            (a5, s10g, s00e),
            (-a5, s00e, s10g),
            (a6, s00e, s01g),
            (-a6, s01g, s00e),
        ],
    )
    return _checked(TRIPARTITE_SPACE, mat, "三体耗散态")


def dissipative_tripartite_reduced(alphas: AlphaSet) -> TripartiteReduced:
    """按印刷形式构建 ρ_C1C2、ρ_C2A1、ρ_C1A1，并与装配矩阵的偏迹交叉核对"""
    a1, a2, a3, a4, a5, a6 = alphas.alpha
    sp_c1c2 = space_of("C1", "C2")
    sp_c2a1 = space_of("C2", "A1")
    sp_c1a1 = space_of("C1", "A1")

    c1c2 = _checked(
        sp_c1c2,
        _assemble(sp_c1c2, [(a1, (0, 1), (0, 1)), (a2, (1, 0), (1, 0)), (a3, (0, 0), (0, 0)), (a4, (0, 1), (1, 0)), (a4, (1, 0), (0, 1))]),
        "ρ_C1C2",
    )
    c2a1 = _checked(
        sp_c2a1,
        _assemble(sp_c2a1, [(a1, (1, "g"), (1, "g")), (a2, (0, "g"), (0, "g")), (a3, (0, "e"), (0, "e")), (-a6, (1, "g"), (0, "e")), (a6, (0, "e"), (1, "g"))]),
        "ρ_C2A1",
    )
    c1a1 = _checked(
        sp_c1a1,
        _assemble(sp_c1a1, [(a1, (0, "g"), (0, "g")), (a2, (1, "g"), (1, "g")), (a3, (0, "e"), (0, "e")), (a5, (1, "g"), (0, "e")), (-a5, (0, "e"), (1, "g"))]),
        "ρ_C1A1",
    )

    full = dissipative_tripartite_state(alphas)
    _crosscheck(c1c2, partial_trace(full, {"C1", "C2"}), "ρ_C1C2")
    _crosscheck(c2a1, partial_trace(full, {"C2", "A1"}), "ρ_C2A1")
    _crosscheck(c1a1, partial_trace(full, {"C1", "A1"}), "ρ_C1A1")
    return TripartiteReduced(c1c2, c2a1, c1a1)


# ==================== 四体：理想纯态 ====================

def ideal_quadripartite_state(gt: float) -> Ket:
    """(cos gt|0₁1₂g₁g₂⟩ − sin gt|0₁0₂g₁e₂⟩ + cos gt|1₁0₂g₁g₂⟩ − sin gt|0₁0₂e₁g₂⟩)/√2"""
    r = 1 / math.sqrt(2)
    c, s = math.cos(gt), math.sin(gt)
    return superpose(
        QUADRIPARTITE_SPACE,
        [
            (r * c, (0, 1, "g", "g")),
            (-r * s, (0, 0, "g", "e")),
            (r * c, (1, 0, "g", "g")),
            (-r * s, (0, 0, "e", "g")),
        ],
    )


def ideal_swap_concurrences(gt: float) -> Tuple[float, float]:
    """(C_C1C2, C_A1A2) = (cos² gt, sin² gt)，并与流水线比对"""
    c, s = math.cos(gt), math.sin(gt)
    closed = (c * c, s * s)
    rho = ideal_quadripartite_state(gt).to_density()
    pipeline = (
        concurrence(partial_trace(rho, {"C1", "C2"})).value,
        concurrence(partial_trace(rho, {"A1", "A2"})).value,
    )
    _agree(closed, pipeline, ("C_C1C2", "C_A1A2"), gt)
    return closed


# ==================== 四体：耗散 ====================

def alpha_quadripartite(gt: float, k1: float, k2: float, mode: str = VERBATIM) -> AlphaSet:
    """
    久期近似下四体混合态的 α₁…α₆（α₆ 为两个原子因子之积）

    Args:
        gt: Rabi 角
        k1, k2: κ₁/g, κ₂/g
        mode: verbatim 按印刷公式；limit-consistent 令 α₅ = cos²gt·e^{−(κ₁+κ₂)t/2}/2
    """
    _check_kappas(k1, k2)
    _check_mode(mode)
    t = gt
    c, s = math.cos(gt), math.sin(gt)
    e1 = math.exp(-k1 * t)
    e2 = math.exp(-k2 * t)
    e1h = math.exp(-k1 * t / 2)
    e2h = math.exp(-k2 * t / 2)

    a1 = (1 - e1 / 2) * e2 * c * c
    a2 = s * s * e2 * (1 - e1 / 2)
    a3 = c * c * e1 * (1 - e2 / 2)
    a4 = s * s * e1 * (1 - e2 / 2)
    a5 = (c if mode == VERBATIM else c * c) * e1h * e2h / 2
    a6 = (e1h * s - k1 * e1h / 2 + k1 / 2) / 2 * (e2h * s - k2 * e2h / 2 + k2 / 2)
    return AlphaSet((a1, a2, a3, a4, a5, a6), QUADRIPARTITE, mode, gt, k1, k2)


def dissipative_quadripartite_state(alphas: AlphaSet) -> DensityMatrix:
    """印刷出的八项（省略号部分不建模），仅用于与约化态交叉核对"""
    if alphas.scenario != QUADRIPARTITE:
        raise ArgumentError(f"需要四体 α 系数，当前 {alphas.scenario}")
    a1, a2, a3, a4, a5, a6 = alphas.alpha
    s01gg, s00ge, s10gg, s00eg = (0, 1, "g", "g"), (0, 0, "g", "e"), (1, 0, "g", "g"), (0, 0, "e", "g")
    mat = _assemble(
        QUADRIPARTITE_SPACE,
        [
            (a1, s01gg, s01gg),
            (a2, s00ge, s00ge),
            (a3, s10gg, s10gg),
            (a4, s00eg, s00eg),
            (a5, s01gg, s10gg),
            (a5, s10gg, s01gg),
            (a6, s00ge, s00eg),
            (a6, s00eg, s00ge),
        ],
    )
    return _checked(QUADRIPARTITE_SPACE, mat, "四体耗散态")


def dissipative_swap_reduced(alphas: AlphaSet) -> SwapReduced:
    """按印刷形式构建 ρ_C1C2 与 ρ_A1A2"""
    if alphas.scenario != QUADRIPARTITE:
        raise ArgumentError(f"需要四体 α 系数，当前 {alphas.scenario}")
    a1, a2, a3, a4, a5, a6 = alphas.alpha
    sp_c = space_of("C1", "C2")
    sp_a = space_of("A1", "A2")
    c1c2 = _checked(
        sp_c,
        _assemble(sp_c, [(a1, (0, 1), (0, 1)), (a3, (1, 0), (1, 0)), (a2 + a4, (0, 0), (0, 0)), (a5, (0, 1), (1, 0)), (a5, (1, 0), (0, 1))]),
        "ρ_C1C2",
    )
    a1a2 = _checked(
        sp_a,
        _assemble(sp_a, [(a1 + a3, ("g", "g"), ("g", "g")), (a2, ("g", "e"), ("g", "e")), (a4, ("e", "g"), ("e", "g")), (a6, ("g", "e"), ("e", "g")), (a6, ("e", "g"), ("g", "e"))]),
        "ρ_A1A2",
    )
    full = dissipative_quadripartite_state(alphas)
    _crosscheck(c1c2, partial_trace(full, {"C1", "C2"}), "ρ_C1C2")
    _crosscheck(a1a2, partial_trace(full, {"A1", "A2"}), "ρ_A1A2")
    return SwapReduced(c1c2, a1a2)


# ==================== 曲线生成 ====================

def _grid(gt_values: Sequence[float]) -> List[float]:
    gts = [float(x) for x in gt_values]
    if not gts:
        raise ArgumentError("gt 网格不能为空")
    if any(b <= a for a, b in zip(gts, gts[1:])):
        raise ArgumentError("gt 网格必须严格递增")
    return gts


def _check_method(method: str):
    if method not in METHODS:
        raise ConfigurationError(f"未知计算方法: {method}，可选 {METHODS}")


def monogamy_curve(
    gt_values: Sequence[float],
    k1: float,
    k2: float,
    mode: str = VERBATIM,
    method: str = ANALYTIC,
    cfg: IntegratorConfig = IntegratorConfig(),
) -> List[ScenarioRow]:
    """
    三体单配性曲线：C_C1C2、C_C2A1、C_C1A1 与 TRACE

    Returns:
        List[ScenarioRow]: 按 (gt, 物理量) 顺序
    """
    gts = _grid(gt_values)
    _check_kappas(k1, k2)
    _check_method(method)
    rows: List[ScenarioRow] = []

    def add(gt, quantity, value):
        rows.append(ScenarioRow("monogamy", gt, k1, k2, quantity, float(value), method))

    if method == ANALYTIC:
        for gt in gts:
            al = alpha_tripartite(gt, k1, k2, mode)
            red = dissipative_tripartite_reduced(al)
            add(gt, "C_C1C2", concurrence(red.c1c2).value)
            add(gt, "C_C2A1", concurrence(red.c2a1).value)
            add(gt, "C_C1A1", concurrence(red.c1a1).value)
            add(gt, "TRACE", al.trace())
    else:
        for gt, rho in oracle_tripartite(gts, k1, k2, cfg):
            add(gt, "C_C1C2", concurrence(partial_trace(rho, {"C1", "C2"})).value)
            add(gt, "C_C2A1", concurrence(partial_trace(rho, {"C2", "A1"})).value)
            add(gt, "C_C1A1", concurrence(partial_trace(rho, {"C1", "A1"})).value)
            add(gt, "TRACE", rho.trace().real)
    return rows


def ckw_curve(
    gt_values: Sequence[float],
    k1: float,
    k2: float,
    mode: str = VERBATIM,
    method: str = ANALYTIC,
    cfg: IntegratorConfig = IntegratorConfig(),
) -> List[ScenarioRow]:
    """CKW 两侧（2√det 近似）：CKW_LHS、CKW_RHS 与 TRACE"""
    gts = _grid(gt_values)
    _check_kappas(k1, k2)
    _check_method(method)
    rows: List[ScenarioRow] = []

    def add(gt, report):
        for quantity, value in (("CKW_LHS", report.lhs), ("CKW_RHS", report.rhs), ("TRACE", report.trace)):
            rows.append(ScenarioRow("ckw", gt, k1, k2, quantity, float(value), method))
        if not report.satisfied:
            log("WARNING", f"CKW 不等式在 gt={gt:.6g} 处不成立: lhs={report.lhs:.9g} > rhs={report.rhs:.9g}")

    if method == ANALYTIC:
        for gt in gts:
            al = alpha_tripartite(gt, k1, k2, mode)
            red = dissipative_tripartite_reduced(al)
            rho_c2 = reduced_single(dissipative_tripartite_state(al), "C2")
            add(gt, ckw_from_reduced(red.c1c2, red.c2a1, rho_c2, al.trace()))
    else:
        for gt, rho in oracle_tripartite(gts, k1, k2, cfg):
            add(gt, ckw_check(rho))
    return rows


def swap_curve(
    gt_values: Sequence[float],
    k1: float,
    k2: float,
    mode: str = VERBATIM,
    method: str = ANALYTIC,
    cfg: IntegratorConfig = IntegratorConfig(),
) -> List[ScenarioRow]:
    """纠缠交换曲线：C_C1C2 与 C_A1A2"""
    gts = _grid(gt_values)
    _check_kappas(k1, k2)
    _check_method(method)
    rows: List[ScenarioRow] = []

    def add(gt, c_cav, c_atom):
        rows.append(ScenarioRow("swap", gt, k1, k2, "C_C1C2", float(c_cav), method))
        rows.append(ScenarioRow("swap", gt, k1, k2, "C_A1A2", float(c_atom), method))

    if method == ANALYTIC:
        for gt in gts:
            red = dissipative_swap_reduced(alpha_quadripartite(gt, k1, k2, mode))
            add(gt, concurrence(red.c1c2).value, concurrence(red.a1a2).value)
    else:
        for gt, rho in oracle_quadripartite(gts, k1, k2, cfg):
            add(gt, concurrence(partial_trace(rho, {"C1", "C2"})).value, concurrence(partial_trace(rho, {"A1", "A2"})).value)
    return rows


def fig5_curve(
    gt_values: Sequence[float],
    kappa_values: Sequence[float],
    mode: str = VERBATIM,
    method: str = ANALYTIC,
    cfg: IntegratorConfig = IntegratorConfig(),
) -> List[ScenarioRow]:
    """
    原子–腔并发度 C(ρ_A1C1) 随 κ/g 的变化（κ₁ = κ₂ = κ）

    Args:
        gt_values: 固定的 Rabi 角，缺省为 π/4、3π/4、5π/4
        kappa_values: 严格递增的正 κ/g 网格

    Returns:
        List[ScenarioRow]: 按 (gt, κ) 顺序，物理量 C_A1C1
    """
    gts = sorted(float(x) for x in gt_values)
    kappas = [float(k) for k in kappa_values]
    if not gts or not kappas:
        raise ArgumentError("gt 与 κ 网格都不能为空")
    if min(kappas) <= 0 or any(b <= a for a, b in zip(kappas, kappas[1:])):
        raise ArgumentError("κ/g 网格必须为正且严格递增")
    _check_method(method)

    values = {}
    if method == ANALYTIC:
        for gt in gts:
            for k in kappas:
                values[(gt, k)] = concurrence(dissipative_tripartite_reduced(alpha_tripartite(gt, k, k, mode)).c1a1).value
    else:
        for k in kappas:
            for gt, rho in oracle_tripartite(gts, k, k, cfg):
                values[(gt, k)] = concurrence(partial_trace(rho, {"C1", "A1"})).value
    return [ScenarioRow("fig5", gt, k, k, "C_A1C1", values[(gt, k)], method) for gt in gts for k in kappas]
