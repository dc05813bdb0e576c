"""
Jaynes–Cummings 哈密顿量与态演化

- evolve_unitary: 本征分解求 exp(−iHt)
- rabi_evolution_paper: 实系数 Rabi 旋转约定（sin 项不带 −i）
- lindblad_rhs / integrate_master_equation: T=0 腔泄漏主方程，定步长 RK4（数值基准）

时间统一以 1/g 为单位，即 t 与 Rabi 角 gt 数值相同（g = 1）。
"""
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from config import config
from db import log
from errors import ArgumentError, ConfigurationError, NumericalError
from hilbert import (
    ATOM,
    CAVITY,
    DensityMatrix,
    Ket,
    OperatorMatrix,
    SpaceSpec,
    annihilation,
    embed,
    sigma_minus,
    sigma_plus,
    space_of,
    superpose,
)


@dataclass(frozen=True)
class CouplingParams:
    g: float = 1.0
    pairs: Tuple[Tuple[str, str], ...] = (("C1", "A1"),)

    def __post_init__(self):
        if not self.g > 0:
            raise ConfigurationError(f"耦合常数 g 必须为正，当前 {self.g}")
        pairs = tuple((str(c), str(a)) for c, a in self.pairs)
        labels = [x for p in pairs for x in p]
        if len(set(labels)) != len(labels):
            raise ConfigurationError(f"每个标签最多出现在一个耦合对中: {pairs}")
        object.__setattr__(self, "pairs", pairs)


@dataclass(frozen=True)
class DissipationParams:
    kappa: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        kappa = {str(k): float(v) for k, v in dict(self.kappa).items()}
        for label, k in kappa.items():
            if not (k >= 0 and math.isfinite(k)):
                raise ConfigurationError(f"腔 {label} 的泄漏常数 κ 必须 ≥ 0，当前 {k}")
        object.__setattr__(self, "kappa", kappa)

    def rate(self, label: str) -> float:
        return self.kappa.get(label, 0.0)


@dataclass(frozen=True)
class IntegratorConfig:
    dt: float = config.DEFAULT_DT
    method: str = "rk4"
    positivity_tol: float = config.INTEGRATOR_POSITIVITY_TOL
    renormalize_trace: bool = False
    allow_large_step: bool = False  # 关闭 dt·g ≤ 0.01 保护

    def check(self, g: float = 1.0):
        if not self.dt > 0:
            raise ConfigurationError(f"步长 dt 必须为正，当前 {self.dt}")
        if self.method != "rk4":
            raise ConfigurationError(f"不支持的积分方法: {self.method}")
        if self.dt * g > config.MAX_DT_TIMES_G and not self.allow_large_step:
            raise ConfigurationError(
                f"步长保护: dt·g = {self.dt * g:.3g} > {config.MAX_DT_TIMES_G}，如确需请设置 allow_large_step"
            )


@dataclass(frozen=True, eq=False)
class Trajectory:
    """积分采样结果，可直接当作 [(t, ρ), …] 使用"""
    samples: Tuple[Tuple[float, DensityMatrix], ...]
    max_trace_drift: float = 0.0
    steps: int = 0

    def __iter__(self) -> Iterator[Tuple[float, DensityMatrix]]:
        return iter(self.samples)

    def __len__(self) -> int:
        return len(self.samples)

    def __getitem__(self, i):
        return self.samples[i]

    @property
    def times(self) -> List[float]:
        return [t for t, _ in self.samples]

    @property
    def states(self) -> List[DensityMatrix]:
        return [rho for _, rho in self.samples]


# ==================== 哈密顿量 ====================

def build_jc_hamiltonian(space: SpaceSpec, params: CouplingParams) -> OperatorMatrix:
    """
    共振 Jaynes–Cummings 相互作用 H = g Σ (σ⁺a + σ⁻a†)

    Args:
        space: 复合空间
        params: 耦合常数与 (腔, 原子) 耦合对

    Returns:
        OperatorMatrix: 厄米且与总激发数对易
    """
    H = np.zeros((space.total_dim, space.total_dim), dtype=complex)
    for cav, atm in params.pairs:
        for label, kind in ((cav, CAVITY), (atm, ATOM)):
            if label not in space:
                raise ConfigurationError(f"耦合对中的 {label} 不在空间 {space.names} 中")
            if space.label(label).kind != kind:
                raise ConfigurationError(f"{label} 的类型为 {space.label(label).kind}，不能作为 {kind} 耦合")
        a = embed(annihilation(space.label(cav).dim), space, cav).elements
        sp = embed(sigma_plus(), space, atm).elements
        sm = embed(sigma_minus(), space, atm).elements
        H += params.g * (sp @ a + sm @ a.conj().T)
    return OperatorMatrix(space, H)


def collapse_operators(space: SpaceSpec, diss: DissipationParams) -> List[Tuple[float, np.ndarray]]:
    """每个 κ > 0 的腔返回 (κ, a_j)；原子不带耗散"""
    ops = []
    for label, k in sorted(diss.kappa.items()):
        if label not in space:
            raise ConfigurationError(f"耗散参数中的 {label} 不在空间 {space.names} 中")
        sub = space.label(label)
        if sub.kind != CAVITY:
            raise ConfigurationError(f"{label} 不是腔模，原子不带耗散通道")
        if k > 0:
            ops.append((k, embed(annihilation(sub.dim), space, label).elements))
    return ops


# ==================== 幺正演化 ====================

def _unitary(H: OperatorMatrix, t: float) -> np.ndarray:
    err = H.hermiticity_error()
    if err > config.UNITARY_HERMITIAN_TOL:
        raise NumericalError(f"哈密顿量非厄米，偏差 {err:.3e}")
    evals, vecs = np.linalg.eigh((H.elements + H.elements.conj().T) / 2)
    return (vecs * np.exp(-1j * evals * t)) @ vecs.conj().T


def evolve_unitary(state: Union[Ket, DensityMatrix], H: OperatorMatrix, t: float):
    """
    精确演化 exp(−iHt)，对 Ket 作用 Uψ，对 DensityMatrix 作用 UρU†

    Args:
        state: 初态
        H: 厄米哈密顿量（与 state 同空间）
        t: 时间（单位 1/g）
    """
    if state.space != H.space:
        raise ArgumentError(f"态与哈密顿量空间不一致: {state.space.names} vs {H.space.names}")
    U = _unitary(H, t)
    if isinstance(state, Ket):
        return Ket(state.space, U @ state.amplitudes)
    return DensityMatrix(state.space, U @ state.elements @ U.conj().T)


def rabi_evolution_paper(state: Ket, pair: Tuple[str, str], gt: float) -> Ket:
    """
    实系数旋转约定：
    |e,0⟩ → cos gt|e,0⟩ + sin gt|g,1⟩
    |g,1⟩ → cos gt|g,1⟩ − sin gt|e,0⟩
    |g,0⟩ → |g,0⟩

    Args:
        state: 态矢，耦合对须处于单激发扇区或 |g,0⟩
        pair: (腔标签, 原子标签)
        gt: Rabi 角
    """
    space = state.space
    cav, atm = pair
    ic, ia = space.index_of(cav), space.index_of(atm)
    c, s = math.cos(gt), math.sin(gt)
    out = np.zeros_like(state.amplitudes)
    for idx, amp in enumerate(state.amplitudes):
        if amp == 0:
            continue
        digits = list(space.decode(idx))
        n, lvl = digits[ic], digits[ia]
        if (n, lvl) == (0, 0):
            out[idx] += amp
        elif (n, lvl) == (0, 1):
            partner = list(digits)
            partner[ic], partner[ia] = 1, 0
            out[idx] += c * amp
            out[space.encode(partner)] += s * amp
        elif (n, lvl) == (1, 0):
            partner = list(digits)
            partner[ic], partner[ia] = 0, 1
            out[idx] += c * amp
            out[space.encode(partner)] -= s * amp
        else:
            raise ArgumentError(f"基矢 {tuple(digits)} 超出 {cav}-{atm} 单激发扇区，实系数旋转不适用")
    return Ket(space, out, normalized=state.normalized)


# ==================== 主方程 ====================

def _generator(H: np.ndarray, ops: Sequence[Tuple[float, np.ndarray]]) -> Callable[[np.ndarray], np.ndarray]:
    # ρ̇ = −i(H_eff ρ − ρ H_eff†) + Σ 2κ aρa†,  H_eff = H − i Σ κ a†a
    H_eff = H.astype(complex)
    jumps = []
    for k, a in ops:
        H_eff = H_eff - 1j * k * (a.conj().T @ a)
        jumps.append((2 * k, a, a.conj().T))
    H_eff_dag = H_eff.conj().T

    def rhs(rho: np.ndarray) -> np.ndarray:
        out = -1j * (H_eff @ rho - rho @ H_eff_dag)
        for w, a, ad in jumps:
            out += w * (a @ rho @ ad)
        return out

    return rhs


def lindblad_rhs(rho: DensityMatrix, H: OperatorMatrix, diss: DissipationParams) -> np.ndarray:
    """
    T=0 主方程右端 −i[H,ρ] + Σ κ_j(2a_jρa_j† − a_j†a_jρ − ρa_j†a_j)

    Returns:
        np.ndarray: dρ/dt，厄米且无迹
    """
    if rho.space != H.space:
        raise ArgumentError(f"ρ 与 H 空间不一致: {rho.space.names} vs {H.space.names}")
    return _generator(H.elements, collapse_operators(rho.space, diss))(rho.elements)


def rk4_step(rho: np.ndarray, fun: Callable[[np.ndarray], np.ndarray], dt: float) -> np.ndarray:
    """经典四阶 Runge-Kutta 单步"""
    dt2 = dt / 2.0
    k1 = fun(rho)
    k2 = fun(rho + k1 * dt2)
    k3 = fun(rho + k2 * dt2)
    k4 = fun(rho + k3 * dt)
    return rho + (k1 + 2 * k2 + 2 * k3 + k4) / 6.0 * dt


def integrate_master_equation(
    rho0: DensityMatrix,
    H: OperatorMatrix,
    diss: DissipationParams,
    t_final: float,
    cfg: IntegratorConfig = IntegratorConfig(),
    sample_times: Optional[Iterable[float]] = None,
    g: float = 1.0,
) -> Trajectory:
    """
    定步长 RK4 积分主方程（不做久期近似），作为解析结果的数值基准

    Args:
        rho0: 初始密度矩阵
        H: 哈密顿量
        diss: 各腔泄漏常数
        t_final: 终止时间（≥ 0）
        cfg: 积分器配置
        sample_times: 采样时刻，默认只采 t_final；步内的采样点由当前态走一个部分步得到
        g: 耦合常数，仅用于步长保护 dt·g

    Returns:
        Trajectory: 按时间升序的 (t, ρ) 采样
    """
    cfg.check(g)
    if not (t_final >= 0 and math.isfinite(t_final)):
        raise ConfigurationError(f"t_final 必须 ≥ 0，当前 {t_final}")
    if rho0.space != H.space:
        raise ArgumentError(f"ρ0 与 H 空间不一致: {rho0.space.names} vs {H.space.names}")
    times = sorted(float(t) for t in (sample_times if sample_times is not None else [t_final]))
    if times and (times[0] < 0 or times[-1] > t_final + 1e-12):
        raise ArgumentError(f"采样时刻须位于 [0, {t_final}] 内")

    space = rho0.space
    fun = _generator(H.elements, collapse_operators(space, diss))
    tr0 = rho0.trace().real
    rho = np.array(rho0.elements, dtype=complex)
    samples: List[Tuple[float, DensityMatrix]] = []
    max_drift = 0.0

    def emit(t: float, mat: np.ndarray):
        nonlocal max_drift
        dm = DensityMatrix(space, mat)
        drift = abs(dm.trace().real - tr0)
        max_drift = max(max_drift, drift)
        lam = dm.min_eigenvalue()
        if lam < -cfg.positivity_tol:
            log("ERROR", f"主方程积分失去正定性: gt={t:.6g}, 最小本征值 {lam:.3e}")
            raise NumericalError(f"正定性破坏: t={t:.6g} 时最小本征值 {lam:.3e}", time=t)
        if drift > config.TRACE_DRIFT_TOL and not cfg.renormalize_trace:
            log("ERROR", f"主方程积分迹漂移: gt={t:.6g}, |Δtr| = {drift:.3e}")
            raise NumericalError(f"迹漂移 {drift:.3e} 超过 {config.TRACE_DRIFT_TOL}", time=t)
        samples.append((t, dm))

    n_steps = int(math.ceil(t_final / cfg.dt - 1e-9)) if t_final > 0 else 0
    k = 0
    t = 0.0
    for step in range(n_steps + 1):
        while k < len(times) and times[k] <= t + 1e-12:
            emit(times[k], rho)
            k += 1
        if k == len(times) or step == n_steps:
            break
        t_next = min((step + 1) * cfg.dt, t_final)
        while k < len(times) and times[k] < t_next - 1e-12:
            emit(times[k], _hermitize(rk4_step(rho, fun, times[k] - t)))
            k += 1
        rho = _hermitize(rk4_step(rho, fun, t_next - t))
        if cfg.renormalize_trace:
            rho = rho * (tr0 / np.trace(rho).real)
        t = t_next

    log("DEBUG", f"RK4 积分完成: {n_steps} 步, dt={cfg.dt}, 采样 {len(samples)} 个, 最大迹漂移 {max_drift:.2e}")
    return Trajectory(tuple(samples), max_drift, n_steps)


def _hermitize(rho: np.ndarray) -> np.ndarray:
    return (rho + rho.conj().T) / 2


# ==================== 纠缠腔对初态与数值基准 ====================

def paper_initial_state(names: Sequence[str], cavity_dim: int = None) -> Ket:
    """
    两腔最大纠缠、原子全在基态：(|0₁1₂⟩ + |1₁0₂⟩)/√2 ⊗ |g…⟩

    Args:
        names: 子系统标签，须含 C1、C2，其余为原子
        cavity_dim: 腔模维数
    """
    space = space_of(*names, cavity_dim=cavity_dim)
    if "C1" not in space or "C2" not in space:
        raise ArgumentError(f"初态需要 C1 与 C2，当前 {space.names}")
    terms = []
    for c1, c2 in ((0, 1), (1, 0)):
        occ = {n: 0 for n in space.names}
        occ["C1"], occ["C2"] = c1, c2
        terms.append((1 / math.sqrt(2), occ))
    return superpose(space, terms)


def _oracle(
    names: Sequence[str],
    pairs: Sequence[Tuple[str, str]],
    gt_values: Sequence[float],
    k1: float,
    k2: float,
    cfg: IntegratorConfig,
    cavity_dim: int = None,
) -> Trajectory:
    gts = [float(x) for x in gt_values]
    if not gts:
        raise ArgumentError("gt_values 不能为空")
    if min(gts) < 0:
        raise ConfigurationError("数值积分只支持 gt ≥ 0")
    rho0 = paper_initial_state(names, cavity_dim).to_density()
    H = build_jc_hamiltonian(rho0.space, CouplingParams(1.0, tuple(pairs)))
    diss = DissipationParams({"C1": k1, "C2": k2})
    return integrate_master_equation(rho0, H, diss, max(gts), cfg, gts)


def oracle_tripartite(
    gt_values: Sequence[float], k1: float, k2: float, cfg: IntegratorConfig = IntegratorConfig(), cavity_dim: int = None
) -> Trajectory:
    """C1⊗C2⊗A1，原子 A1 与 C1 共振耦合"""
    return _oracle(("C1", "C2", "A1"), (("C1", "A1"),), gt_values, k1, k2, cfg, cavity_dim)


def oracle_quadripartite(
    gt_values: Sequence[float], k1: float, k2: float, cfg: IntegratorConfig = IntegratorConfig(), cavity_dim: int = None
) -> Trajectory:
    """C1⊗C2⊗A1⊗A2，A1–C1 与 A2–C2 同时共振耦合"""
    return _oracle(("C1", "C2", "A1", "A2"), (("C1", "A1"), ("C2", "A2")), gt_values, k1, k2, cfg, cavity_dim)
