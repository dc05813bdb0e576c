#!/usr/bin/env python3
"""
主方程数值基准自检脚本 - 检查 RK4 积分器与解析结果是否可信

    python diagnose_oracle.py
"""

import math
import os
import sys
import time

import numpy as np
import psutil

# 添加当前目录到Python路径
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from config import config
from dynamics import (
    CouplingParams,
    DissipationParams,
    IntegratorConfig,
    build_jc_hamiltonian,
    evolve_unitary,
    integrate_master_equation,
    paper_initial_state,
)
from hilbert import OperatorMatrix, basis_ket, space_of
from scenarios import ANALYTIC, LIMIT_CONSISTENT, NUMERIC, monogamy_curve

DEVIATION_KAPPAS = (0.1, 0.05, 0.01, 0.0)


def print_section(title):
    print(f"\n{'='*50}")
    print(f" {title}")
    print(f"{'='*50}")


def _mark(ok: bool) -> str:
    return "✅" if ok else "❌"


def check_unitary_limit(n_samples: int = 64) -> bool:
    """κ=0 时 RK4 与精确幺正演化的布居一致"""
    print_section("κ=0：RK4 与幺正演化")
    rho0 = paper_initial_state(("C1", "C2", "A1")).to_density()
    H = build_jc_hamiltonian(rho0.space, CouplingParams(1.0, (("C1", "A1"),)))
    gts = np.linspace(0.0, 2 * math.pi, n_samples)
    traj = integrate_master_equation(rho0, H, DissipationParams({}), gts[-1], IntegratorConfig(), gts)
    worst = 0.0
    for t, rho in traj:
        exact = evolve_unitary(rho0, H, t)
        diff = np.max(np.abs(np.diag(rho.elements).real - np.diag(exact.elements).real))
        worst = max(worst, float(diff))
    ok = worst <= 1e-6
    print(f"{_mark(ok)} 最大布居偏差 {worst:.3e}（阈值 1e-6），最大迹漂移 {traj.max_trace_drift:.2e}")
    return ok


def check_cavity_decay(kappa: float = 0.3, t_final: float = 2.0) -> bool:
    """单腔单光子布居按 e^{−2κt} 衰减"""
    print_section("单腔衰减 e^{-2κt}")
    space = space_of("C1")
    rho0 = basis_ket(space, (1,)).to_density()
    H = OperatorMatrix(space, np.zeros((space.total_dim, space.total_dim)))
    times = np.linspace(0.0, t_final, 21)
    traj = integrate_master_equation(rho0, H, DissipationParams({"C1": kappa}), t_final, IntegratorConfig(), times)
    worst = max(abs(rho.elements[1, 1].real - math.exp(-2 * kappa * t)) for t, rho in traj)
    ok = worst <= 1e-6
    print(f"{_mark(ok)} κ={kappa}: 最大偏差 {worst:.3e}（阈值 1e-6）")
    return ok


def _decay_error(dt: float) -> float:
    space = space_of("C1")
    rho0 = basis_ket(space, (1,)).to_density()
    H = OperatorMatrix(space, np.zeros((2, 2)))
    cfg = IntegratorConfig(dt=dt, allow_large_step=True)
    traj = integrate_master_equation(rho0, H, DissipationParams({"C1": 1.0}), 1.0, cfg)
    return abs(traj.states[-1].elements[1, 1].real - math.exp(-2.0))


def check_rk4_order() -> bool:
    """步长减半，误差缩小约 16 倍"""
    print_section("RK4 收敛阶")
    e1 = _decay_error(0.1)
    e2 = _decay_error(0.05)
    ratio = e1 / e2 if e2 > 0 else float("inf")
    ok = ratio >= 12
    print(f"{_mark(ok)} dt=0.1 误差 {e1:.3e}, dt=0.05 误差 {e2:.3e}, 比值 {ratio:.2f}（要求 ≥ 12）")
    return ok


def max_deviation(kappa: float, gts: np.ndarray) -> float:
    """limit-consistent 模式下各并发度 |analytic − numeric| 的最大值"""
    ana = monogamy_curve(gts, kappa, kappa, LIMIT_CONSISTENT, ANALYTIC)
    num = monogamy_curve(gts, kappa, kappa, LIMIT_CONSISTENT, NUMERIC)
    return max(abs(a.value - n.value) for a, n in zip(ana, num) if a.quantity.startswith("C_"))


def check_analytic_deviation(gt_steps: int = 201) -> bool:
    """久期近似闭式解随 κ/g 减小而收敛到数值结果"""
    print_section("解析 vs 数值（limit-consistent）")
    gts = np.linspace(0.0, 2 * math.pi, gt_steps)
    devs = {}
    for k in DEVIATION_KAPPAS:
        devs[k] = max_deviation(k, gts)
        print(f"  κ/g={k:<5} max|Δ| = {devs[k]:.3e}")
    values = [devs[k] for k in DEVIATION_KAPPAS]
    monotone = all(b < a for a, b in zip(values, values[1:]))
    print(f"{_mark(monotone)} 偏差随 κ/g 单调减小")
    exact = devs[0.0] <= config.COMPARE_TOLERANCES[0.0]
    print(f"{_mark(exact)} κ=0 偏差 ≤ {config.COMPARE_TOLERANCES[0.0]:g}")
    bounded = devs[0.1] <= config.COMPARE_TOLERANCES[0.1]
    print(f"{_mark(bounded)} κ/g=0.1 偏差 ≤ 冻结阈值 {config.COMPARE_TOLERANCES[0.1]:g}")
    return monotone and exact and bounded


def report_resources(started: float):
    print_section("进程资源")
    proc = psutil.Process(os.getpid())
    mem = proc.memory_info()
    cpu = proc.cpu_times()
    vm = psutil.virtual_memory()
    print(f"耗时: {time.time() - started:.2f} s")
    print(f"CPU 时间: user {cpu.user:.2f} s, system {cpu.system:.2f} s")
    print(f"常驻内存: {mem.rss / (1024 * 1024):.1f} MB")
    print(f"系统内存: {vm.percent}% 已用, 可用 {int(vm.available / (1024 * 1024))} MB, CPU 核数 {psutil.cpu_count(logical=True)}")


def main() -> int:
    print("=== 主方程数值基准自检 ===")
    started = time.time()
    checks = [check_unitary_limit, check_cavity_decay, check_rk4_order, check_analytic_deviation]
    results = []
    for check in checks:
        try:
            results.append(check())
        except Exception as e:
            print(f"❌ {check.__name__} 异常: {e}")
            results.append(False)
    report_resources(started)
    print_section("结论")
    passed = sum(results)
    print(f"{_mark(all(results))} {passed}/{len(results)} 项通过")
    return 0 if all(results) else 1


if __name__ == "__main__":
    sys.exit(main())
