import math
from typing import Dict, List, Optional


class Config:
    # 数值容差
    HERMITIAN_TOL: float = 1e-12
    NORM_TOL: float = 1e-12
    POSITIVITY_TOL: float = 1e-9
    UNITARY_HERMITIAN_TOL: float = 1e-10
    EIGEN_CLAMP_TOL: float = 1e-10  # ρρ̃ 本征值的舍入截断
    SQRT_EIGEN_CUTOFF: float = 1e-12  # 求 √ρ 时低于此值的本征值视为 0
    TRACE_WARN_TOL: float = 1e-6
    CKW_SLACK: float = 1e-9
    CONSISTENCY_TOL: float = 1e-10  # 闭式解与数值流水线的一致性
    REDUCED_CROSSCHECK_TOL: float = 1e-12

    # 积分器（时间单位 1/g）
    DEFAULT_DT: float = 0.001
    MAX_DT_TIMES_G: float = 0.01
    INTEGRATOR_POSITIVITY_TOL: float = 1e-7
    TRACE_DRIFT_TOL: float = 1e-8

    # 希尔伯特空间
    DEFAULT_CAVITY_DIM: int = 2  # 光子数截断 n ∈ {0, 1}

    # 命令行默认值
    GT_MIN: float = 0.0
    GT_MAX: float = 2 * math.pi
    GT_STEPS: int = 201
    KAPPA1: float = 0.0
    KAPPA2: float = 0.0
    METHOD: str = "analytic"
    ALPHA_MODE: str = "verbatim"
    FLOAT_FORMAT: str = "%.9g"
    CSV_HEADER: List[str] = ["scenario", "gt", "kappa1_over_g", "kappa2_over_g", "quantity", "value", "method"]

    # fig5 场景：κ/g 对数网格与固定 Rabi 角
    FIG5_KAPPA_MIN: float = 1e-3
    FIG5_KAPPA_MAX: float = 1.0
    FIG5_KAPPA_STEPS: int = 31
    FIG5_GT: List[str] = ["pi/4", "3pi/4", "5pi/4"]

    # 各场景输出的物理量
    SCENARIO_QUANTITIES: Dict[str, List[str]] = {
        "monogamy": ["C_C1C2", "C_C2A1", "C_C1A1", "TRACE"],
        "ckw": ["CKW_LHS", "CKW_RHS", "TRACE"],
        "swap": ["C_C1C2", "C_A1A2"],
        "fig5": ["C_A1C1"],
    }

    # 解析解与数值解的比较阈值（按 κ/g），0.1 处为一次性标定后冻结的上界
    COMPARE_TOLERANCES: Dict[float, float] = {
        0.0: 1e-6,
        0.1: 0.21,
    }

    # 运行台账（sqlite），None 表示不落盘
    DB_PATH: Optional[str] = None
    LOG_LEVEL: str = "INFO"


config = Config()
