#!/usr/bin/env python3
"""
命令行入口

    python cli.py sweep   --scenario monogamy --kappa1 0.1 --kappa2 0.1 --out fig3.csv
    python cli.py compare --scenario monogamy --kappa1 0.1 --kappa2 0.1 --alpha-mode limit-consistent

退出码：0 成功，1 用法/配置错误，2 数值失败，3 解析与数值比较超差
"""
import argparse
import asyncio
import logging
import math
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from config import config
from db import close_db, init_db, log, record_run
from dynamics import IntegratorConfig
from errors import EXIT_COMPARE, EXIT_OK, EXIT_USAGE, ArgumentError, ConfigurationError, SimulationError, exit_code_for
from scenarios import ALPHA_MODES, ANALYTIC, NUMERIC, ScenarioRow, ckw_curve, fig5_curve, monogamy_curve, swap_curve

SCENARIOS = ("monogamy", "swap", "ckw", "fig5")
BOTH = "both"
CURVES = {"monogamy": monogamy_curve, "ckw": ckw_curve, "swap": swap_curve}


def parse_angle(text: str) -> float:
    """
    解析角度：普通浮点数，或 pi 的有理倍数（pi/4、3pi/4、3*pi/2、-pi、2π）

    有理系数先精确求出，再乘以 math.pi
    """
    s = str(text).strip().lower().replace("π", "pi").replace(" ", "")
    if "pi" not in s:
        try:
            return float(s)
        except ValueError:
            raise ArgumentError(f"无法解析角度: {text!r}")
    head, tail = s.split("pi", 1)
    head = head.rstrip("*")
    try:
        if head in ("", "+"):
            coef = Fraction(1)
        elif head == "-":
            coef = Fraction(-1)
        else:
            coef = Fraction(head)
        if tail:
            if not tail.startswith("/"):
                raise ValueError(tail)
            coef = coef / Fraction(tail[1:])
    except (ValueError, ZeroDivisionError):
        raise ArgumentError(f"无法解析角度: {text!r}")
    return coef.numerator * math.pi / coef.denominator


def parse_kappa_grid(text: str) -> Tuple[float, float, int]:
    """min,max,steps -> 对数网格参数"""
    parts = [p.strip() for p in str(text).split(",")]
    if len(parts) != 3:
        raise ArgumentError(f"--kappa-grid 需要 min,max,steps 三项，当前 {text!r}")
    try:
        return float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise ArgumentError(f"--kappa-grid 无法解析: {text!r}")


@dataclass
class SweepConfig:
    scenario: str = "monogamy"
    gt_min: float = config.GT_MIN
    gt_max: float = config.GT_MAX
    gt_steps: int = config.GT_STEPS
    kappa1_over_g: float = config.KAPPA1
    kappa2_over_g: float = config.KAPPA2
    method: str = config.METHOD
    alpha_mode: str = config.ALPHA_MODE
    dt_times_g: float = config.DEFAULT_DT
    out: Optional[str] = None
    tolerance: Optional[float] = None
    kappa_grid: Tuple[float, float, int] = (config.FIG5_KAPPA_MIN, config.FIG5_KAPPA_MAX, config.FIG5_KAPPA_STEPS)
    fig5_gt: List[float] = field(default_factory=lambda: [parse_angle(a) for a in config.FIG5_GT])

    def validate(self) -> "SweepConfig":
        if self.scenario not in SCENARIOS:
            raise ConfigurationError(f"未知场景: {self.scenario}，可选 {SCENARIOS}")
        if self.method not in (ANALYTIC, NUMERIC, BOTH):
            raise ConfigurationError(f"未知方法: {self.method}")
        if self.alpha_mode not in ALPHA_MODES:
            raise ConfigurationError(f"未知 α 模式: {self.alpha_mode}")
        if self.scenario == "fig5":
            k_min, k_max, k_steps = self.kappa_grid
            if not (0 < k_min < k_max) or k_steps < 2:
                raise ConfigurationError(f"κ 网格需满足 0 < min < max 且 steps ≥ 2，当前 {self.kappa_grid}")
            if not self.fig5_gt:
                raise ConfigurationError("--fig5-gt 不能为空")
            if len(set(self.fig5_gt)) != len(self.fig5_gt):
                raise ConfigurationError("--fig5-gt 中角度重复")
            gt_floor = min(self.fig5_gt)
        else:
            if self.gt_steps < 2:
                raise ConfigurationError(f"gt 步数必须 ≥ 2，当前 {self.gt_steps}")
            if not self.gt_max > self.gt_min:
                raise ConfigurationError(f"gt 上限必须大于下限: [{self.gt_min}, {self.gt_max}]")
            if not (self.kappa1_over_g >= 0 and self.kappa2_over_g >= 0):
                raise ConfigurationError(f"κ/g 必须 ≥ 0，当前 {self.kappa1_over_g}, {self.kappa2_over_g}")
            gt_floor = self.gt_min
        if self.method != ANALYTIC:
            if gt_floor < 0:
                raise ConfigurationError("数值方法要求 gt ≥ 0")
            IntegratorConfig(dt=self.dt_times_g).check()
        return self

    @property
    def methods(self) -> List[str]:
        return [ANALYTIC, NUMERIC] if self.method == BOTH else [self.method]

    def gt_grid(self) -> np.ndarray:
        return np.linspace(self.gt_min, self.gt_max, self.gt_steps)

    def kappa_values(self) -> np.ndarray:
        k_min, k_max, k_steps = self.kappa_grid
        return np.logspace(math.log10(k_min), math.log10(k_max), k_steps)


def _curve(cfg: SweepConfig, method: str) -> List[ScenarioRow]:
    integ = IntegratorConfig(dt=cfg.dt_times_g)
    if cfg.scenario == "fig5":
        return fig5_curve(cfg.fig5_gt, cfg.kappa_values(), cfg.alpha_mode, method, integ)
    curve = CURVES[cfg.scenario]
    return curve(cfg.gt_grid(), cfg.kappa1_over_g, cfg.kappa2_over_g, cfg.alpha_mode, method, integ)


async def _compute_async(cfg: SweepConfig) -> List[ScenarioRow]:
    results = await asyncio.gather(*(asyncio.to_thread(_curve, cfg, m) for m in cfg.methods))
    rows = [r for chunk in results for r in chunk]
    q_order = {q: i for i, q in enumerate(config.SCENARIO_QUANTITIES[cfg.scenario])}
    m_order = {m: i for i, m in enumerate(cfg.methods)}
    if cfg.scenario == "fig5":
        rows.sort(key=lambda r: (r.gt, r.kappa1_over_g, m_order[r.method]))
    else:
        rows.sort(key=lambda r: (r.gt, q_order[r.quantity], m_order[r.method]))
    return rows


def compute_rows(cfg: SweepConfig) -> List[ScenarioRow]:
    """按网格顺序返回全部行，与线程完成顺序无关"""
    cfg.validate()
    rows = asyncio.run(_compute_async(cfg))
    per_method = len(cfg.fig5_gt) * cfg.kappa_grid[2] if cfg.scenario == "fig5" else cfg.gt_steps
    expected = per_method * len(config.SCENARIO_QUANTITIES[cfg.scenario]) * len(cfg.methods)
    if len(rows) != expected:
        raise ConfigurationError(f"行数 {len(rows)} 与网格 {expected} 不符")
    return rows


def rows_to_frame(rows: Sequence[ScenarioRow]) -> pd.DataFrame:
    return pd.DataFrame([[getattr(r, c) for c in config.CSV_HEADER] for r in rows], columns=config.CSV_HEADER)


def write_csv(rows: Sequence[ScenarioRow], out: Optional[str]) -> str:
    """写出 CSV；out 为 None 时写到标准输出。返回 CSV 文本"""
    text = rows_to_frame(rows).to_csv(index=False, float_format=config.FLOAT_FORMAT, lineterminator="\n")
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="") as f:
            f.write(text)
        log("INFO", f"已写出 {len(rows)} 行到 {out}")
    return text


def run_sweep(cfg: SweepConfig) -> Tuple[int, int]:
    """
    执行一次扫描并写出 CSV

    Returns:
        (退出码, 行数)
    """
    try:
        rows = compute_rows(cfg)
        write_csv(rows, cfg.out)
    except SimulationError as e:
        log("ERROR", f"sweep 失败: {e}")
        return exit_code_for(e), 0
    except OSError as e:
        log("ERROR", f"无法写出 {cfg.out}: {e}")
        return EXIT_USAGE, 0
    return EXIT_OK, len(rows)


def compare_rows(rows: Sequence[ScenarioRow]) -> pd.DataFrame:
    """
    每个物理量的 max |analytic − numeric| 与最差 gt；TRACE 不参与比较

    Returns:
        DataFrame: quantity, max_abs_diff, worst_gt, worst_kappa
    """
    df = rows_to_frame(rows)
    df = df[df["quantity"] != "TRACE"]
    keys = ["quantity", "gt", "kappa1_over_g", "kappa2_over_g"]
    wide = df.pivot_table(index=keys, columns="method", values="value", aggfunc="first", sort=False).reset_index()
    if ANALYTIC not in wide or NUMERIC not in wide:
        raise ArgumentError("比较需要 analytic 与 numeric 两种结果")
    wide["abs_diff"] = (wide[ANALYTIC] - wide[NUMERIC]).abs()
    report = []
    for quantity, grp in wide.groupby("quantity", sort=False):
        worst = grp.loc[grp["abs_diff"].idxmax()]
        report.append({
            "quantity": quantity,
            "max_abs_diff": float(worst["abs_diff"]),
            "worst_gt": float(worst["gt"]),
            "worst_kappa": float(worst["kappa1_over_g"]),
        })
    return pd.DataFrame(report, columns=["quantity", "max_abs_diff", "worst_gt", "worst_kappa"])


def default_tolerance(cfg: SweepConfig) -> float:
    """按 κ/g 查找冻结的比较阈值"""
    if cfg.scenario != "fig5" and cfg.kappa1_over_g == cfg.kappa2_over_g:
        tol = config.COMPARE_TOLERANCES.get(cfg.kappa1_over_g)
        if tol is not None:
            return tol
    raise ConfigurationError(f"κ/g = ({cfg.kappa1_over_g}, {cfg.kappa2_over_g}) 没有冻结的比较阈值，请给出 --tolerance")


def run_compare(cfg: SweepConfig) -> Tuple[int, int]:
    """
    解析与数值结果逐点比较

    Returns:
        (退出码, 行数)：全部 ≤ 阈值为 0，否则 3
    """
    try:
        if cfg.method != BOTH:
            raise ConfigurationError(f"compare 需要 --method both，当前 {cfg.method}")
        tolerance = cfg.tolerance if cfg.tolerance is not None else default_tolerance(cfg)
        if not tolerance >= 0:
            raise ConfigurationError(f"--tolerance 必须 ≥ 0，当前 {tolerance}")
        rows = compute_rows(cfg)
        report = compare_rows(rows)
        if cfg.out is not None:
            write_csv(rows, cfg.out)
    except SimulationError as e:
        log("ERROR", f"compare 失败: {e}")
        return exit_code_for(e), 0
    except OSError as e:
        log("ERROR", f"无法写出 {cfg.out}: {e}")
        return EXIT_USAGE, 0

    report["status"] = np.where(report["max_abs_diff"] <= tolerance, "ok", "FAIL")
    print(f"scenario={cfg.scenario} alpha_mode={cfg.alpha_mode} tolerance={tolerance:g}")
    print(report.to_string(index=False, float_format=lambda v: f"{v:.6g}"))
    failed = report.loc[report["status"] == "FAIL", "quantity"].tolist()
    if failed:
        log("WARNING", f"比较超差: {', '.join(failed)}")
        return EXIT_COMPARE, len(rows)
    return EXIT_OK, len(rows)


class _Parser(argparse.ArgumentParser):
    """用法错误统一退出码 1"""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--scenario", choices=SCENARIOS, default="monogamy")
    common.add_argument("--gt-min", default=str(config.GT_MIN), help="起始 Rabi 角，可写 pi/4 形式")
    common.add_argument("--gt-max", default="2pi")
    common.add_argument("--gt-steps", type=int, default=config.GT_STEPS)
    common.add_argument("--kappa1", type=float, default=config.KAPPA1, help="κ₁/g")
    common.add_argument("--kappa2", type=float, default=config.KAPPA2, help="κ₂/g")
    common.add_argument("--alpha-mode", choices=ALPHA_MODES, default=config.ALPHA_MODE)
    common.add_argument("--dt", type=float, default=config.DEFAULT_DT, help="积分步长 dt·g")
    common.add_argument("--out", default=None, help="CSV 输出路径，缺省写到标准输出")
    common.add_argument("--kappa-grid", default=None, help="fig5 的 κ/g 对数网格 min,max,steps")
    common.add_argument("--fig5-gt", default=None, help="fig5 的 Rabi 角，逗号分隔")
    common.add_argument("--db", default=config.DB_PATH, help="sqlite 运行台账路径")
    common.add_argument("--log-level", default=config.LOG_LEVEL, choices=["DEBUG", "INFO", "WARNING", "ERROR"])

    parser = _Parser(prog="cli.py", description="双泄漏腔与 Rydberg 原子的纠缠单配性/纠缠交换模拟")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sweep = sub.add_parser("sweep", parents=[common], help="扫描 Rabi 角并输出曲线 CSV")
    sweep.add_argument("--method", choices=[ANALYTIC, NUMERIC, BOTH], default=config.METHOD)
    sweep.add_argument("--tolerance", type=float, default=None, help=argparse.SUPPRESS)
    compare = sub.add_parser("compare", parents=[common], help="比较解析与数值结果")
    compare.add_argument("--method", choices=[BOTH], default=BOTH)
    compare.add_argument("--tolerance", type=float, default=None, help="缺省按 κ/g 取冻结阈值")
    return parser


def config_from_args(args: argparse.Namespace) -> SweepConfig:
    cfg = SweepConfig(
        scenario=args.scenario,
        gt_min=parse_angle(args.gt_min),
        gt_max=parse_angle(args.gt_max),
        gt_steps=args.gt_steps,
        kappa1_over_g=args.kappa1,
        kappa2_over_g=args.kappa2,
        method=args.method,
        alpha_mode=args.alpha_mode,
        dt_times_g=args.dt,
        out=args.out,
        tolerance=args.tolerance,
    )
    if args.kappa_grid is not None:
        cfg.kappa_grid = parse_kappa_grid(args.kappa_grid)
    if args.fig5_gt is not None:
        cfg.fig5_gt = [parse_angle(a) for a in args.fig5_gt.split(",") if a.strip()]
    return cfg


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=getattr(logging, args.log_level),
        format="%(asctime)s %(levelname)s %(message)s",
        stream=sys.stderr,
    )
    if args.db:
        init_db(args.db)
    try:
        try:
            cfg = config_from_args(args)
        except SimulationError as e:
            log("ERROR", f"参数错误: {e}")
            code, n_rows = exit_code_for(e), 0
        else:
            code, n_rows = run_sweep(cfg) if args.command == "sweep" else run_compare(cfg)
        record_run(args.command, argv, code, args.out, n_rows)
    finally:
        close_db()
    return code


if __name__ == "__main__":
    sys.exit(main())
