from typing import Optional


class SimulationError(Exception):
    """所有模拟相关异常的基类"""


class DimensionError(SimulationError, ValueError):
    """基矢指标超出子系统维数"""


class CompositionError(SimulationError, ValueError):
    """子系统标签重复或不存在"""


class ArgumentError(SimulationError, ValueError):
    """调用参数不合法"""


class ConfigurationError(SimulationError, ValueError):
    """物理参数或积分器配置不合法"""


class NumericalError(SimulationError, ArithmeticError):
    """数值失败，time 为出错时刻（Rabi 角）"""

    def __init__(self, message: str, time: Optional[float] = None):
        super().__init__(message)
        self.time = time


class AssemblyError(NumericalError):
    """解析密度矩阵装配后不满足厄米性"""


class ConsistencyError(NumericalError):
    """闭式结果与 态→偏迹→并发度 流水线不一致"""


EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERICAL = 2
EXIT_COMPARE = 3


def exit_code_for(exc: BaseException) -> int:
    """
    异常到命令行退出码的映射

    Args:
        exc: 捕获到的异常

    Returns:
        int: 1 表示用法/配置错误，2 表示数值失败
    """
    if isinstance(exc, NumericalError):
        return EXIT_NUMERICAL
    return EXIT_USAGE
