# app/core/exceptions.py
from typing import Any, Dict


class MultifractalError(Exception):
    """分析错误基类，携带结构化错误信息与进程退出码"""

    error = "analysis_failed"
    exit_code = 1

    def __init__(self, message: str, **detail: Any):
        super().__init__(message)
        self.message = message
        self.detail = detail

    def to_payload(self) -> Dict[str, Any]:
        payload: Dict[str, Any] = {"error": self.error, "message": self.message}
        payload.update(self.detail)
        return payload


class InputDataError(MultifractalError, ValueError):
    """输入数据不合法（CSV 格式、非正价格、日期乱序等）"""

    error = "invalid_input"
    exit_code = 1


class ConfigurationError(MultifractalError, ValueError):
    """参数或网格配置不合法"""

    error = "invalid_configuration"
    exit_code = 2


class MissingAnalysisError(ConfigurationError):
    error = "missing_analysis"


class DegenerateSeriesError(MultifractalError, ArithmeticError):
    """数值退化：零方差序列、阈值剔除全部数据点、非有限导数"""

    error = "degenerate_series"
    exit_code = 3


class DegenerateBoxError(DegenerateSeriesError):
    """盒内波动为 0 且 q <= 0，负阶矩发散"""

    error = "degenerate_box"

    def __init__(self, scale: int, box: int, q: float):
        super().__init__(
            f"degenerate box (zero fluctuation) at scale={scale}, box={box} for q={q:g}",
            scale=scale,
            box=box,
            q=q,
        )
        self.scale = scale
        self.box = box
        self.q = q
