# app/analysis/synth.py
"""已知多重分形性质的合成序列，作为验证引擎的解析基准。"""
import logging
from datetime import date
from typing import Optional, Sequence, Union

import numpy as np
from scipy.special import expit

from app.analysis.series import PriceSeries, ReturnSeries
from app.core.config import settings
from app.core.exceptions import ConfigurationError
from app.schemas.config_schemas import CascadeSpec

logger = logging.getLogger(__name__)

LN2 = np.log(2.0)
QLike = Union[float, Sequence[float], np.ndarray]


def business_dates(n: int, origin: Optional[date] = None) -> np.ndarray:
    """从 origin 起的 n 个连续工作日"""
    start = np.datetime64(origin or settings.SYNTH_ORIGIN_DATE, 'D')
    return np.busday_offset(start, np.arange(n), roll='forward')


def _as_returns(values: np.ndarray, tag: str, label: str) -> ReturnSeries:
    days = business_dates(values.size + 1)
    return ReturnSeries(dates=days[1:], values=values, lineage=(tag,), from_dates=days[:-1], label=label)


def binomial_cascade(spec: CascadeSpec) -> ReturnSeries:
    """二项乘性级联：每一层随机决定左右子区间分得 a 或 1-a，长度 2**levels

    分支顺序不改变各层盒子测度的多重集合，因此 h(q) 的解析式对所有种子成立。
    """
    rng = np.random.default_rng(spec.seed)
    weights = np.ones(1)
    for _ in range(spec.levels):
        left = np.where(rng.random(weights.size) < 0.5, spec.a, 1.0 - spec.a)
        weights = np.column_stack((weights * left, weights * (1.0 - left))).ravel()

    logger.debug("Cascade generated | levels=%s | a=%s | seed=%s", spec.levels, spec.a, spec.seed)
    return _as_returns(weights, f"cascade(a={spec.a:g},levels={spec.levels},seed={spec.seed})", "cascade")


def cascade_hurst(a: float, q: QLike) -> np.ndarray:
    """h(q) = 1/q - ln(a^q + (1-a)^q) / (q ln 2)；q = 0 取解析极限 -(ln a + ln(1-a)) / (2 ln 2)"""
    q = np.asarray(q, dtype=float)
    b = 1.0 - a
    limit = -(np.log(a) + np.log(b)) / (2.0 * LN2)
    with np.errstate(divide='ignore', invalid='ignore'):
        h = 1.0 / q - np.log(a ** q + b ** q) / (q * LN2)
    return np.where(q == 0, limit, h)


def cascade_tau(a: float, q: QLike) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    return -np.log(a ** q + (1.0 - a) ** q) / LN2


def cascade_alpha(a: float, q: QLike) -> np.ndarray:
    """α(q) = dτ/dq 的解析式"""
    q = np.asarray(q, dtype=float)
    b = 1.0 - a
    weight = expit(q * np.log(a / b))
    return -(weight * np.log(a) + (1.0 - weight) * np.log(b)) / LN2


def cascade_spectrum_width(a: float, q_grid: Optional[QLike] = None) -> float:
    """解析 Δα；不给网格时取 q → ±∞ 的极限 log2(a / (1-a))"""
    if q_grid is None:
        return float(np.log2(a / (1.0 - a)))
    alpha = cascade_alpha(a, q_grid)
    return float(alpha.max() - alpha.min())


def gaussian_iid(n: int, seed: int) -> ReturnSeries:
    if n < 2:
        raise ConfigurationError(f"gaussian series needs n >= 2, got {n}", n=n)
    rng = np.random.default_rng(seed)
    return _as_returns(rng.standard_normal(n), f"gaussian(seed={seed})", "gaussian")


def student_t_iid(n: int, dof: float, seed: int) -> ReturnSeries:
    if n < 2:
        raise ConfigurationError(f"student-t series needs n >= 2, got {n}", n=n)
    if not dof > 2:
        raise ConfigurationError(f"student-t needs dof > 2 for finite variance, got {dof}", dof=dof)
    rng = np.random.default_rng(seed)
    return _as_returns(rng.standard_t(dof, n), f"student-t(dof={dof:g},seed={seed})", "student-t")


def scale_returns(x: ReturnSeries, factor: float) -> ReturnSeries:
    if not factor > 0:
        raise ConfigurationError(f"return scale must be positive, got {factor}", factor=factor)
    return x.derive(f"scaled({factor:g})", values=x.values * factor)


def to_price_series(x: ReturnSeries, start_price: float = 100.0) -> PriceSeries:
    """把收益积分成价格 P0·exp(cumsum(x))，日期为首个 from_date 加上各收益日期"""
    if not start_price > 0:
        raise ConfigurationError(f"start price must be positive, got {start_price}", start_price=start_price)
    log_path = np.concatenate(([0.0], np.cumsum(x.values)))
    with np.errstate(over='ignore'):
        prices = start_price * np.exp(log_path)
    if not np.all(np.isfinite(prices) & (prices > 0)):
        raise ConfigurationError("integrated prices overflow; lower the return scale", label=x.label)
    return PriceSeries(dates=np.concatenate(([x.from_dates[0]], x.dates)), values=prices, label=x.label)
