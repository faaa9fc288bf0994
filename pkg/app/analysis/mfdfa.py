# app/analysis/mfdfa.py
"""MF-DFA 引擎：分盒、盒内多项式去趋势、q 阶波动函数、双对数回归求 h(q)。"""
import logging
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from numpy.polynomial import polynomial
from scipy import stats
from scipy.special import logsumexp

from app.analysis.series import Profile, ReturnSeries, build_profile
from app.core.exceptions import ConfigurationError, DegenerateBoxError, DegenerateSeriesError, InputDataError
from app.schemas.config_schemas import Direction, MfdfaConfig

logger = logging.getLogger(__name__)

# 盒内残差 RMS 不超过盒内最大 |y| 的该比例时视为精确多项式，F2 记为 0
DEGENERATE_RTOL = 1e-10

SeriesLike = Union[ReturnSeries, Sequence[float], np.ndarray]


@dataclass(frozen=True, eq=False)
class FluctuationSurface:
    """F_q(s) 网格，values 形状为 (尺度数, q 数)"""
    scales: np.ndarray
    q_grid: np.ndarray
    values: np.ndarray
    boxes_used: np.ndarray
    poly_order: int
    direction: Direction

    def to_frame(self) -> pd.DataFrame:
        scale_col, q_col = np.meshgrid(self.scales, self.q_grid, indexing='ij')
        return pd.DataFrame({
            'scale': scale_col.ravel(),
            'q': q_col.ravel(),
            'F_q': self.values.ravel(),
        })


@dataclass(frozen=True, eq=False)
class HurstCurve:
    """广义 Hurst 指数 h(q) 及每个 q 的拟合诊断"""
    q_grid: np.ndarray
    h: np.ndarray
    h_stderr: np.ndarray
    r_squared: np.ndarray
    intercept: np.ndarray
    fit_scales: np.ndarray

    @property
    def h2(self) -> Optional[float]:
        """q = 2 时即标准 DFA 指数"""
        hits = np.flatnonzero(np.isclose(self.q_grid, 2.0))
        return float(self.h[hits[0]]) if hits.size else None


def _profile_values(profile: Union[Profile, np.ndarray, Sequence[float]]) -> np.ndarray:
    if isinstance(profile, Profile):
        return profile.values
    return np.asarray(profile, dtype=float)


def _segment(values: np.ndarray, s: int, direction: Direction) -> np.ndarray:
    n_boxes = values.size // s
    boxes = values[: n_boxes * s].reshape(n_boxes, s)
    if direction is Direction.BOTH:
        # 从序列末端倒数的 N_s 个盒子，覆盖正向划分丢弃的尾部
        tail = values[values.size - n_boxes * s:].reshape(n_boxes, s)[::-1]
        boxes = np.concatenate([boxes, tail])
    return boxes


def box_fluctuations(
        profile: Union[Profile, np.ndarray, Sequence[float]],
        s: int,
        m: int,
        direction: Union[Direction, str] = Direction.FORWARD,
) -> np.ndarray:
    """每个盒子内 m 阶最小二乘去趋势后的均方残差 F2(s, v)"""
    s, m = int(s), int(m)
    direction = Direction(direction)
    if m < 0:
        raise ConfigurationError(f"detrending order must be non-negative, got {m}", poly_order=m)
    if s < m + 2:
        raise ConfigurationError(
            f"scale {s} too small for detrending order {m} (need s >= {m + 2})",
            scale=s,
            poly_order=m,
        )

    values = _profile_values(profile)
    if values.size // s < 1:
        raise ConfigurationError(f"scale {s} exceeds profile length {values.size}", scale=s, length=int(values.size))

    boxes = _segment(values, s, direction)
    # 盒内坐标映射到 [-1, 1]，残差不受仿射变换影响且条件数更好
    vander = polynomial.polyvander(np.linspace(-1.0, 1.0, s), m)
    coef, *_ = np.linalg.lstsq(vander, boxes.T, rcond=None)
    residuals = boxes - (vander @ coef).T
    f2 = np.mean(residuals ** 2, axis=1)

    peak = np.max(np.abs(boxes), axis=1)
    f2[np.sqrt(f2) <= DEGENERATE_RTOL * peak] = 0.0
    return f2


def _q_moment(f2: np.ndarray, q: float, scale: int) -> float:
    if q <= 0:
        zero = np.flatnonzero(f2 == 0)
        if zero.size:
            raise DegenerateBoxError(scale=int(scale), box=int(zero[0]) + 1, q=float(q))
    elif not np.any(f2 > 0):
        raise DegenerateSeriesError(f"every box has zero fluctuation at scale {scale}", scale=int(scale))

    with np.errstate(divide='ignore'):
        log_f2 = np.log(f2)

    if q == 0:
        return float(np.exp(0.5 * np.mean(log_f2)))
    # 对数域求和，避免 |q| 较大时 F2^{q/2} 溢出
    log_mean = logsumexp(0.5 * q * log_f2) - np.log(f2.size)
    return float(np.exp(log_mean / q))


def fluctuation_function(
        profile: Union[Profile, np.ndarray, Sequence[float]],
        s: int,
        q: float,
        m: int,
        direction: Union[Direction, str] = Direction.FORWARD,
) -> float:
    """q 阶波动函数 F_q(s)；q = 0 取对数平均"""
    return _q_moment(box_fluctuations(profile, s, m, direction), float(q), s)


def hurst_exponents(x: SeriesLike, cfg: MfdfaConfig) -> Tuple[FluctuationSurface, HurstCurve]:
    values = x.values if isinstance(x, ReturnSeries) else np.asarray(x, dtype=float)
    if values.size == 0:
        raise InputDataError("cannot analyse an empty series")

    scales = np.unique(cfg.scale_grid)
    q_grid = np.unique(cfg.q_values)
    if values.size < 4 * scales[-1]:
        raise ConfigurationError(
            f"series length {values.size} is shorter than 4 x largest scale {scales[-1]}",
            length=int(values.size),
            scale_max=int(scales[-1]),
        )
    if np.ptp(values) == 0:
        raise DegenerateSeriesError("degenerate series (zero variance)")

    profile = build_profile(values)
    surface = np.empty((scales.size, q_grid.size))
    boxes_used = np.empty(scales.size, dtype=int)
    for i, s in enumerate(scales):
        f2 = box_fluctuations(profile, s, cfg.poly_order, cfg.direction)
        boxes_used[i] = f2.size
        degenerate = int(np.count_nonzero(f2 == 0))
        if degenerate:
            logger.warning("Degenerate boxes | scale=%s | count=%s of %s", s, degenerate, f2.size)
        for j, q in enumerate(q_grid):
            surface[i, j] = _q_moment(f2, q, s)

    window = (scales >= cfg.fit_min) & (scales <= cfg.fit_max)
    if np.count_nonzero(window) < 3:
        raise ConfigurationError(
            f"fewer than 3 scales inside the fit window [{cfg.fit_min}, {cfg.fit_max}]",
            fit_min=cfg.fit_min,
            fit_max=cfg.fit_max,
        )

    log_s = np.log(scales[window])
    h = np.empty(q_grid.size)
    h_stderr = np.empty(q_grid.size)
    r_squared = np.empty(q_grid.size)
    intercept = np.empty(q_grid.size)
    for j in range(q_grid.size):
        fit = stats.linregress(log_s, np.log(surface[window, j]))
        h[j], h_stderr[j], intercept[j] = fit.slope, fit.stderr, fit.intercept
        r_squared[j] = fit.rvalue ** 2

    if not np.all(np.isfinite(h)):
        raise DegenerateSeriesError("non-finite Hurst exponent in log-log fit")

    fluctuation = FluctuationSurface(
        scales=scales,
        q_grid=q_grid,
        values=surface,
        boxes_used=boxes_used,
        poly_order=cfg.poly_order,
        direction=cfg.direction,
    )
    curve = HurstCurve(
        q_grid=q_grid,
        h=h,
        h_stderr=h_stderr,
        r_squared=r_squared,
        intercept=intercept,
        fit_scales=scales[window],
    )
    return fluctuation, curve
