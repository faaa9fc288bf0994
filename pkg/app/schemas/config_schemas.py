# app/schemas/config_schemas.py
import logging
from datetime import date, timedelta
from enum import Enum
from typing import List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from app.core.exceptions import ConfigurationError

logger = logging.getLogger(__name__)

DEFAULT_THRESHOLDS = [2.0, 3.0, 4.0, 6.0, 8.0, 10.0]
# |q| 较大的端点由少数极值盒子决定，单条序列上噪声大
DEFAULT_SWEEP_Q_WINDOW = 5.0


class Direction(str, Enum):
    """盒子划分方向：仅正向，或正反两向（2·N_s 个盒子）"""
    FORWARD = "forward"
    BOTH = "both"


def log_spaced_scales(scale_min: int, scale_max: int, count: int) -> List[int]:
    raw = np.geomspace(scale_min, scale_max, count)
    return [int(s) for s in np.unique(np.rint(raw).astype(int))]


def regular_q_grid(q_min: float, q_max: float, q_step: float) -> List[float]:
    grid = np.arange(q_min, q_max + q_step / 2, q_step)
    # 取整消除 arange 累积误差，并把 -0.0 规整为 0.0
    return [float(q) + 0.0 for q in np.round(grid, 10)]


class MfdfaConfig(BaseModel):
    """MF-DFA 参数：去趋势阶数、尺度网格、q 网格、盒子方向"""
    model_config = ConfigDict(extra='forbid')

    poly_order: int = Field(2, ge=1, le=4, description="去趋势多项式阶数 m")
    scale_min: int = Field(40, ge=3, description="最小盒子尺度")
    scale_max: int = Field(600, ge=3, description="最大盒子尺度")
    scale_count: int = Field(20, ge=3, description="对数均匀尺度个数（取整去重前）")
    scales: Optional[List[int]] = Field(None, description="显式尺度网格，给定时优先")
    fit_min: Optional[int] = Field(None, description="拟合窗口下界，默认等于 scale_min")
    fit_max: Optional[int] = Field(None, description="拟合窗口上界，默认等于 scale_max")
    q_min: float = -10.0
    q_max: float = 10.0
    q_step: float = Field(0.5, gt=0)
    q_grid: Optional[List[float]] = Field(None, description="显式 q 网格，给定时优先")
    direction: Direction = Direction.BOTH

    @model_validator(mode='after')
    def _resolve_grids(self) -> 'MfdfaConfig':
        if self.scales:
            scales = sorted(set(int(s) for s in self.scales))
            self.scale_min, self.scale_max = scales[0], scales[-1]
        else:
            if self.scale_max < self.scale_min:
                raise ValueError("scale_max must not be smaller than scale_min")
            scales = log_spaced_scales(self.scale_min, self.scale_max, self.scale_count)
        self.scales = scales

        min_allowed = self.poly_order + 2
        too_small = [s for s in scales if s < min_allowed]
        if too_small:
            raise ValueError(
                f"scales {too_small} are too small for poly_order={self.poly_order} (need s >= {min_allowed})"
            )

        if self.fit_min is None:
            self.fit_min = self.scale_min
        if self.fit_max is None:
            self.fit_max = self.scale_max
        if self.fit_max < self.fit_min:
            raise ValueError("fit_max must not be smaller than fit_min")

        if self.q_grid:
            q_grid = sorted(set(float(q) + 0.0 for q in self.q_grid))
        else:
            if self.q_max <= self.q_min:
                raise ValueError("q_max must be greater than q_min")
            q_grid = regular_q_grid(self.q_min, self.q_max, self.q_step)
        if len(q_grid) < 3:
            raise ValueError("q grid needs at least 3 moments")
        self.q_grid = q_grid
        return self

    @property
    def scale_grid(self) -> np.ndarray:
        return np.asarray(self.scales, dtype=int)

    @property
    def q_values(self) -> np.ndarray:
        return np.asarray(self.q_grid, dtype=float)

    def fitted_to(self, length: int) -> 'MfdfaConfig':
        """把尺度网格裁剪到 length // 4 以内，保证每个尺度至少 4 个盒子"""
        limit = length // 4
        if self.scales[-1] <= limit:
            return self

        kept = [s for s in self.scales if s <= limit]
        fit_max = min(self.fit_max, kept[-1])
        if len(kept) < 3 or fit_max < self.fit_min:
            raise ConfigurationError(
                f"series of length {length} supports fewer than 3 scales of the grid",
                length=length,
                largest_allowed_scale=limit,
            )
        logger.warning(
            "Scale grid clipped | length=%s | scale_max=%s -> %s | scales=%s",
            length, self.scales[-1], kept[-1], len(kept),
        )
        payload = self.model_dump()
        payload.update(scales=kept, fit_max=fit_max)
        return MfdfaConfig.model_validate(payload)

    def with_overrides(self, **overrides) -> 'MfdfaConfig':
        """命令行覆盖参数；修改网格边界时丢弃显式网格以重新生成"""
        updates = {key: value for key, value in overrides.items() if value is not None}
        if not updates:
            return self
        payload = self.model_dump()
        if updates.keys() & {'scale_min', 'scale_max', 'scale_count'}:
            payload.update(scales=None, fit_min=None, fit_max=None)
        if updates.keys() & {'q_min', 'q_max', 'q_step'}:
            payload['q_grid'] = None
        payload.update(updates)
        return MfdfaConfig.model_validate(payload)


class PeriodConfig(BaseModel):
    """危机前后分段及剔除窗口（默认剔除 1997 全年）"""
    model_config = ConfigDict(extra='forbid')

    excise_start: date = Field(date(1997, 1, 1), description="剔除窗口起始日（含）")
    excise_end: date = Field(date(1997, 12, 31), description="剔除窗口结束日（含）")

    @model_validator(mode='after')
    def _check_window(self) -> 'PeriodConfig':
        if self.excise_end < self.excise_start:
            raise ValueError("excise_end must not precede excise_start")
        return self

    @property
    def before_end(self) -> date:
        return self.excise_start - timedelta(days=1)

    @property
    def after_start(self) -> date:
        return self.excise_end + timedelta(days=1)


class CascadeSpec(BaseModel):
    """二项乘性级联参数，序列长度为 2**levels"""
    model_config = ConfigDict(extra='forbid')

    levels: int = Field(14, ge=8, le=24)
    a: float = Field(0.75, gt=0.5, lt=1.0)
    seed: int = Field(0, ge=0)


class RunConfig(BaseModel):
    """一次运行的完整配置快照，写入 manifest"""
    model_config = ConfigDict(extra='forbid')

    mfdfa: MfdfaConfig = Field(default_factory=MfdfaConfig)
    periods: PeriodConfig = Field(default_factory=PeriodConfig)
    seed: int = Field(0, ge=0, lt=2 ** 64, description="主随机种子")
    surrogates: int = Field(1, ge=0, description="每个序列的打乱替代样本个数")
    thresholds: List[float] = Field(default_factory=lambda: list(DEFAULT_THRESHOLDS))
    d_f: float = Field(1.0, description="分形支撑维数 D_f")
    excise: bool = Field(False, description="analyze 是否剔除危机窗口")
    sweep_q_window: Optional[float] = Field(
        DEFAULT_SWEEP_Q_WINDOW, gt=0, description="阈值扫描的 Δα 只取 |q| <= 该值的谱点；null 表示整个 q 网格",
    )

    @field_validator('thresholds')
    @classmethod
    def _check_thresholds(cls, value: List[float]) -> List[float]:
        if not value:
            raise ValueError("threshold list must not be empty")
        if any(k <= 0 for k in value):
            raise ValueError("thresholds must be positive")
        if any(b <= a for a, b in zip(value, value[1:])):
            raise ValueError("thresholds must be strictly increasing")
        return value
