# app/analysis/series.py
"""时间序列数据模型与分析前变换：对数收益、轮廓、打乱替代样本、阈值过滤、危机前后分段。

所有值在构造后只读，函数均为纯函数（随机性只来自显式种子）。
"""
import logging
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from app.core.exceptions import ConfigurationError, DegenerateSeriesError, InputDataError
from app.schemas.config_schemas import PeriodConfig

logger = logging.getLogger(__name__)

ORIGINAL = "original"
ONE_DAY = np.timedelta64(1, 'D')


def _readonly(values, dtype) -> np.ndarray:
    array = np.array(values, dtype=dtype)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class PriceSeries:
    """日频汇率 P(t)：日期严格递增（允许缺口），价格为正"""
    dates: np.ndarray
    values: np.ndarray
    label: str = "series"

    def __post_init__(self):
        dates = _readonly(self.dates, 'datetime64[D]')
        values = _readonly(self.values, float)
        if dates.ndim != 1 or dates.shape != values.shape:
            raise InputDataError("dates and values must be 1-D arrays of equal length", label=self.label)
        if values.size < 2:
            raise InputDataError("price series needs at least 2 observations", label=self.label)

        out_of_order = np.flatnonzero(np.diff(dates) <= np.timedelta64(0, 'D'))
        if out_of_order.size:
            bad = dates[out_of_order[0] + 1]
            raise InputDataError(f"dates must be strictly increasing (at {bad})", label=self.label, date=str(bad))

        invalid = np.flatnonzero(~(np.isfinite(values) & (values > 0)))
        if invalid.size:
            index = invalid[0]
            raise InputDataError(
                f"non-positive or non-finite price {values[index]!r} on {dates[index]}",
                label=self.label,
                date=str(dates[index]),
            )

        object.__setattr__(self, 'dates', dates)
        object.__setattr__(self, 'values', values)

    def __len__(self) -> int:
        return int(self.values.size)


@dataclass(frozen=True, eq=False)
class ReturnSeries:
    """对数收益 x(i)。dates 为较晚的那天，from_dates 为较早价格所在日期"""
    dates: np.ndarray
    values: np.ndarray
    lineage: Tuple[str, ...] = (ORIGINAL,)
    from_dates: Optional[np.ndarray] = None
    label: str = "series"

    def __post_init__(self):
        dates = _readonly(self.dates, 'datetime64[D]')
        values = _readonly(self.values, float)
        if dates.ndim != 1 or dates.shape != values.shape:
            raise InputDataError("dates and values must be 1-D arrays of equal length", label=self.label)
        if values.size == 0:
            raise InputDataError("return series is empty", label=self.label)
        if not np.all(np.isfinite(values)):
            index = int(np.flatnonzero(~np.isfinite(values))[0])
            raise InputDataError(f"non-finite return on {dates[index]}", label=self.label, date=str(dates[index]))

        if self.from_dates is None:
            from_dates = np.concatenate(([dates[0] - ONE_DAY], dates[:-1]))
        else:
            from_dates = self.from_dates
        from_dates = _readonly(from_dates, 'datetime64[D]')
        if from_dates.shape != dates.shape:
            raise InputDataError("from_dates must align with dates", label=self.label)

        object.__setattr__(self, 'dates', dates)
        object.__setattr__(self, 'values', values)
        object.__setattr__(self, 'from_dates', from_dates)
        object.__setattr__(self, 'lineage', tuple(self.lineage))

    def __len__(self) -> int:
        return int(self.values.size)

    @property
    def meta(self) -> str:
        return self.lineage[-1]

    def derive(self, tag: str, values: Optional[np.ndarray] = None, mask: Optional[np.ndarray] = None) -> 'ReturnSeries':
        """按掩码截取或替换取值，生成带新来源标签的序列"""
        dates, from_dates = self.dates, self.from_dates
        new_values = self.values if values is None else values
        if mask is not None:
            dates, from_dates, new_values = dates[mask], from_dates[mask], new_values[mask]
        return ReturnSeries(
            dates=dates,
            values=new_values,
            lineage=self.lineage + (tag,),
            from_dates=from_dates,
            label=self.label,
        )


@dataclass(frozen=True, eq=False)
class Profile:
    """轮廓 y(i) = Σ (x(k) - x̄)"""
    values: np.ndarray
    source_mean: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, 'values', _readonly(self.values, float))

    def __len__(self) -> int:
        return int(self.values.size)


def log_returns(prices: PriceSeries) -> ReturnSeries:
    values = prices.values
    invalid = np.flatnonzero(~(values > 0))
    if invalid.size:
        date = prices.dates[invalid[0]]
        raise InputDataError(f"non-positive price on {date}", label=prices.label, date=str(date))

    return ReturnSeries(
        dates=prices.dates[1:],
        values=np.diff(np.log(values)),
        lineage=(ORIGINAL,),
        from_dates=prices.dates[:-1],
        label=prices.label,
    )


def build_profile(x: Union[ReturnSeries, Sequence[float], np.ndarray]) -> Profile:
    values = x.values if isinstance(x, ReturnSeries) else np.asarray(x, dtype=float)
    if values.size == 0:
        raise InputDataError("cannot build a profile from an empty series")
    mean = float(values.mean())
    return Profile(values=np.cumsum(values - mean), source_mean=mean)


def shuffle_surrogate(x: ReturnSeries, seed: int) -> ReturnSeries:
    """随机打乱取值顺序（保持分布、破坏时间相关），同一种子结果一致"""
    rng = np.random.default_rng(seed)
    permutation = rng.permutation(len(x))
    return x.derive(f"surrogate(seed={seed})", values=x.values[permutation])


def exceedance_mask(x: ReturnSeries, k: float) -> np.ndarray:
    """|x(i)| > k·σ 的位置，σ 为输入序列的样本标准差"""
    if not k > 0:
        raise ConfigurationError(f"threshold k must be positive, got {k!r}", k=k)
    if len(x) < 3:
        raise InputDataError("threshold filtering needs at least 3 points", label=x.label)
    sigma = float(np.std(x.values, ddof=1))
    return np.abs(x.values) > k * sigma


def threshold_filter(x: ReturnSeries, k: float) -> ReturnSeries:
    """剔除超过 k 倍标准差的收益，按下标线性插值补齐；两端沿用最近保留值"""
    eliminated = exceedance_mask(x, k)
    if eliminated.all():
        raise DegenerateSeriesError(f"threshold k={k:g} eliminates every point", label=x.label, k=k)

    values = x.values.copy()
    if eliminated.any():
        index = np.arange(values.size)
        kept = ~eliminated
        # np.interp 在两端外推时取最近的保留值
        values[eliminated] = np.interp(index[eliminated], index[kept], x.values[kept])
        logger.debug("Threshold filter | label=%s | k=%g | eliminated=%s", x.label, k, int(eliminated.sum()))
    return x.derive(f"threshold-filtered(k={k:g})", values=values)


def _period_masks(x: ReturnSeries, periods: PeriodConfig) -> Tuple[np.ndarray, np.ndarray]:
    before_end = np.datetime64(periods.before_end, 'D')
    after_start = np.datetime64(periods.after_start, 'D')
    before = x.dates <= before_end
    # 跨越剔除窗口的那一笔收益两边都不归
    after = x.from_dates >= after_start
    return before, after


def split_periods(x: ReturnSeries, periods: Optional[PeriodConfig] = None) -> Tuple[ReturnSeries, ReturnSeries]:
    """拆分为危机前 (DATA A) 与危机后 (DATA B) 两段，剔除窗口内的数据不进入任何一段"""
    periods = periods or PeriodConfig()
    before, after = _period_masks(x, periods)

    empty = [name for name, mask in (('before', before), ('after', after)) if not mask.any()]
    if empty:
        raise InputDataError(
            f"empty sub-period: {', '.join(empty)}",
            label=x.label,
            empty=empty,
            excise_start=str(periods.excise_start),
            excise_end=str(periods.excise_end),
        )

    return x.derive("period(before)", mask=before), x.derive("period(after)", mask=after)


def excise(x: ReturnSeries, periods: Optional[PeriodConfig] = None) -> ReturnSeries:
    """去掉剔除窗口后的整段序列（A 段接 B 段）"""
    periods = periods or PeriodConfig()
    before, after = _period_masks(x, periods)
    keep = before | after
    if not keep.any():
        raise InputDataError("series lies entirely inside the excision window", label=x.label)
    return x.derive(f"excised({periods.excise_start}..{periods.excise_end})", mask=keep)
