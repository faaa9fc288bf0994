# app/repositories/price_repository.py
import hashlib
import logging
from pathlib import Path
from typing import Optional

import numpy as np
import pandas as pd

from app.analysis.series import PriceSeries
from app.core.exceptions import InputDataError
from app.repositories.base import BaseRepository, PathLike

logger = logging.getLogger(__name__)

REQUIRED_COLUMNS = ['date', 'rate']
# H.10 发布数据以 ND 表示当日无报价
MISSING_TOKENS = {'', 'ND', 'NA', 'N/A', 'NaN', 'nan'}


def file_digest(path: PathLike) -> str:
    digest = hashlib.sha256()
    with open(path, 'rb') as handle:
        for chunk in iter(lambda: handle.read(1 << 16), b''):
            digest.update(chunk)
    return digest.hexdigest()


def _parse_rate(raw: str) -> float:
    try:
        return float(raw)
    except ValueError:
        return np.nan


class PriceCsvRepository(BaseRepository[PriceSeries]):
    """`date,rate` 格式的日频汇率 CSV 读写"""

    def load(self, path: PathLike, label: Optional[str] = None, **_) -> PriceSeries:
        source = Path(path)
        if not source.is_file():
            raise InputDataError(f"input file not found: {source}", path=str(source))

        try:
            frame = pd.read_csv(source, dtype=str, keep_default_na=False, skipinitialspace=True)
        except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as exc:
            raise InputDataError(f"cannot parse CSV: {exc}", path=str(source)) from exc

        columns = [str(column).strip().lower() for column in frame.columns]
        if columns != REQUIRED_COLUMNS:
            raise InputDataError(
                f"expected header 'date,rate', got '{','.join(map(str, frame.columns))}'",
                path=str(source),
                line=1,
            )
        frame.columns = columns

        # 数据行从文件第 2 行开始
        line_numbers = np.arange(len(frame)) + 2
        raw_rates = frame['rate'].str.strip()
        missing = raw_rates.isin(MISSING_TOKENS).to_numpy()
        rates = raw_rates.map(_parse_rate).to_numpy(dtype=float)

        unparseable = ~missing & np.isnan(rates)
        if unparseable.any():
            index = int(np.flatnonzero(unparseable)[0])
            raise InputDataError(
                f"unparseable rate {raw_rates.iloc[index]!r}",
                path=str(source),
                line=int(line_numbers[index]),
            )

        skipped = missing | (rates == 0)
        if skipped.any():
            logger.warning("Skipped rows | path=%s | empty_or_zero_rate=%s", source, int(skipped.sum()))

        kept = ~skipped
        dates = pd.to_datetime(frame['date'].str.strip(), format='ISO8601', errors='coerce')
        bad_dates = kept & dates.isna().to_numpy()
        if bad_dates.any():
            index = int(np.flatnonzero(bad_dates)[0])
            raise InputDataError(
                f"invalid ISO-8601 date {frame['date'].iloc[index]!r}",
                path=str(source),
                line=int(line_numbers[index]),
            )

        day_values = dates[kept].to_numpy().astype('datetime64[D]')
        rate_values = rates[kept]
        kept_lines = line_numbers[kept]

        negative = np.flatnonzero(rate_values < 0)
        if negative.size:
            index = int(negative[0])
            raise InputDataError(
                f"non-positive rate {rate_values[index]!r} on {day_values[index]}",
                path=str(source),
                line=int(kept_lines[index]),
                date=str(day_values[index]),
            )

        out_of_order = np.flatnonzero(np.diff(day_values) <= np.timedelta64(0, 'D'))
        if out_of_order.size:
            index = int(out_of_order[0]) + 1
            raise InputDataError(
                f"dates must be strictly increasing (at {day_values[index]})",
                path=str(source),
                line=int(kept_lines[index]),
                date=str(day_values[index]),
            )

        try:
            series = PriceSeries(dates=day_values, values=rate_values, label=label or source.stem)
        except InputDataError as exc:
            exc.detail.setdefault('path', str(source))
            raise
        logger.info("Prices loaded | path=%s | rows=%s | skipped=%s", source, len(series), int(skipped.sum()))
        return series

    def save(self, path: PathLike, obj: PriceSeries) -> Path:
        target = self._prepare(path)
        frame = pd.DataFrame({
            'date': np.datetime_as_string(obj.dates, unit='D'),
            'rate': obj.values,
        })
        # %.17g 保证浮点数读回后逐位一致
        frame.to_csv(target, index=False, float_format='%.17g', lineterminator='\n')
        return target
