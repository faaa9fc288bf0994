# tests/conftest.py
from pathlib import Path

import numpy as np
import pytest

from app.analysis.series import PriceSeries, ReturnSeries
from app.analysis.synth import business_dates
from app.core.config import settings
from app.repositories.price_repository import PriceCsvRepository


@pytest.fixture(autouse=True)
def scan_log(tmp_path, monkeypatch) -> Path:
    """每个用例使用独立的扫描日志文件"""
    path = tmp_path / 'logs' / 'analysis_scan.log'
    monkeypatch.setattr(settings, 'SCAN_LOG_PATH', path)
    return path


def make_returns(values, start='1995-01-02', label='series') -> ReturnSeries:
    values = np.asarray(values, dtype=float)
    days = np.busday_offset(np.datetime64(start, 'D'), np.arange(values.size + 1), roll='forward')
    return ReturnSeries(dates=days[1:], values=values, from_dates=days[:-1], label=label)


def write_price_csv(path: Path, values, start='1991-01-02') -> Path:
    values = np.asarray(values, dtype=float)
    prices = PriceSeries(dates=business_dates(values.size, np.datetime64(start, 'D').item()), values=values,
                         label=path.stem)
    return PriceCsvRepository().save(path, prices)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)
