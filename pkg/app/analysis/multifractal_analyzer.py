# app/analysis/multifractal_analyzer.py
import asyncio
import logging
from dataclasses import dataclass
from typing import Dict, Optional

import numpy as np
import pandas as pd

from app.analysis.base import BaseAnalyzer
from app.analysis.mfdfa import FluctuationSurface, HurstCurve, hurst_exponents
from app.analysis.series import ReturnSeries
from app.analysis.spectrum import SingularitySpectrum, TauCurve, analyze_spectrum, tau_nonlinearity
from app.schemas.analysis_schemas import (
    FluctuationReport,
    GridStamp,
    HurstReport,
    SeriesAnalysisReport,
    SpectrumReport,
)
from app.schemas.config_schemas import MfdfaConfig

logger = logging.getLogger(__name__)


def grid_stamp(cfg: MfdfaConfig) -> GridStamp:
    return GridStamp(
        poly_order=cfg.poly_order,
        direction=cfg.direction.value,
        scales=list(cfg.scales),
        fit_min=cfg.fit_min,
        fit_max=cfg.fit_max,
        q_grid=list(cfg.q_grid),
    )


def _floats(values: np.ndarray) -> list:
    return [float(v) for v in values]


@dataclass(frozen=True, eq=False)
class SeriesAnalysis:
    """一条序列从 F_q(s) 到 f(α) 的完整结果"""
    role: str
    series: ReturnSeries
    config: MfdfaConfig
    surface: FluctuationSurface
    hurst: HurstCurve
    tau: TauCurve
    spectrum: SingularitySpectrum
    replicate: Optional[int] = None

    @property
    def delta_alpha(self) -> float:
        return self.spectrum.delta_alpha

    @property
    def stem(self) -> str:
        stem = f"{self.series.label}_{self.role}"
        return stem if self.replicate is None else f"{stem}_{self.replicate:02d}"

    def returns_frame(self) -> pd.DataFrame:
        """实际进入分析的收益序列 x(i)，日期为收益的较晚一天"""
        return pd.DataFrame({
            'date': np.datetime_as_string(self.series.dates, unit='D'),
            'x': self.series.values,
        })

    def hurst_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            'q': self.hurst.q_grid,
            'h': self.hurst.h,
            'h_stderr': self.hurst.h_stderr,
            'h_r2': self.hurst.r_squared,
            'tau': self.tau.tau,
        })

    def spectrum_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            'q': self.spectrum.q,
            'alpha': self.spectrum.alpha,
            'f_alpha': self.spectrum.f,
        })

    def tables(self) -> Dict[str, pd.DataFrame]:
        """按图组织的 TSV 数据，键为文件名后缀"""
        return {
            'returns': self.returns_frame(),
            'hurst': self.hurst_frame(),
            'spectrum': self.spectrum_frame(),
            'fluctuation': self.surface.to_frame(),
        }

    def to_report(self) -> SeriesAnalysisReport:
        apex_alpha, apex_f = self.spectrum.apex
        return SeriesAnalysisReport(
            label=self.series.label,
            role=self.role if self.replicate is None else f"{self.role}-{self.replicate:02d}",
            provenance=list(self.series.lineage),
            n_points=len(self.series),
            start_date=str(self.series.dates[0]),
            end_date=str(self.series.dates[-1]),
            grid=grid_stamp(self.config),
            hurst=HurstReport(
                q=_floats(self.hurst.q_grid),
                h=_floats(self.hurst.h),
                h_stderr=_floats(self.hurst.h_stderr),
                h_r2=_floats(self.hurst.r_squared),
                tau=_floats(self.tau.tau),
                h2=self.hurst.h2,
                tau_nonlinearity=tau_nonlinearity(self.tau),
            ),
            spectrum=SpectrumReport(
                q=_floats(self.spectrum.q),
                alpha=_floats(self.spectrum.alpha),
                f_alpha=_floats(self.spectrum.f),
                alpha_min=self.spectrum.alpha_min,
                alpha_max=self.spectrum.alpha_max,
                delta_alpha=self.spectrum.delta_alpha,
                apex_alpha=apex_alpha,
                apex_f=apex_f,
            ),
            fluctuation=FluctuationReport(
                scales=[int(s) for s in self.surface.scales],
                q=_floats(self.surface.q_grid),
                boxes_used=[int(n) for n in self.surface.boxes_used],
                values=[_floats(row) for row in self.surface.values],
            ),
        )


class MultifractalAnalyzer(BaseAnalyzer):
    """MF-DFA → τ(q) → f(α) 全链路分析器"""

    def __init__(self, config: MfdfaConfig, d_f: float = 1.0, fit_to_length: bool = True):
        self.config = config
        self.d_f = d_f
        self.fit_to_length = fit_to_length

    def run(self, series: ReturnSeries, role: str = 'original', replicate: Optional[int] = None) -> SeriesAnalysis:
        cfg = self.config.fitted_to(len(series)) if self.fit_to_length else self.config
        surface, hurst = hurst_exponents(series, cfg)
        tau, spectrum = analyze_spectrum(hurst, self.d_f)
        h2 = hurst.h2
        logger.info(
            "MF-DFA | label=%s | role=%s | n=%s | h2=%s | delta_alpha=%.4f",
            series.label, role, len(series), 'n/a' if h2 is None else f"{h2:.4f}", spectrum.delta_alpha,
        )
        return SeriesAnalysis(
            role=role,
            series=series,
            config=cfg,
            surface=surface,
            hurst=hurst,
            tau=tau,
            spectrum=spectrum,
            replicate=replicate,
        )

    async def analyze(self, series: ReturnSeries, role: str = 'original', replicate: Optional[int] = None,
                      **_) -> SeriesAnalysis:
        return await asyncio.to_thread(self.run, series, role, replicate)
