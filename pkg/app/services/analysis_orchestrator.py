# app/services/analysis_orchestrator.py
import asyncio
import logging
from typing import Awaitable, List, Optional

import numpy as np

from app.analysis.multifractal_analyzer import MultifractalAnalyzer, SeriesAnalysis, grid_stamp
from app.analysis.series import (
    ReturnSeries,
    excise,
    exceedance_mask,
    shuffle_surrogate,
    split_periods,
    threshold_filter,
)
from app.analysis.spectrum import windowed_delta_alpha
from app.core.config import settings
from app.schemas.analysis_schemas import ThresholdSweepReport, ThresholdSweepRow
from app.schemas.config_schemas import RunConfig

logger = logging.getLogger(__name__)


class AnalysisOrchestrator:
    """分析协调器：并发执行各分析单元，结果按提交顺序汇总"""

    def __init__(self, config: RunConfig, max_workers: Optional[int] = None):
        self.config = config
        self.analyzer = MultifractalAnalyzer(config.mfdfa, d_f=config.d_f)
        self._slots = asyncio.Semaphore(max_workers or settings.MAX_WORKERS)

    def surrogate_seeds(self, count: Optional[int] = None) -> List[int]:
        """由主种子派生每个替代样本的独立种子"""
        count = self.config.surrogates if count is None else count
        children = np.random.SeedSequence(self.config.seed).spawn(count)
        return [int(child.generate_state(1, dtype=np.uint64)[0]) for child in children]

    async def _run(self, series: ReturnSeries, role: str, replicate: Optional[int] = None) -> SeriesAnalysis:
        async with self._slots:
            return await self.analyzer.analyze(series, role=role, replicate=replicate)

    def _with_surrogates(self, series: ReturnSeries, role: str, surrogate_role: str,
                         seeds: List[int]) -> List[Awaitable[SeriesAnalysis]]:
        jobs = [self._run(series, role)]
        numbered = len(seeds) > 1
        for index, seed in enumerate(seeds, start=1):
            jobs.append(self._run(shuffle_surrogate(series, seed), surrogate_role, index if numbered else None))
        return jobs

    async def analyze_whole(self, series: ReturnSeries) -> List[SeriesAnalysis]:
        """原始序列及其打乱替代样本"""
        jobs = self._with_surrogates(series, 'original', 'surrogate', self.surrogate_seeds())
        return list(await asyncio.gather(*jobs))

    async def analyze_split(self, series: ReturnSeries) -> List[SeriesAnalysis]:
        """剔除危机窗口后的整段、危机前、危机后三组分析，每组附带替代样本"""
        seeds = self.surrogate_seeds()
        whole = excise(series, self.config.periods)
        before, after = split_periods(series, self.config.periods)
        logger.info(
            "Period split | label=%s | whole=%s | before=%s | after=%s",
            series.label, len(whole), len(before), len(after),
        )
        jobs = (
            self._with_surrogates(whole, 'original', 'surrogate', seeds)
            + self._with_surrogates(before, 'before', 'before-surrogate', seeds)
            + self._with_surrogates(after, 'after', 'after-surrogate', seeds)
        )
        return list(await asyncio.gather(*jobs))

    async def threshold_sweep(self, series: ReturnSeries) -> ThresholdSweepReport:
        """对每个阈值 k，分别过滤原始序列与（过滤前打乱的）替代序列后求 Δα

        替代列取 max(surrogates, 1) 个替代样本的均值；Δα 只在 |q| <= sweep_q_window 的谱点上计算。
        """
        seeds = self.surrogate_seeds(max(self.config.surrogates, 1))
        shuffled = [shuffle_surrogate(series, seed) for seed in seeds]
        thresholds = list(self.config.thresholds)
        window = self.config.sweep_q_window

        jobs = []
        for k in thresholds:
            jobs.append(self._run(threshold_filter(series, k), f"filtered(k={k:g})"))
            jobs.extend(self._run(threshold_filter(surrogate, k), f"filtered-surrogate(k={k:g})")
                        for surrogate in shuffled)
        results = await asyncio.gather(*jobs)

        stride = 1 + len(shuffled)
        rows = []
        for index, k in enumerate(thresholds):
            block = results[index * stride:(index + 1) * stride]
            original = windowed_delta_alpha(block[0].spectrum, window)
            widths = np.array([windowed_delta_alpha(analysis.spectrum, window) for analysis in block[1:]])
            rows.append(ThresholdSweepRow(
                k_sigma=float(k),
                delta_alpha_original=original,
                delta_alpha_surrogate=float(widths.mean()),
                delta_alpha_surrogate_std=float(widths.std(ddof=1)) if widths.size > 1 else 0.0,
                eliminated_original=int(exceedance_mask(series, k).sum()),
                eliminated_surrogate=int(exceedance_mask(shuffled[0], k).sum()),
            ))
            logger.info(
                "Threshold sweep | label=%s | k=%g | delta_alpha=%.4f | surrogate=%.4f | replicates=%s",
                series.label, k, original, rows[-1].delta_alpha_surrogate, widths.size,
            )

        # 所有阈值共用同一网格（按序列长度裁剪一次）
        return ThresholdSweepReport(
            market=series.label,
            surrogate_seeds=seeds,
            q_window=window,
            grid=grid_stamp(results[0].config),
            rows=rows,
        )
