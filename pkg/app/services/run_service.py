# app/services/run_service.py
"""子命令工作流：读入 CSV、调度分析、写出 report.json / manifest.json 与各图 TSV。"""
import asyncio
import logging
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Awaitable, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from pydantic import ValidationError

from app.analysis.multifractal_analyzer import SeriesAnalysis
from app.analysis.series import ReturnSeries, excise, log_returns
from app.analysis.spectrum import AFTER, BEFORE, ORIGINAL, SURROGATE, comparison_table
from app.analysis.synth import binomial_cascade, gaussian_iid, scale_returns, student_t_iid, to_price_series
from app.core.config import settings
from app.core.exceptions import ConfigurationError, MultifractalError
from app.repositories.price_repository import PriceCsvRepository, file_digest
from app.repositories.report_repository import ReportRepository
from app.schemas.analysis_schemas import ComparisonTable, MarketReport, ThresholdSweepReport
from app.schemas.config_schemas import CascadeSpec, RunConfig
from app.schemas.run_schemas import InputRecord, RunManifest, RunReport, SynthKind, SynthRequest, UnitFailure
from app.services.analysis_orchestrator import AnalysisOrchestrator
from app.services.scan_log import write_scan_log

logger = logging.getLogger(__name__)

# pandas 能解析的最后一天
LAST_CALENDAR_DAY = np.datetime64('9999-12-31', 'D')


@dataclass
class MarketResult:
    """单个市场（一个输入文件）的分析结果"""
    label: str
    analyses: List[SeriesAnalysis] = field(default_factory=list)
    sweep: Optional[ThresholdSweepReport] = None


def table_entries(analyses: Sequence[SeriesAnalysis]) -> Dict[str, object]:
    """按角色整理成对比表所需的 after / before / original / surrogate 条目"""
    entries: Dict[str, object] = {}
    surrogates = []
    for analysis in analyses:
        if analysis.role == 'surrogate':
            surrogates.append(analysis.spectrum)
        elif analysis.role in (AFTER, BEFORE, ORIGINAL):
            entries[analysis.role] = analysis.spectrum
    if surrogates:
        entries[SURROGATE] = surrogates
    return entries


def _input_labels(paths: Sequence[str]) -> List[Tuple[str, Path]]:
    labelled: Dict[str, Path] = {}
    for raw in paths:
        path = Path(raw)
        if path.stem in labelled:
            raise ConfigurationError(
                f"duplicate market label '{path.stem}' ({labelled[path.stem]} and {path})",
                label=path.stem,
            )
        labelled[path.stem] = path
    return sorted(labelled.items())


class RunService:
    """按子命令组织一次运行：读入、分析、写出结果与 manifest"""

    def __init__(self, config: RunConfig, out_dir: Path, command: str):
        self.config = config
        self.command = command
        self.out_dir = Path(out_dir)
        self.prices = PriceCsvRepository()
        self.reports = ReportRepository(self.out_dir)
        self.orchestrator = AnalysisOrchestrator(config)

    # ---- 子命令 -------------------------------------------------------

    async def analyze(self, paths: Sequence[str]) -> RunReport:
        return await self._execute(paths, self._analyze_market)

    async def split(self, paths: Sequence[str]) -> RunReport:
        if self.config.surrogates < 1:
            raise ConfigurationError("split needs at least one surrogate replicate", surrogates=self.config.surrogates)
        return await self._execute(paths, self._split_market)

    async def threshold_sweep(self, paths: Sequence[str]) -> RunReport:
        return await self._execute(paths, self._sweep_market)

    def synth(self, request: SynthRequest) -> RunReport:
        series = self._generate(request)
        label = request.label or series.label
        prices = to_price_series(series, request.start_price)
        if prices.dates[-1] > LAST_CALENDAR_DAY:
            raise ConfigurationError(
                f"synthetic series of {len(prices)} business days runs past year 9999",
                length=len(prices),
            )

        target = self.prices.save(self.out_dir / f"{label}.csv", prices)
        manifest = self._manifest([], parameters=request.model_dump(mode='json'))
        report = RunReport(
            manifest_id=manifest.manifest_id,
            tool=manifest.tool,
            version=manifest.version,
            command=self.command,
            outputs=[target.name],
        )
        self._write_envelope(manifest, report)
        logger.info("Synthetic series written | kind=%s | path=%s | rows=%s", request.kind.value, target, len(prices))
        return report

    # ---- 单个市场 -----------------------------------------------------

    def _returns(self, label: str, path: Path) -> ReturnSeries:
        return log_returns(self.prices.load(path, label=label))

    async def _analyze_market(self, label: str, path: Path) -> MarketResult:
        series = self._returns(label, path)
        if self.config.excise:
            series = excise(series, self.config.periods)
        return MarketResult(label=label, analyses=await self.orchestrator.analyze_whole(series))

    async def _split_market(self, label: str, path: Path) -> MarketResult:
        return MarketResult(label=label, analyses=await self.orchestrator.analyze_split(self._returns(label, path)))

    async def _sweep_market(self, label: str, path: Path) -> MarketResult:
        return MarketResult(label=label, sweep=await self.orchestrator.threshold_sweep(self._returns(label, path)))

    # ---- 运行骨架 -----------------------------------------------------

    async def _execute(self, paths: Sequence[str], unit: Callable[[str, Path], Awaitable[MarketResult]]) -> RunReport:
        inputs = _input_labels(paths)
        manifest = self._manifest(inputs)

        outcomes = await asyncio.gather(*(unit(label, path) for label, path in inputs), return_exceptions=True)

        results: List[MarketResult] = []
        failures: List[UnitFailure] = []
        for (label, _), outcome in zip(inputs, outcomes):
            if isinstance(outcome, MultifractalError):
                logger.error("Analysis failed | label=%s | error=%s | %s", label, outcome.error, outcome.message)
                failures.append(UnitFailure(
                    label=label,
                    error=outcome.error,
                    message=outcome.message,
                    exit_code=outcome.exit_code,
                ))
            elif isinstance(outcome, BaseException):
                raise outcome
            else:
                results.append(outcome)

        table = None
        if self.command == 'split' and results:
            table = comparison_table({result.label: table_entries(result.analyses) for result in results})

        outputs = self._write_results(results, table, manifest.manifest_id)
        report = RunReport(
            manifest_id=manifest.manifest_id,
            tool=manifest.tool,
            version=manifest.version,
            command=self.command,
            outputs=outputs,
            markets=[
                MarketReport(market=result.label, analyses=[a.to_report() for a in result.analyses])
                for result in results if result.analyses
            ],
            table=table,
            sweeps=[result.sweep for result in results if result.sweep is not None],
            failures=failures,
        )
        self._write_envelope(manifest, report)
        write_scan_log(self.command, self._scan_entries(results, failures))
        return report

    def _manifest(self, inputs: Sequence[Tuple[str, Path]], parameters: Optional[dict] = None) -> RunManifest:
        records = [
            InputRecord(label=label, path=str(path), sha256=file_digest(path))
            for label, path in inputs if path.is_file()
        ]
        try:
            return RunManifest(
                tool=settings.APP_NAME,
                version=settings.VERSION,
                command=self.command,
                inputs=records,
                config=self.config,
                parameters=parameters or {},
                created_at=datetime.now(timezone.utc),
            )
        except ValidationError as exc:
            raise ConfigurationError(f"invalid run parameters: {exc.errors()[0]['msg']}") from exc

    def _write_results(self, results: Sequence[MarketResult], table: Optional[ComparisonTable],
                       manifest_id: str) -> List[str]:
        written: List[Path] = []
        summary = []
        for result in results:
            for analysis in result.analyses:
                for name, frame in analysis.tables().items():
                    written.append(self.reports.save_table(f"{analysis.stem}_{name}.tsv", frame, manifest_id))
                summary.append({
                    'market': result.label,
                    'role': analysis.role,
                    'replicate': 0 if analysis.replicate is None else analysis.replicate,
                    'n_points': len(analysis.series),
                    'alpha_min': analysis.spectrum.alpha_min,
                    'alpha_max': analysis.spectrum.alpha_max,
                    'delta_alpha': analysis.delta_alpha,
                    'h2': np.nan if analysis.hurst.h2 is None else analysis.hurst.h2,
                })
            if result.sweep is not None:
                frame = pd.DataFrame([row.model_dump() for row in result.sweep.rows])
                written.append(self.reports.save_table(f"{result.label}_threshold_sweep.tsv", frame, manifest_id))

        if summary:
            written.append(self.reports.save_table('delta_alpha.tsv', pd.DataFrame(summary), manifest_id))
        if table is not None:
            written.append(self.reports.save_table('table1.tsv', pd.DataFrame(table.to_records()), manifest_id))
            written.append(self.reports.save_text('table1.txt', table.to_text(), manifest_id))
        return [path.name for path in written]

    def _write_envelope(self, manifest: RunManifest, report: RunReport):
        self.reports.save('manifest.json', manifest)
        self.reports.save('report.json', report)

    @staticmethod
    def _scan_entries(results: Sequence[MarketResult], failures: Sequence[UnitFailure]) -> List[dict]:
        entries = []
        for result in results:
            for analysis in result.analyses:
                entries.append({
                    'label': result.label,
                    'role': analysis.stem,
                    'delta_alpha': analysis.delta_alpha,
                    'details': list(analysis.series.lineage),
                })
            if result.sweep is not None:
                for row in result.sweep.rows:
                    entries.append({
                        'label': result.label,
                        'role': f"k={row.k_sigma:g}",
                        'delta_alpha': row.delta_alpha_original,
                        'details': {'delta_alpha_surrogate': row.delta_alpha_surrogate},
                    })
        for failure in failures:
            entries.append({
                'label': failure.label,
                'status': 'failed',
                'details': {'error': failure.error, 'message': failure.message},
            })
        return entries

    def _generate(self, request: SynthRequest) -> ReturnSeries:
        seed = self.config.seed
        try:
            if request.kind is SynthKind.CASCADE:
                series = binomial_cascade(CascadeSpec(levels=request.levels, a=request.a, seed=seed))
                default_scale = 1.0
            elif request.kind is SynthKind.GAUSSIAN:
                series = gaussian_iid(request.n, seed)
                default_scale = 0.01
            else:
                series = student_t_iid(request.n, request.dof, seed)
                default_scale = 0.01
        except ValidationError as exc:
            raise ConfigurationError(f"invalid cascade parameters: {exc.errors()[0]['msg']}") from exc

        factor = default_scale if request.return_scale is None else request.return_scale
        return series if factor == 1.0 else scale_returns(series, factor)
