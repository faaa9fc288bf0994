# app/schemas/analysis_schemas.py
from typing import ClassVar, Dict, List, Optional, Tuple

from pydantic import Field

from app.schemas.base import BaseSchema


class GridStamp(BaseSchema):
    """一次分析实际使用的网格，Δα 依赖网格，随每个结果一起输出"""
    poly_order: int
    direction: str
    scales: List[int]
    fit_min: int
    fit_max: int
    q_grid: List[float]


class HurstReport(BaseSchema):
    q: List[float]
    h: List[float]
    h_stderr: List[float]
    h_r2: List[float]
    tau: List[float]
    h2: Optional[float] = Field(None, description="q = 2 时的标准 DFA 指数")
    tau_nonlinearity: float


class SpectrumReport(BaseSchema):
    q: List[float]
    alpha: List[float]
    f_alpha: List[float]
    alpha_min: float
    alpha_max: float
    delta_alpha: float
    apex_alpha: float
    apex_f: float


class FluctuationReport(BaseSchema):
    scales: List[int]
    q: List[float]
    boxes_used: List[int]
    values: List[List[float]] = Field(..., description="F_q(s)，行对应尺度，列对应 q")


class SeriesAnalysisReport(BaseSchema):
    """单条序列（原始、替代样本、分段或过滤后）的完整分析结果"""
    label: str
    role: str
    provenance: List[str]
    n_points: int
    start_date: str
    end_date: str
    grid: GridStamp
    hurst: HurstReport
    spectrum: SpectrumReport
    fluctuation: FluctuationReport


class ComparisonRow(BaseSchema):
    market: str
    after_minus_before: float
    original_minus_surrogate: float
    after_minus_surrogate: float
    before_minus_surrogate: float
    delta_alpha: Dict[str, float]


class ComparisonTable(BaseSchema):
    """Δα 差值表：a 危机后，b 危机前，o 原始，s 打乱"""
    rows: List[ComparisonRow]

    columns: ClassVar[Tuple[Tuple[str, str], ...]] = (
        ('da_a-da_b', 'after_minus_before'),
        ('da_o-da_s', 'original_minus_surrogate'),
        ('da_a-da_s', 'after_minus_surrogate'),
        ('da_b-da_s', 'before_minus_surrogate'),
    )

    def to_text(self) -> str:
        width = max([len('market')] + [len(row.market) for row in self.rows])
        header = 'market'.ljust(width) + ''.join(name.rjust(12) for name, _ in self.columns)
        lines = [header]
        for row in self.rows:
            cells = ''.join(f"{getattr(row, attr):12.2f}" for _, attr in self.columns)
            lines.append(row.market.ljust(width) + cells)
        return '\n'.join(lines) + '\n'

    def to_records(self) -> List[Dict[str, float]]:
        return [
            {'market': row.market, **{name: getattr(row, attr) for name, attr in self.columns}}
            for row in self.rows
        ]


class ThresholdSweepRow(BaseSchema):
    k_sigma: float
    delta_alpha_original: float
    delta_alpha_surrogate: float = Field(..., description="各替代样本 Δα 的均值")
    delta_alpha_surrogate_std: float = Field(..., description="替代样本 Δα 的样本标准差，单个样本时为 0")
    eliminated_original: int
    eliminated_surrogate: int


class ThresholdSweepReport(BaseSchema):
    """阈值扫描：实线为原始序列，虚线为打乱序列"""
    market: str
    surrogate_seeds: List[int]
    q_window: Optional[float] = Field(None, description="Δα 只在 |q| <= q_window 的点上计算，None 表示整个 q 网格")
    grid: GridStamp
    rows: List[ThresholdSweepRow]


class MarketReport(BaseSchema):
    market: str
    analyses: List[SeriesAnalysisReport]
