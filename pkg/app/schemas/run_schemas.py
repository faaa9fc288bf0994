# app/schemas/run_schemas.py
import hashlib
from datetime import datetime
from enum import Enum
from typing import Any, Dict, List, Optional

from pydantic import Field

from app.schemas.analysis_schemas import ComparisonTable, MarketReport, ThresholdSweepReport
from app.schemas.base import BaseSchema
from app.schemas.config_schemas import RunConfig


class InputRecord(BaseSchema):
    """输入文件及其内容摘要"""
    label: str
    path: str
    sha256: str


class RunManifest(BaseSchema):
    """可复现性信封：输入、完整配置快照、工具版本、时间戳"""
    tool: str
    version: str
    command: str
    inputs: List[InputRecord] = Field(default_factory=list)
    config: RunConfig
    parameters: Dict[str, Any] = Field(default_factory=dict, description="子命令专属参数（如 synth 生成器参数）")
    created_at: datetime

    @property
    def manifest_id(self) -> str:
        """不含时间戳与文件路径的规范化摘要；相同输入内容与配置得到相同 id"""
        canonical = self.model_dump_json(exclude={'created_at': True, 'inputs': {'__all__': {'path'}}})
        return hashlib.sha256(canonical.encode('utf-8')).hexdigest()


class SynthKind(str, Enum):
    CASCADE = "cascade"
    GAUSSIAN = "gaussian"
    STUDENT_T = "student-t"


class SynthRequest(BaseSchema):
    """synth 子命令参数"""
    kind: SynthKind = SynthKind.CASCADE
    label: Optional[str] = Field(None, description="输出文件名（不含扩展名），默认取 kind")
    levels: int = Field(14, description="级联层数，长度 2**levels")
    a: float = Field(0.75, description="级联乘子")
    n: int = Field(16384, description="独立同分布序列长度")
    dof: float = Field(4.0, description="Student-t 自由度")
    return_scale: Optional[float] = Field(None, description="收益缩放，噪声默认 0.01，级联默认 1")
    start_price: float = 100.0


class UnitFailure(BaseSchema):
    label: str
    error: str
    message: str
    exit_code: int


class RunReport(BaseSchema):
    """report.json：只引用 manifest_id，不含墙钟时间，重跑逐字节一致"""
    manifest_id: str
    tool: str
    version: str
    command: str
    outputs: List[str] = Field(default_factory=list)
    markets: List[MarketReport] = Field(default_factory=list)
    table: Optional[ComparisonTable] = None
    sweeps: List[ThresholdSweepReport] = Field(default_factory=list)
    failures: List[UnitFailure] = Field(default_factory=list)

    @property
    def exit_code(self) -> int:
        """failures 已按标签排序，取第一个失败单元的退出码"""
        return self.failures[0].exit_code if self.failures else 0
