from app.schemas.analysis_schemas import (
    ComparisonRow,
    ComparisonTable,
    GridStamp,
    MarketReport,
    SeriesAnalysisReport,
    ThresholdSweepReport,
    ThresholdSweepRow,
)
from app.schemas.config_schemas import CascadeSpec, Direction, MfdfaConfig, PeriodConfig, RunConfig
from app.schemas.run_schemas import InputRecord, RunManifest, RunReport, SynthKind, SynthRequest, UnitFailure
