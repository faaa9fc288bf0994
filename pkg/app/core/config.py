# app/core/config.py
from datetime import date
from pathlib import Path

from pydantic_settings import BaseSettings

PROJECT_ROOT = Path(__file__).resolve().parents[2]


class Settings(BaseSettings):
    """应用配置管理"""
    APP_NAME: str = "FX Multifractal Analyzer"
    VERSION: str = "1.0.0"

    # 日志配置
    LOG_LEVEL: str = "INFO"
    LOG_FORMAT: str = "%(asctime)s %(levelname)s %(name)s | %(message)s"
    SCAN_LOG_PATH: Path = PROJECT_ROOT / 'logs' / 'analysis_scan.log'

    # 并发分析单元上限
    MAX_WORKERS: int = 4

    # 合成序列与输出
    SYNTH_ORIGIN_DATE: date = date(1991, 1, 2)
    DEFAULT_OUTPUT_DIR: Path = Path('results')

    class Config:
        env_file = ".env"


settings = Settings()
