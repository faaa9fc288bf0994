# app/services/scan_log.py
"""分析扫描日志：每个分析单元一行 JSON，追加写入 settings.SCAN_LOG_PATH"""
import json
import logging
from datetime import datetime
from typing import Any, Dict, Iterable, Optional

from app.core.config import settings

logger = logging.getLogger(__name__)


def ensure_log_file():
    path = settings.SCAN_LOG_PATH
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        if not path.exists():
            path.touch(exist_ok=True)
    except Exception:
        logger.exception("Failed to prepare analysis log file")


def _serialize_details(details: Any) -> Any:
    if details is None:
        return None
    try:
        json.dumps(details, ensure_ascii=False)
        return details
    except (TypeError, ValueError):
        return str(details)


def write_scan_log(command: str, entries: Iterable[Dict[str, Any]]):
    """写入一次运行的全部单元记录；写失败只记日志，不影响分析结果"""
    entries = list(entries)
    ensure_log_file()
    if not entries:
        entries = [{'label': None, 'status': 'empty', 'details': 'No series analyzed or results empty'}]

    try:
        with settings.SCAN_LOG_PATH.open('a', encoding='utf-8') as log_file:
            for entry in entries:
                delta_alpha: Optional[float] = entry.get('delta_alpha')
                record = {
                    'timestamp': datetime.now().isoformat(),
                    'command': command,
                    'label': entry.get('label'),
                    'role': entry.get('role'),
                    'delta_alpha': delta_alpha,
                    'status': entry.get('status') or 'completed',
                    'details': _serialize_details(entry.get('details')),
                }
                log_file.write(json.dumps(record, ensure_ascii=False) + '\n')
    except Exception:
        logger.exception("Failed to write analysis scan log")
