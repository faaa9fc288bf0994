# app/repositories/report_repository.py
from pathlib import Path
from typing import Optional

import pandas as pd

from app.repositories.base import BaseRepository, PathLike
from app.schemas.base import BaseSchema


class ReportRepository(BaseRepository[BaseSchema]):
    """结果目录：JSON 报告与每幅图对应的 TSV 数据"""

    def __init__(self, out_dir: PathLike):
        self.out_dir = Path(out_dir)

    def load(self, path: PathLike, schema: type = BaseSchema, **_) -> BaseSchema:
        return schema.model_validate_json(self._resolve(path).read_text(encoding='utf-8'))

    def save(self, path: PathLike, obj: BaseSchema) -> Path:
        target = self._prepare(self._resolve(path))
        target.write_text(obj.to_json(), encoding='utf-8')
        return target

    def save_table(self, path: PathLike, frame: pd.DataFrame, manifest_id: Optional[str] = None) -> Path:
        """TSV 表；给出 manifest_id 时追加为最后一列，每行都能追溯到 manifest"""
        target = self._prepare(self._resolve(path))
        if manifest_id is not None:
            frame = frame.assign(manifest_id=manifest_id)
        frame.to_csv(target, sep='\t', index=False, float_format='%.12g', lineterminator='\n')
        return target

    def save_text(self, path: PathLike, text: str, manifest_id: Optional[str] = None) -> Path:
        target = self._prepare(self._resolve(path))
        if manifest_id is not None:
            text = f"{text}manifest_id {manifest_id}\n"
        target.write_text(text, encoding='utf-8')
        return target

    def _resolve(self, path: PathLike) -> Path:
        candidate = Path(path)
        return candidate if candidate.is_absolute() else self.out_dir / candidate
