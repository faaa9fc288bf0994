# app/repositories/base.py
from abc import ABC, abstractmethod
from pathlib import Path
from typing import Generic, TypeVar, Union

ModelType = TypeVar("ModelType")
PathLike = Union[str, Path]


class BaseRepository(ABC, Generic[ModelType]):
    """文件仓储基类：按路径读写领域对象"""

    @abstractmethod
    def load(self, path: PathLike, **kwargs) -> ModelType:
        raise NotImplementedError

    @abstractmethod
    def save(self, path: PathLike, obj: ModelType) -> Path:
        raise NotImplementedError

    @staticmethod
    def _prepare(path: PathLike) -> Path:
        target = Path(path)
        target.parent.mkdir(parents=True, exist_ok=True)
        return target
