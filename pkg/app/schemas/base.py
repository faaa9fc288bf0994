# app/schemas/base.py
from pydantic import BaseModel, ConfigDict


class BaseSchema(BaseModel):
    """报告类模式基类：字段顺序固定，序列化结果可逐字节复现"""
    model_config = ConfigDict(extra='forbid')

    def to_json(self) -> str:
        return self.model_dump_json(indent=2) + "\n"
