import csv
import json
import logging
from pathlib import Path
from typing import Any, Iterable, List, Sequence

from pydantic import BaseModel

logger = logging.getLogger(__name__)


class ExportUtil:
    """报告与数据文件导出工具类"""

    @staticmethod
    def to_jsonable(obj: Any) -> Any:
        """pydantic 模型按别名导出为 JSON 兼容结构"""
        if isinstance(obj, BaseModel):
            return obj.model_dump(mode="json", by_alias=True)
        if isinstance(obj, (list, tuple)):
            return [ExportUtil.to_jsonable(o) for o in obj]
        if isinstance(obj, dict):
            return {k: ExportUtil.to_jsonable(v) for k, v in obj.items()}
        return obj

    @staticmethod
    def dumps(obj: Any) -> str:
        """
        确定性 JSON 文本

        键排序, 浮点数使用最短往返表示, 不含时间戳。
        """
        return json.dumps(ExportUtil.to_jsonable(obj), sort_keys=True, indent=2, ensure_ascii=False, allow_nan=False) + "\n"

    @staticmethod
    def write_json(path: Path, obj: Any) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(ExportUtil.dumps(obj), encoding="utf-8")
        logger.info(f"已写出 {path}")
        return path

    @staticmethod
    def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
        """
        写出 CSV

        Args:
            path: 目标文件
            header: 列名
            rows: 数据行 (浮点数以 repr 写出, 保证往返精度)

        Returns:
            写出的路径
        """
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="", encoding="utf-8") as f:
            w = csv.writer(f)
            w.writerow(list(header))
            for row in rows:
                w.writerow([repr(float(v)) if isinstance(v, float) else v for v in row])
        logger.info(f"已写出 {path}")
        return path

    @staticmethod
    def read_csv(path: Path) -> List[List[str]]:
        with Path(path).open(newline="", encoding="utf-8") as f:
            return [row for row in csv.reader(f)]
