"""
Каталог результатов эксперимента.

    <root>/config.json
    <root>/round-<i>/checkpoint.rlck
    <root>/round-<i>/record.json
    <root>/round-<i>/error.json   (раунд завершился ошибкой)
    <root>/report.txt
    <root>/report.json
"""
import json
import logging
import re
import shutil
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from pydantic import ValidationError

from src.core.constants import CHECKPOINT_FILE, CONFIG_FILE, RECORD_FILE, REPORT_JSON, REPORT_TXT
from src.core.exceptions import DataError, MissingFileError
from src.scheme.base import BaseSchema, canonical_dumps
from src.scheme.metrics import ExperimentReport
from src.scheme.run import RunConfig, RunRecord

logger = logging.getLogger(__name__)

ERROR_FILE = "error.json"
ROUND_DIR = re.compile(r"round-\d+")


def write_json(path: Union[str, Path], payload: Union[BaseSchema, Dict[str, Any], List[Any]]) -> Path:
    """Канонический JSON с переводом строки в конце."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    data = payload.model_dump(mode="json") if isinstance(payload, BaseSchema) else payload
    path.write_text(canonical_dumps(data) + "\n", encoding="utf-8")
    return path


def read_json(path: Union[str, Path]) -> Any:
    path = Path(path)
    if not path.is_file():
        raise MissingFileError(f"файл не найден: {path}")
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: некорректный JSON: {exc}") from exc


class ArtifactStore:
    """Доступ к файлам одного эксперимента."""

    def __init__(self, root: Union[str, Path]):
        self.root = Path(root)

    def round_dir(self, index: int) -> Path:
        return self.root / f"round-{index}"

    def checkpoint_path(self, index: int) -> Path:
        return self.round_dir(index) / CHECKPOINT_FILE

    def clear_rounds(self) -> int:
        """Удаляет каталоги round-<i> прошлого запуска; возвращает их число."""
        if not self.root.is_dir():
            return 0
        stale = [path for path in self.root.iterdir() if path.is_dir() and ROUND_DIR.fullmatch(path.name)]
        for path in stale:
            shutil.rmtree(path)
        if stale:
            logger.info("[TRAIN] Удалены раунды прошлого запуска в %s: %d", self.root, len(stale))
        return len(stale)

    def relative(self, path: Path) -> str:
        return Path(path).relative_to(self.root).as_posix()

    def write_config(self, config: RunConfig) -> Path:
        return write_json(self.root / CONFIG_FILE, config)

    def read_config(self) -> RunConfig:
        try:
            return RunConfig.model_validate(read_json(self.root / CONFIG_FILE))
        except ValidationError as exc:
            raise DataError(f"{self.root / CONFIG_FILE}: {exc}") from exc

    def write_record(self, record: RunRecord) -> Path:
        return write_json(self.round_dir(record.round_index) / RECORD_FILE, record)

    def write_error(self, index: int, error: Exception) -> Path:
        return write_json(self.round_dir(index) / ERROR_FILE, {
            "error": type(error).__name__,
            "detail": str(error)
        })

    def read_records(self) -> List[RunRecord]:
        """Записи всех раундов в порядке номера раунда."""
        records = []
        for path in self.root.glob(f"round-*/{RECORD_FILE}"):
            try:
                records.append(RunRecord.model_validate(read_json(path)))
            except ValidationError as exc:
                raise DataError(f"{path}: {exc}") from exc
        records.sort(key=lambda record: record.round_index)
        logger.debug("[REPORT] %s: прочитано раундов %d", self.root, len(records))
        return records

    def write_report(self, report: ExperimentReport, text: str) -> Path:
        write_json(self.root / REPORT_JSON, report)
        (self.root / REPORT_TXT).write_text(text, encoding="utf-8")
        logger.info("[REPORT] Отчёт записан в %s", self.root)
        return self.root / REPORT_JSON

    def read_report(self) -> Optional[ExperimentReport]:
        path = self.root / REPORT_JSON
        if not path.is_file():
            return None
        try:
            return ExperimentReport.model_validate(read_json(path))
        except ValidationError as exc:
            raise DataError(f"{path}: {exc}") from exc
