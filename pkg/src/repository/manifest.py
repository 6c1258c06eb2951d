"""
Манифест датасета в CSV: path,label,split,mask_path[,source].
"""
import csv
import logging
from pathlib import Path
from typing import Iterable, Optional, Union

from pydantic import ValidationError

from src.core.constants import LABEL_ALIASES, MANIFEST_COLUMNS, NUM_CLASSES, SPLITS
from src.core.exceptions import ManifestError, MissingFileError, UnknownLabelError
from src.scheme.data import DatasetManifest, ManifestRecord

logger = logging.getLogger(__name__)


def parse_label(token: str, num_classes: int = NUM_CLASSES) -> int:
    """Метка из имени класса (без учёта регистра) или целого номера."""
    value = token.strip()
    alias = LABEL_ALIASES.get(value.lower())
    if alias is not None and alias < num_classes:
        return alias
    if value.isdigit() and int(value) < num_classes:
        return int(value)
    raise UnknownLabelError(f"неизвестная метка '{token}'")


def load_manifest(path: Union[str, Path], num_classes: int = NUM_CLASSES, check_files: bool = False) -> DatasetManifest:
    """Читает и проверяет манифест.

    Пути в манифесте считаются относительно каталога файла манифеста.

    Args:
        path: Путь к CSV
        num_classes: Число классов модели
        check_files: Проверить существование изображений и масок сразу

    Returns:
        Проверенный манифест
    """
    path = Path(path)
    if not path.is_file():
        raise MissingFileError(f"манифест не найден: {path}")
    root = path.resolve().parent

    with path.open(newline="", encoding="utf-8") as stream:
        reader = csv.DictReader(stream)
        header = [column.strip() for column in (reader.fieldnames or [])]
        missing = [column for column in MANIFEST_COLUMNS if column not in header]
        if missing:
            raise ManifestError(f"{path}: нет столбцов {', '.join(missing)}")
        records = []
        for line, row in enumerate(reader, start=2):
            row = {key.strip(): (value or "").strip() for key, value in row.items() if key is not None}
            split = row["split"].lower()
            if split not in SPLITS:
                raise ManifestError(f"{path}:{line}: неизвестная выборка '{row['split']}'")
            try:
                label = parse_label(row["label"], num_classes)
            except UnknownLabelError as exc:
                raise UnknownLabelError(f"{path}:{line}: {exc.detail}") from exc
            try:
                records.append(ManifestRecord(
                    path=str(root / row["path"]),
                    label=label,
                    split=split,
                    mask_path=str(root / row["mask_path"]) if row["mask_path"] else None,
                    source=row.get("source") or None
                ))
            except ValidationError as exc:
                raise ManifestError(f"{path}:{line}: {exc}") from exc

    manifest = DatasetManifest(root=str(root), records=records, num_classes=num_classes)
    if check_files:
        check_manifest_files(manifest)
    counts = manifest.counts()
    logger.info("[DATA] Манифест %s: train=%d, val=%d, test=%d", path, counts["train"], counts["val"], counts["test"])
    return manifest


def check_manifest_files(manifest: DatasetManifest) -> None:
    for record in manifest.records:
        for file in (record.path, record.mask_path):
            if file is not None and not Path(file).is_file():
                raise MissingFileError(f"файл из манифеста не найден: {file}")


def write_manifest(path: Union[str, Path], records: Iterable[ManifestRecord], root: Optional[Path] = None) -> Path:
    """Записывает манифест; пути сохраняются относительно каталога манифеста."""
    path = Path(path)
    root = Path(root) if root is not None else path.resolve().parent
    path.parent.mkdir(parents=True, exist_ok=True)

    def relative(file: Optional[str]) -> str:
        if not file:
            return ""
        file = Path(file)
        return (file.resolve().relative_to(root) if file.is_absolute() else file).as_posix()

    with path.open("w", newline="", encoding="utf-8") as stream:
        writer = csv.writer(stream)
        writer.writerow([*MANIFEST_COLUMNS, "source"])
        for record in records:
            writer.writerow([relative(record.path), record.label, record.split, relative(record.mask_path), record.source or ""])
    return path
