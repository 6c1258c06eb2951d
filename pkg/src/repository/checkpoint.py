"""
Бинарный формат контрольной точки.

Раскладка файла:
    b"RLCK" | u32 версия | u32 длина заголовка | заголовок (канонический JSON)
    | u64 длина данных | параметры float32 little-endian подряд

Заголовок содержит конфигурацию модели, метаданные обучения и таблицу
тензоров (имя, форма, смещение и длина в байтах внутри блока данных).
"""
import json
import logging
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Union

import numpy as np
from pydantic import ValidationError

from src.core.constants import CHECKPOINT_MAGIC, CHECKPOINT_VERSION
from src.core.exceptions import (
    CorruptHeaderError, MissingFileError, ShapeMismatchError, TruncatedPayloadError, VersionMismatchError
)
from src.model.network import ModelParams
from src.scheme.base import canonical_dumps
from src.scheme.model import ModelConfig
from src.scheme.run import CheckpointMetadata

logger = logging.getLogger(__name__)

PAYLOAD_DTYPE = np.dtype("<f4")
PREFIX = struct.Struct("<4sII")
PAYLOAD_LENGTH = struct.Struct("<Q")


@dataclass
class Checkpoint:
    """Сохраняемое состояние модели."""
    config: ModelConfig
    arrays: Dict[str, np.ndarray]
    metadata: CheckpointMetadata = field(default_factory=CheckpointMetadata)
    version: int = CHECKPOINT_VERSION

    @classmethod
    def from_params(cls, params: ModelParams, metadata: CheckpointMetadata = None) -> "Checkpoint":
        return cls(config=params.config, arrays=dict(params.arrays()), metadata=metadata or CheckpointMetadata())

    def to_params(self, requires_grad: bool = False) -> ModelParams:
        return ModelParams.from_arrays(self.config, self.arrays, requires_grad=requires_grad)

    def payload_size(self) -> int:
        return sum(array.size for array in self.arrays.values()) * PAYLOAD_DTYPE.itemsize


def encode_checkpoint(checkpoint: Checkpoint) -> bytes:
    """Сериализует контрольную точку в байты."""
    tensors = []
    chunks = []
    offset = 0
    for name in sorted(checkpoint.arrays):
        array = np.ascontiguousarray(checkpoint.arrays[name], dtype=PAYLOAD_DTYPE)
        raw = array.tobytes()
        tensors.append({"name": name, "shape": list(array.shape), "offset": offset, "length": len(raw)})
        chunks.append(raw)
        offset += len(raw)
    header = canonical_dumps({
        "config": checkpoint.config.model_dump(mode="json"),
        "metadata": checkpoint.metadata.model_dump(mode="json"),
        "tensors": tensors
    }).encode("utf-8")
    return b"".join([
        PREFIX.pack(CHECKPOINT_MAGIC, checkpoint.version, len(header)),
        header,
        PAYLOAD_LENGTH.pack(offset),
        *chunks
    ])


def decode_checkpoint(blob: bytes, source: str = "<bytes>") -> Checkpoint:
    """Разбирает байты контрольной точки с проверкой заголовка и длины данных."""
    if len(blob) < PREFIX.size:
        raise CorruptHeaderError(f"{source}: файл короче заголовка")
    magic, version, header_length = PREFIX.unpack_from(blob, 0)
    if magic != CHECKPOINT_MAGIC:
        raise CorruptHeaderError(f"{source}: неверная сигнатура {magic!r}")
    if version != CHECKPOINT_VERSION:
        raise VersionMismatchError(f"{source}: версия {version} не поддерживается (ожидалась {CHECKPOINT_VERSION})")

    cursor = PREFIX.size
    if len(blob) < cursor + header_length + PAYLOAD_LENGTH.size:
        raise CorruptHeaderError(f"{source}: заголовок обрезан")
    try:
        header = json.loads(blob[cursor:cursor + header_length].decode("utf-8"))
        config = ModelConfig.model_validate(header["config"])
        metadata = CheckpointMetadata.model_validate(header["metadata"])
        tensors = header["tensors"]
    except (UnicodeDecodeError, json.JSONDecodeError, KeyError, TypeError, ValidationError, ShapeMismatchError) as exc:
        raise CorruptHeaderError(f"{source}: заголовок не разобран: {exc}") from exc
    cursor += header_length

    (payload_length,) = PAYLOAD_LENGTH.unpack_from(blob, cursor)
    cursor += PAYLOAD_LENGTH.size
    payload = blob[cursor:]
    expected = sum(int(np.prod(entry["shape"], dtype=np.int64)) for entry in tensors) * PAYLOAD_DTYPE.itemsize
    if payload_length != expected:
        raise CorruptHeaderError(f"{source}: заявленная длина данных {payload_length} != {expected}")
    if len(payload) < payload_length:
        raise TruncatedPayloadError(f"{source}: данных {len(payload)} байт из {payload_length}")
    if len(payload) > payload_length:
        raise CorruptHeaderError(f"{source}: лишние {len(payload) - payload_length} байт после данных")

    dtype = np.dtype(config.dtype)
    arrays = {}
    for entry in tensors:
        start, length = entry["offset"], entry["length"]
        if start + length > payload_length:
            raise TruncatedPayloadError(f"{source}: тензор {entry['name']} выходит за пределы данных")
        values = np.frombuffer(payload, dtype=PAYLOAD_DTYPE, count=length // PAYLOAD_DTYPE.itemsize, offset=start)
        arrays[entry["name"]] = values.reshape(entry["shape"]).astype(dtype)
    # Проверка ключей и форм против конфигурации
    try:
        ModelParams.from_arrays(config, arrays, requires_grad=False)
    except ShapeMismatchError as exc:
        raise CorruptHeaderError(f"{source}: параметры не соответствуют конфигурации: {exc}") from exc
    return Checkpoint(config=config, arrays=arrays, metadata=metadata, version=version)


def save_checkpoint(checkpoint: Checkpoint, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(encode_checkpoint(checkpoint))
    logger.info("[CHECKPOINT] Сохранена контрольная точка %s (эпоха %d)", path, checkpoint.metadata.epoch)
    return path


def load_checkpoint(path: Union[str, Path]) -> Checkpoint:
    path = Path(path)
    if not path.is_file():
        raise MissingFileError(f"контрольная точка не найдена: {path}")
    checkpoint = decode_checkpoint(path.read_bytes(), source=str(path))
    logger.debug("[CHECKPOINT] Загружена %s: модель %s, %d тензоров", path, checkpoint.config.name, len(checkpoint.arrays))
    return checkpoint
