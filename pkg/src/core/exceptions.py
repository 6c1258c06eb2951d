"""
Иерархия исключений приложения.

Каждое исключение несёт код завершения, который CLI возвращает процессу.
"""
from typing import Iterable, Optional, Sequence

from src.core.constants import EXIT_DATA, EXIT_NUMERICAL, EXIT_USAGE


class RobustLensError(Exception):
    """Базовое исключение приложения."""
    exit_code: int = EXIT_USAGE

    def __init__(self, detail: str):
        super().__init__(detail)
        self.detail = detail


# Ошибки использования (код 1)

class UsageError(RobustLensError):
    """Некорректные аргументы или конфигурация."""
    exit_code = EXIT_USAGE


class ConfigError(UsageError):
    """Конфигурация не прошла валидацию."""


class ShapeMismatchError(UsageError):
    """Несовместимые размерности входов операции или слоя."""

    def __init__(self, op: str, detail: str, dims: Optional[Sequence] = None):
        message = f"{op}: {detail}"
        if dims is not None:
            message += f" (размерности: {list(dims)})"
        super().__init__(message)
        self.op = op
        self.dims = dims


class InvalidLayerError(UsageError):
    """Слой не существует или не является сверточным."""

    def __init__(self, layer: str, available: Iterable[str]):
        available = list(available)
        super().__init__(
            f"Слой '{layer}' не является сверточным слоем модели; "
            f"доступные слои: {', '.join(available) or '-'}"
        )
        self.layer = layer
        self.available = available


class StampOutOfBoundsError(UsageError):
    """Штамп выходит за границы изображения."""


# Ошибки данных (код 2)

class DataError(RobustLensError):
    """Ошибка входных данных."""
    exit_code = EXIT_DATA


class ManifestError(DataError):
    """Некорректный манифест датасета."""


class UnknownLabelError(ManifestError):
    """Неизвестная метка класса."""


class DuplicatePathError(ManifestError):
    """Путь к изображению встречается в манифесте дважды."""


class MissingFileError(ManifestError):
    """Файл, указанный в манифесте, не найден."""


class EmptySplitError(ManifestError):
    """Запрошенная выборка пуста."""


class ImageDecodeError(DataError):
    """Ошибка декодирования изображения."""


class UnsupportedFormatError(ImageDecodeError):
    """Формат изображения не поддерживается."""


class CorruptImageError(ImageDecodeError):
    """Поток изображения повреждён."""


class CheckpointError(DataError):
    """Ошибка чтения контрольной точки."""


class CorruptHeaderError(CheckpointError):
    """Повреждён заголовок контрольной точки."""


class TruncatedPayloadError(CheckpointError):
    """Данные параметров короче заявленного."""


class VersionMismatchError(CheckpointError):
    """Неподдерживаемая версия формата."""


# Численные ошибки (код 3)

class NumericalError(RobustLensError):
    """Численный сбой вычислений."""
    exit_code = EXIT_NUMERICAL


class NonFiniteError(NumericalError):
    """В результате операции появились NaN или Inf."""

    def __init__(self, op: str, where: str = "выход"):
        super().__init__(f"{op}: нечисловое значение (NaN/Inf), {where}")
        self.op = op


class GraphConsumedError(NumericalError):
    """Повторный обратный проход по уже использованному графу."""


class InsufficientRoundsError(NumericalError):
    """Для доверительного интервала нужно не меньше двух раундов."""
