"""
Чтение и запись полутоновых изображений (PNG, PGM P5).
"""
import logging
from pathlib import Path
from typing import Optional, Tuple, Union

import numpy as np
from PIL import Image, UnidentifiedImageError

from src.autodiff.sampling import nearest_sample, resize_bilinear, resize_matrix
from src.core.constants import RESCALE
from src.core.exceptions import CorruptImageError, MissingFileError, UnsupportedFormatError

logger = logging.getLogger(__name__)

PNG_SIGNATURE = b"\x89PNG\r\n\x1a\n"
PGM_SIGNATURE = b"P5"

# Режимы Pillow, которые сводятся к 8-битному полутону без потери разрядности
CONVERTIBLE_MODES = {"1", "L", "LA", "P", "RGB", "RGBA"}

PathLike = Union[str, Path]


def _open_gray(path: PathLike) -> np.ndarray:
    path = Path(path)
    if not path.is_file():
        raise MissingFileError(f"изображение не найдено: {path}")
    with path.open("rb") as stream:
        head = stream.read(len(PNG_SIGNATURE))
    if not (head.startswith(PNG_SIGNATURE) or head.startswith(PGM_SIGNATURE)):
        raise UnsupportedFormatError(f"{path}: поддерживаются только PNG и PGM (P5)")
    try:
        with Image.open(path) as image:
            image.load()
            if image.mode not in CONVERTIBLE_MODES:
                raise UnsupportedFormatError(f"{path}: режим {image.mode} не является 8-битным")
            if image.mode != "L":
                image = image.convert("L")
            return np.asarray(image, dtype=np.float64)
    except UnsupportedFormatError:
        raise
    except (UnidentifiedImageError, OSError, SyntaxError, ValueError) as exc:
        raise CorruptImageError(f"{path}: поток изображения повреждён: {exc}") from exc


def decode_image(path: PathLike, target_hw: Optional[Tuple[int, int]] = None, rescale: float = RESCALE) -> np.ndarray:
    """Декодирует изображение в массив 1×H×W float32 в [0, 1].

    Args:
        path: Путь к PNG или PGM
        target_hw: Размер после билинейного масштабирования; None для исходного
        rescale: Множитель яркости

    Returns:
        Изображение 1×H×W
    """
    pixels = _open_gray(path)
    if target_hw is not None and pixels.shape != tuple(target_hw):
        pixels = resize_bilinear(pixels, tuple(target_hw))
    return np.clip(pixels * rescale, 0.0, 1.0).astype(np.float32)[None]


def decode_mask(path: PathLike, target_hw: Optional[Tuple[int, int]] = None) -> np.ndarray:
    """Бинарная маска H×W: пиксели ярче середины шкалы считаются единицей."""
    mask = (_open_gray(path) > 127).astype(np.float32)
    if target_hw is not None and mask.shape != tuple(target_hw):
        matrix = resize_matrix(mask.shape, tuple(target_hw))
        mask = nearest_sample(mask[None, None], matrix, tuple(target_hw))[0, 0]
    return mask


def to_uint8(values: np.ndarray) -> np.ndarray:
    return np.round(np.clip(values, 0.0, 1.0) * 255.0).astype(np.uint8)


def encode_image(path: PathLike, values: np.ndarray) -> Path:
    """Записывает изображение из [0, 1]: H×W, 1×H×W или H×W×3 (RGB).

    Формат выбирается по расширению (.png или .pgm).
    """
    path = Path(path)
    values = np.asarray(values)
    if values.ndim == 3 and values.shape[0] == 1:
        values = values[0]
    if values.ndim == 3 and values.shape[-1] != 3:
        raise UnsupportedFormatError(f"{path}: ожидалось H×W или H×W×3, получено {values.shape}")
    if values.ndim == 3 and path.suffix.lower() == ".pgm":
        raise UnsupportedFormatError(f"{path}: PGM хранит только полутон")
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(to_uint8(values)).save(path)
    return path
