"""
Генератор синтетических «рентгенограмм» для настольных экспериментов.

Снимок: светлое тело и два тёмных эллиптических лёгких (они же маска).
Признаки класса:
    - пятно внутри лёгкого в позиции, зависящей от класса (устойчивый признак);
    - слабая текстура по всему снимку, амплитуда меньше ε (неустойчивый признак);
    - текстовая метка в углу, коррелирующая с одним из классов.
Все яркости задаются целыми уровнями, так как файлы 8-битные.
"""
import logging
from pathlib import Path
from typing import List, Tuple, Union

import numpy as np

from src.core.constants import CLASS_NAMES, SPLITS
from src.repository.images import encode_image
from src.repository.manifest import write_manifest
from src.scheme.data import ManifestRecord, SyntheticConfig
from src.service.stamp import text_glyph

logger = logging.getLogger(__name__)

# Центры пятен: доля ширины и высоты
BLOB_CENTERS = {
    0: (0.30, 0.35),
    1: (0.70, 0.50),
    2: (0.30, 0.65),
}


def lung_mask(size: int) -> np.ndarray:
    """Два эллипса: левое и правое лёгкое."""
    ys, xs = np.mgrid[0:size, 0:size].astype(np.float64)
    mask = np.zeros((size, size), dtype=bool)
    for center_x in (0.30 * size, 0.70 * size):
        mask |= ((xs - center_x) / (0.16 * size)) ** 2 + ((ys - 0.5 * size) / (0.32 * size)) ** 2 <= 1.0
    return mask


def blob_slice(label: int, size: int, blob_size: int) -> Tuple[slice, slice]:
    fx, fy = BLOB_CENTERS[label]
    col = int(round(fx * size)) - blob_size // 2
    row = int(round(fy * size)) - blob_size // 2
    return slice(row, row + blob_size), slice(col, col + blob_size)


def texture(label: int, size: int) -> np.ndarray:
    """Шахматка для классов 0 и 1 (с разным знаком), полосы для класса 2."""
    ys, xs = np.mgrid[0:size, 0:size]
    if label == 2:
        return np.where(ys % 2 == 0, 1.0, -1.0)
    checker = np.where((xs + ys) % 2 == 0, 1.0, -1.0)
    return checker if label == 0 else -checker


def render(config: SyntheticConfig, label: int, rng: np.random.Generator, stamped: bool) -> np.ndarray:
    size = config.size
    lungs = lung_mask(size)
    levels = np.where(lungs, config.lung_level, config.body_level).astype(np.float64)
    if config.blob_amplitude:
        levels[blob_slice(label, size, config.blob_size)] += config.blob_amplitude
    if config.texture_amplitude:
        levels += config.texture_amplitude * texture(label, size)
    if stamped and config.stamp_amplitude:
        height = max(2, size // 6)
        glyph = text_glyph(height, 2 * height, seed=config.seed)
        levels[1:1 + height, 1:1 + 2 * height] += config.stamp_amplitude * glyph
    if config.noise:
        levels += rng.integers(-config.noise, config.noise + 1, size=levels.shape)
    return np.clip(np.round(levels), 0, 255) / 255.0


def generate_dataset(config: SyntheticConfig, directory: Union[str, Path]) -> Path:
    """Пишет изображения, маски и манифест; возвращает путь к манифесту.

    Args:
        config: Параметры генератора
        directory: Каталог датасета

    Returns:
        Путь к manifest.csv
    """
    directory = Path(directory)
    rng = np.random.default_rng(config.seed)
    mask_path = None
    if config.masks:
        mask_path = encode_image(directory / f"masks/lungs.{config.image_format}", lung_mask(config.size).astype(np.float64))

    records: List[ManifestRecord] = []
    for split in SPLITS:
        for label in range(config.num_classes):
            for index in range(config.counts.get(split, 0)):
                chance = config.stamp_correlation if label == config.stamp_class else 1.0 - config.stamp_correlation
                stamped = bool(rng.random() < chance)
                pixels = render(config, label, rng, stamped)
                name = f"images/{split}/{CLASS_NAMES[label]}/{index:04d}.{config.image_format}"
                path = encode_image(directory / name, pixels)
                records.append(ManifestRecord(
                    path=str(path.resolve()),
                    label=label,
                    split=split,
                    mask_path=str(mask_path.resolve()) if mask_path is not None else None,
                    source="stamped" if stamped else "synthetic"
                ))

    manifest = write_manifest(directory / "manifest.csv", records, root=directory.resolve())
    logger.info("[DATA] Синтетический датасет: %d изображений в %s", len(records), directory)
    return manifest
