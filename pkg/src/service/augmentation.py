"""
Стохастическая аугментация: одно аффинное преобразование на образец.

Параметры (отражения, масштаб, поворот, сдвиг, скос) тянутся из потока
случайных чисел образца всегда в одном порядке, даже если часть из них
отключена конфигурацией: так поток не зависит от набора включённых
преобразований. Матрица 3×3 переводит координаты выхода (x, y) в
координаты входа; центр поворота совпадает с центром изображения.
"""
import logging
import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from src.autodiff.sampling import bilinear_sample, nearest_sample
from src.core.constants import FLIP_PROBABILITY
from src.scheme.data import AugmentationConfig, Sample

logger = logging.getLogger(__name__)

SNAP_TOLERANCE = 1e-12


@dataclass(frozen=True)
class AffineDraw:
    """Вытянутые параметры одного преобразования."""
    horizontal_flip: bool = False
    vertical_flip: bool = False
    zoom_x: float = 1.0
    zoom_y: float = 1.0
    rotation: float = 0.0
    shift_x: float = 0.0
    shift_y: float = 0.0
    shear: float = 0.0


def draw_params(config: AugmentationConfig, rng: np.random.Generator, hw: Tuple[int, int]) -> AffineDraw:
    height, width = hw
    hflip = rng.random() < FLIP_PROBABILITY
    vflip = rng.random() < FLIP_PROBABILITY
    zoom_x = rng.uniform(*config.zoom_range)
    zoom_y = rng.uniform(*config.zoom_range)
    rotation = rng.uniform(*config.rotation_range)
    shift_x = rng.uniform(-config.width_shift, config.width_shift) * width
    shift_y = rng.uniform(-config.height_shift, config.height_shift) * height
    shear = rng.uniform(-config.shear_range, config.shear_range)
    return AffineDraw(
        horizontal_flip=bool(hflip and config.horizontal_flip),
        vertical_flip=bool(vflip and config.vertical_flip),
        zoom_x=float(zoom_x),
        zoom_y=float(zoom_y),
        rotation=float(rotation),
        shift_x=float(shift_x),
        shift_y=float(shift_y),
        shear=float(shear)
    )


def compose(draw: AffineDraw, hw: Tuple[int, int]) -> np.ndarray:
    """Матрица 3×3: поворот · сдвиг · скос · масштаб · отражения вокруг центра."""
    height, width = hw
    theta = math.radians(draw.rotation)
    shear = math.radians(draw.shear)
    rotation = np.array([
        [math.cos(theta), -math.sin(theta), 0.0],
        [math.sin(theta), math.cos(theta), 0.0],
        [0.0, 0.0, 1.0]
    ])
    shift = np.array([[1.0, 0.0, draw.shift_x], [0.0, 1.0, draw.shift_y], [0.0, 0.0, 1.0]])
    shearing = np.array([[1.0, math.tan(shear), 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
    zoom = np.diag([draw.zoom_x, draw.zoom_y, 1.0])
    flips = np.diag([-1.0 if draw.horizontal_flip else 1.0, -1.0 if draw.vertical_flip else 1.0, 1.0])

    center_x, center_y = (width - 1) / 2.0, (height - 1) / 2.0
    to_center = np.array([[1.0, 0.0, center_x], [0.0, 1.0, center_y], [0.0, 0.0, 1.0]])
    from_center = np.array([[1.0, 0.0, -center_x], [0.0, 1.0, -center_y], [0.0, 0.0, 1.0]])

    matrix = to_center @ rotation @ shift @ shearing @ zoom @ flips @ from_center
    # Остатки sin(π) и подобные зануляются, чтобы целые углы давали точные индексы
    matrix[np.abs(matrix) < SNAP_TOLERANCE] = 0.0
    if abs(np.linalg.det(matrix[:2, :2])) < SNAP_TOLERANCE:
        logger.warning("[DATA] Вырожденное преобразование, используется тождественное")
        return np.eye(3)
    return matrix


def apply_matrix(sample: Sample, matrix: np.ndarray) -> Sample:
    hw = (sample.height, sample.width)
    affine = matrix[:2]
    image = bilinear_sample(sample.image[None], affine, hw, fill="zero")[0]
    image = np.clip(image, 0.0, 1.0).astype(np.float32)
    mask = None
    if sample.mask is not None:
        mask = nearest_sample(sample.mask[None, None].astype(np.float32), affine, hw)[0, 0]
    return Sample(image=image, label=sample.label, mask=mask, path=sample.path)


def augment(sample: Sample, config: AugmentationConfig, rng: np.random.Generator) -> Sample:
    """Случайное аффинное преобразование изображения и маски.

    Изображение: билинейная выборка с нулевым заполнением. Маска: ближайший
    сосед с тем же преобразованием. Форма и метка не меняются.
    """
    hw = (sample.height, sample.width)
    matrix = compose(draw_params(config, rng, hw), hw)
    return apply_matrix(sample, matrix)


def sample_rng(seed: int, epoch: int, index: int, augmentation_seed: int = 0) -> np.random.Generator:
    """Независимый поток для образца: результат не зависит от порядка обработки."""
    return np.random.default_rng([augmentation_seed, seed, epoch, index])
