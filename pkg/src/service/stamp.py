"""
Текстоподобный штамп: узор, область на снимке и выжигание.
"""
from typing import Tuple

import numpy as np

from src.core.exceptions import StampOutOfBoundsError
from src.scheme.gradcam import StampSpec


def text_glyph(height: int, width: int, seed: int = 0) -> np.ndarray:
    """Бинарный узор, похожий на строку текста: штрихи через столбец."""
    rng = np.random.default_rng(seed)
    glyph = rng.random((height, width)) < 0.6
    glyph[:, 1::2] &= rng.random((height, width // 2)) < 0.3
    glyph[0, 0] = True
    return glyph


def stamp_region(stamp: StampSpec, hw: Tuple[int, int]) -> Tuple[slice, slice]:
    height, width = hw
    if stamp.row + stamp.height > height or stamp.col + stamp.width > width:
        raise StampOutOfBoundsError(
            f"штамп {stamp.height}×{stamp.width} в ({stamp.row}, {stamp.col}) не помещается в {height}×{width}"
        )
    return slice(stamp.row, stamp.row + stamp.height), slice(stamp.col, stamp.col + stamp.width)


def apply_stamp(image: np.ndarray, stamp: StampSpec) -> np.ndarray:
    """Выжигает штамп яркости stamp.intensity; исходный массив не меняется."""
    stamped = np.array(image, copy=True)
    region = stamp_region(stamp, stamped.shape[-2:])
    patch = stamped[..., region[0], region[1]]
    patch[..., text_glyph(stamp.height, stamp.width, stamp.seed)] = stamp.intensity
    return stamped
