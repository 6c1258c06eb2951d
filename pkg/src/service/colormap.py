"""
Палитра jet (256 цветов) и наложение карты на полутоновый снимок.
"""
from functools import lru_cache

import numpy as np

from src.core.constants import OVERLAY_ALPHA
from src.core.exceptions import ShapeMismatchError

# Опорные точки палитры jet: (позиция, значение канала)
JET_SEGMENTS = {
    "red": ((0.0, 0.0), (0.35, 0.0), (0.66, 1.0), (0.89, 1.0), (1.0, 0.5)),
    "green": ((0.0, 0.0), (0.125, 0.0), (0.375, 1.0), (0.64, 1.0), (0.91, 0.0), (1.0, 0.0)),
    "blue": ((0.0, 0.5), (0.11, 1.0), (0.34, 1.0), (0.65, 0.0), (1.0, 0.0)),
}


@lru_cache()
def jet_table() -> np.ndarray:
    """Таблица 256×3 uint8."""
    positions = np.linspace(0.0, 1.0, 256)
    channels = []
    for name in ("red", "green", "blue"):
        xs, ys = zip(*JET_SEGMENTS[name])
        channels.append(np.interp(positions, xs, ys))
    table = np.round(np.stack(channels, axis=1) * 255.0).astype(np.uint8)
    table.setflags(write=False)
    return table


def colormap(values: np.ndarray) -> np.ndarray:
    """Цвета RGB в [0, 1] для значений в [0, 1]."""
    index = np.clip(np.round(np.asarray(values, dtype=np.float64) * 255.0), 0, 255).astype(np.int64)
    return jet_table()[index].astype(np.float64) / 255.0


def overlay(heatmap: np.ndarray, image: np.ndarray, alpha: float = OVERLAY_ALPHA) -> np.ndarray:
    """Смешивание (1 - α)·снимок + α·jet(карта); результат H×W×3 в [0, 1]."""
    gray = np.asarray(image, dtype=np.float64)
    if gray.ndim == 3 and gray.shape[0] == 1:
        gray = gray[0]
    heatmap = np.asarray(heatmap, dtype=np.float64)
    if gray.shape != heatmap.shape:
        raise ShapeMismatchError("overlay", "размеры карты и снимка различаются", [heatmap.shape, gray.shape])
    return (1.0 - alpha) * gray[..., None] + alpha * colormap(heatmap)
