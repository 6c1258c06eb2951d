"""
Ядра аффинной выборки: билинейная и ближайшая.

Матрица 2×3 отображает координаты пикселя выхода (x, y) в координаты
входа. Заполнение вне изображения: нулями ("zero") или повтором края
("border").
"""
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np


@dataclass(frozen=True)
class Corner:
    """Одна из четырёх опорных точек билинейной выборки."""
    rows: np.ndarray
    cols: np.ndarray
    weights: np.ndarray


def _as_batch_matrices(matrix: np.ndarray, batch: int) -> np.ndarray:
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.shape == (2, 3):
        return np.broadcast_to(matrix, (batch, 2, 3))
    if matrix.shape != (batch, 2, 3):
        raise ValueError(f"ожидалась матрица 2×3 или {batch}×2×3, получено {matrix.shape}")
    return matrix


def affine_coordinates(matrix: np.ndarray, out_hw: Tuple[int, int], batch: int = 1) -> Tuple[np.ndarray, np.ndarray]:
    """Координаты входа для каждого пикселя выхода, формы (N, Ho, Wo)."""
    matrices = _as_batch_matrices(matrix, batch)
    height, width = out_hw
    ys, xs = np.meshgrid(np.arange(height, dtype=np.float64), np.arange(width, dtype=np.float64), indexing="ij")
    src_x = matrices[:, 0, 0, None, None] * xs + matrices[:, 0, 1, None, None] * ys + matrices[:, 0, 2, None, None]
    src_y = matrices[:, 1, 0, None, None] * xs + matrices[:, 1, 1, None, None] * ys + matrices[:, 1, 2, None, None]
    return src_x, src_y


def bilinear_corners(src_x: np.ndarray, src_y: np.ndarray, in_hw: Tuple[int, int], fill: str = "zero") -> List[Corner]:
    height, width = in_hw
    x0 = np.floor(src_x)
    y0 = np.floor(src_y)
    fx = src_x - x0
    fy = src_y - y0
    x0 = x0.astype(np.int64)
    y0 = y0.astype(np.int64)
    corners = []
    for dy, dx, weight in (
        (0, 0, (1.0 - fx) * (1.0 - fy)),
        (0, 1, fx * (1.0 - fy)),
        (1, 0, (1.0 - fx) * fy),
        (1, 1, fx * fy),
    ):
        rows = y0 + dy
        cols = x0 + dx
        if fill == "border":
            rows = np.clip(rows, 0, height - 1)
            cols = np.clip(cols, 0, width - 1)
        elif fill == "zero":
            valid = (rows >= 0) & (rows < height) & (cols >= 0) & (cols < width)
            weight = np.where(valid, weight, 0.0)
            rows = np.clip(rows, 0, height - 1)
            cols = np.clip(cols, 0, width - 1)
        else:
            raise ValueError(f"неизвестный режим заполнения: {fill}")
        corners.append(Corner(rows=rows, cols=cols, weights=weight))
    return corners


def gather(images: np.ndarray, corners: List[Corner]) -> np.ndarray:
    """Билинейная выборка батча (N, C, H, W) по опорным точкам."""
    batch = images.shape[0]
    channels_last = images.transpose(0, 2, 3, 1)
    index = np.arange(batch)[:, None, None]
    result = None
    for corner in corners:
        term = channels_last[index, corner.rows, corner.cols] * corner.weights[..., None]
        result = term if result is None else result + term
    return result.transpose(0, 3, 1, 2).astype(images.dtype, copy=False)


def scatter(grad: np.ndarray, corners: List[Corner], in_shape: Tuple[int, ...]) -> np.ndarray:
    """Транспонированная операция к gather: разносит градиент по входу."""
    batch, channels, height, width = in_shape
    result = np.zeros((batch, height, width, channels), dtype=np.float64)
    grad_last = grad.transpose(0, 2, 3, 1)
    index = np.broadcast_to(np.arange(batch)[:, None, None], corners[0].rows.shape)
    for corner in corners:
        np.add.at(result, (index, corner.rows, corner.cols), grad_last * corner.weights[..., None])
    return result.transpose(0, 3, 1, 2).astype(grad.dtype, copy=False)


def bilinear_sample(images: np.ndarray, matrix: np.ndarray, out_hw: Tuple[int, int], fill: str = "zero") -> np.ndarray:
    src_x, src_y = affine_coordinates(matrix, out_hw, batch=images.shape[0])
    corners = bilinear_corners(src_x, src_y, images.shape[2:], fill=fill)
    return gather(images, corners)


def nearest_sample(images: np.ndarray, matrix: np.ndarray, out_hw: Tuple[int, int]) -> np.ndarray:
    """Выборка ближайшего соседа с нулевым заполнением (для масок)."""
    batch, _, height, width = images.shape
    src_x, src_y = affine_coordinates(matrix, out_hw, batch=batch)
    cols = np.floor(src_x + 0.5).astype(np.int64)
    rows = np.floor(src_y + 0.5).astype(np.int64)
    valid = (rows >= 0) & (rows < height) & (cols >= 0) & (cols < width)
    rows = np.clip(rows, 0, height - 1)
    cols = np.clip(cols, 0, width - 1)
    index = np.arange(batch)[:, None, None]
    values = images.transpose(0, 2, 3, 1)[index, rows, cols] * valid[..., None]
    return values.transpose(0, 3, 1, 2).astype(images.dtype, copy=False)


def resize_matrix(in_hw: Tuple[int, int], out_hw: Tuple[int, int]) -> np.ndarray:
    """Масштабирование с выравниванием центров пикселей."""
    scale_y = in_hw[0] / out_hw[0]
    scale_x = in_hw[1] / out_hw[1]
    return np.array([
        [scale_x, 0.0, 0.5 * scale_x - 0.5],
        [0.0, scale_y, 0.5 * scale_y - 0.5],
    ])


def resize_bilinear(image: np.ndarray, out_hw: Tuple[int, int]) -> np.ndarray:
    """Билинейное изменение размера (C, H, W) или (H, W) с повтором края."""
    squeeze = image.ndim == 2
    batch = image[None, None] if squeeze else image[None]
    if tuple(batch.shape[2:]) == tuple(out_hw):
        return image.copy()
    result = bilinear_sample(batch, resize_matrix(batch.shape[2:], out_hw), out_hw, fill="border")[0]
    return result[0] if squeeze else result
