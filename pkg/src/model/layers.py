"""
Слои сети: вывод форм, инициализация параметров и прямой проход.
"""
import math
from typing import Dict, List, Tuple

import numpy as np

from src.autodiff import Tensor, add_bias, conv2d, flatten, matmul, maxpool2d, relu
from src.core.exceptions import ShapeMismatchError
from src.scheme.model import ConvSpec, DenseSpec, FlattenSpec, LayerSpec, MaxPoolSpec, ModelConfig, ReluSpec

Shape = Tuple[int, ...]


def output_shape(index: int, layer: LayerSpec, shape: Shape) -> Shape:
    """Форма выхода слоя без батча."""
    op = f"слой {index} ({layer.kind})"
    if isinstance(layer, ConvSpec):
        if len(shape) != 3:
            raise ShapeMismatchError(op, "свёртке нужен вход (C, H, W)", shape)
        channels, height, width = shape
        out_h = (height + 2 * layer.pad - layer.kernel) // layer.stride + 1
        out_w = (width + 2 * layer.pad - layer.kernel) // layer.stride + 1
        if height + 2 * layer.pad < layer.kernel or width + 2 * layer.pad < layer.kernel:
            raise ShapeMismatchError(op, f"ядро {layer.kernel} больше входа", shape)
        return layer.out_channels, out_h, out_w
    if isinstance(layer, MaxPoolSpec):
        if len(shape) != 3:
            raise ShapeMismatchError(op, "pooling нужен вход (C, H, W)", shape)
        channels, height, width = shape
        if height < layer.window or width < layer.window:
            raise ShapeMismatchError(op, f"окно {layer.window} больше входа", shape)
        return channels, height // layer.window, width // layer.window
    if isinstance(layer, FlattenSpec):
        return (int(np.prod(shape)),)
    if isinstance(layer, DenseSpec):
        if len(shape) != 1:
            raise ShapeMismatchError(op, "полносвязному слою нужен плоский вход (перед ним flatten)", shape)
        return (layer.width,)
    return shape


def infer_shapes(config: ModelConfig) -> List[Shape]:
    """Проверяет цепочку слоёв и возвращает формы выходов."""
    shape: Shape = tuple(config.input_shape)
    if any(extent <= 0 for extent in shape):
        raise ShapeMismatchError("input_shape", "размерности должны быть положительными", shape)
    shapes = []
    for index, layer in enumerate(config.layers):
        shape = output_shape(index, layer, shape)
        shapes.append(shape)
    if not shapes or shapes[-1] != (config.num_classes,):
        raise ShapeMismatchError(
            f"слой {len(config.layers) - 1}",
            f"последний слой должен выдавать {config.num_classes} логитов",
            shapes[-1] if shapes else shape
        )
    return shapes


def parameter_shapes(config: ModelConfig) -> Dict[str, Shape]:
    """Имена и формы параметров: '<индекс слоя>.weight' / '<индекс>.bias'."""
    shapes: Dict[str, Shape] = {}
    shape: Shape = tuple(config.input_shape)
    for index, layer in enumerate(config.layers):
        if isinstance(layer, ConvSpec):
            shapes[f"{index}.weight"] = (layer.out_channels, shape[0], layer.kernel, layer.kernel)
            shapes[f"{index}.bias"] = (layer.out_channels,)
        elif isinstance(layer, DenseSpec):
            shapes[f"{index}.weight"] = (layer.width, shape[0])
            shapes[f"{index}.bias"] = (layer.width,)
        shape = output_shape(index, layer, shape)
    return shapes


def he_uniform_bound(weight_shape: Shape) -> float:
    fan_in = int(np.prod(weight_shape[1:]))
    return math.sqrt(6.0 / fan_in)


def initialize(config: ModelConfig) -> Dict[str, np.ndarray]:
    """He-uniform для весов, нули для смещений; детерминированно по seed."""
    rng = np.random.default_rng(config.seed)
    dtype = np.dtype(config.dtype)
    arrays = {}
    for name, shape in parameter_shapes(config).items():
        if name.endswith(".weight"):
            bound = he_uniform_bound(shape)
            arrays[name] = rng.uniform(-bound, bound, size=shape).astype(dtype)
        else:
            arrays[name] = np.zeros(shape, dtype=dtype)
    return arrays


def apply_layer(index: int, layer: LayerSpec, x: Tensor, params: Dict[str, Tensor]) -> Tensor:
    if isinstance(layer, ConvSpec):
        out = conv2d(x, params[f"{index}.weight"], stride=layer.stride, padding=layer.pad)
        return add_bias(out, params[f"{index}.bias"])
    if isinstance(layer, DenseSpec):
        out = matmul(x, params[f"{index}.weight"], transpose_b=True)
        return add_bias(out, params[f"{index}.bias"])
    if isinstance(layer, MaxPoolSpec):
        return maxpool2d(x, layer.window)
    if isinstance(layer, ReluSpec):
        return relu(x)
    if isinstance(layer, FlattenSpec):
        return flatten(x)
    raise ShapeMismatchError(f"слой {index}", f"неизвестный тип слоя {layer.kind}")
