"""
Параметры сети θ, построение и прямой проход.
"""
import logging
from typing import Dict, Iterator, List, Optional, Tuple, Union

import numpy as np

from src.autodiff import Tensor
from src.core.exceptions import InvalidLayerError, ShapeMismatchError, UsageError
from src.model.layers import apply_layer, infer_shapes, initialize, parameter_shapes
from src.scheme.model import ConvSpec, ModelConfig

logger = logging.getLogger(__name__)


class ModelParams:
    """Именованные тензоры параметров, привязанные к конфигурации.

    Массивы параметров не изменяются на месте: оптимизатор заменяет их
    новыми, поэтому снимок состояния является словарём ссылок.
    """

    def __init__(self, config: ModelConfig, tensors: Dict[str, Tensor]):
        expected = parameter_shapes(config)
        if set(expected) != set(tensors):
            raise ShapeMismatchError("ModelParams", "ключи параметров не совпадают с конфигурацией",
                                     sorted(set(expected) ^ set(tensors)))
        for name, shape in expected.items():
            if tensors[name].shape != shape:
                raise ShapeMismatchError("ModelParams", f"параметр {name}", [tensors[name].shape, shape])
        self.config = config
        self.tensors = tensors

    @classmethod
    def from_arrays(cls, config: ModelConfig, arrays: Dict[str, np.ndarray], requires_grad: bool = True) -> "ModelParams":
        dtype = np.dtype(config.dtype)
        tensors = {
            name: Tensor(np.asarray(array, dtype=dtype), requires_grad=requires_grad, name=name)
            for name, array in arrays.items()
        }
        return cls(config, tensors)

    def __getitem__(self, name: str) -> Tensor:
        return self.tensors[name]

    def __iter__(self) -> Iterator[str]:
        return iter(self.tensors)

    def names(self) -> List[str]:
        return list(self.tensors)

    def count(self) -> int:
        return sum(tensor.size for tensor in self.tensors.values())

    def arrays(self) -> Dict[str, np.ndarray]:
        return {name: tensor.data for name, tensor in self.tensors.items()}

    def grads(self) -> Dict[str, Optional[np.ndarray]]:
        return {name: tensor.grad for name, tensor in self.tensors.items()}

    def assign(self, arrays: Dict[str, np.ndarray]) -> None:
        """Заменяет массивы параметров (обучение, восстановление снимка)."""
        for name, array in arrays.items():
            self.tensors[name].data = array

    def zero_grad(self) -> None:
        for tensor in self.tensors.values():
            tensor.zero_grad()

    def frozen(self) -> "ModelParams":
        """Те же массивы без градиентов: прямой проход не трогает буферы θ."""
        return ModelParams(self.config, {name: tensor.detach() for name, tensor in self.tensors.items()})

    def copy(self) -> "ModelParams":
        return ModelParams.from_arrays(self.config, {name: array.copy() for name, array in self.arrays().items()})

    def equals(self, other: "ModelParams") -> bool:
        """Побитовое равенство параметров."""
        if self.names() != other.names():
            return False
        return all(
            self[name].dtype == other[name].dtype and self[name].data.tobytes() == other[name].data.tobytes()
            for name in self.names()
        )


def build(config: ModelConfig) -> ModelParams:
    """Создаёт и инициализирует параметры модели по конфигурации."""
    infer_shapes(config)
    params = ModelParams.from_arrays(config, initialize(config))
    logger.debug("[MODEL] Построена модель %s: %d параметров", config.name, params.count())
    return params


def conv_layers(config: ModelConfig) -> Dict[str, int]:
    """Имена сверточных слоёв (conv1, conv2, ...) и их индексы."""
    indices = [index for index, layer in enumerate(config.layers) if isinstance(layer, ConvSpec)]
    return {f"conv{number}": index for number, index in enumerate(indices, start=1)}


def resolve_layer(config: ModelConfig, layer: Union[str, int, None]) -> Tuple[str, int]:
    """Имя и индекс сверточного слоя; по умолчанию последний сверточный."""
    layers = conv_layers(config)
    if not layers:
        raise InvalidLayerError(str(layer), [])
    if layer is None:
        name = list(layers)[-1]
        return name, layers[name]
    if isinstance(layer, str) and layer in layers:
        return layer, layers[layer]
    if isinstance(layer, int) or (isinstance(layer, str) and layer.isdigit()):
        index = int(layer)
        for name, conv_index in layers.items():
            if conv_index == index:
                return name, index
    raise InvalidLayerError(str(layer), layers)


def _as_tensor(batch: Union[Tensor, np.ndarray], dtype: np.dtype) -> Tensor:
    if isinstance(batch, Tensor):
        return batch
    return Tensor(np.asarray(batch, dtype=dtype), dtype=dtype)


def forward(params: ModelParams, batch: Union[Tensor, np.ndarray], tap: Optional[int] = None) -> Tuple[Tensor, Optional[Tensor]]:
    """Прямой проход без проверки диапазона пикселей.

    Args:
        params: Параметры модели
        batch: Вход NCHW
        tap: Индекс слоя, выход которого подменяется листом с градиентом

    Returns:
        Логиты N×K и перехваченная активация (или None)
    """
    config = params.config
    x = _as_tensor(batch, np.dtype(config.dtype))
    if x.ndim != 4 or tuple(x.shape[1:]) != tuple(config.input_shape):
        raise ShapeMismatchError("predict", f"ожидался вход N×{'×'.join(map(str, config.input_shape))}", x.shape)
    tapped = None
    for index, layer in enumerate(config.layers):
        x = apply_layer(index, layer, x, params.tensors)
        if index == tap:
            tapped = Tensor(x.data, requires_grad=True, name=f"layer{index}")
            x = tapped
    return x, tapped


def predict(params: ModelParams, batch: Union[Tensor, np.ndarray]) -> Tensor:
    """Логиты N×num_classes для батча изображений в [0, 1]."""
    data = batch.data if isinstance(batch, Tensor) else np.asarray(batch)
    if data.size and (data.min() < 0.0 or data.max() > 1.0):
        raise UsageError("predict: значения пикселей должны лежать в [0, 1]")
    logits, _ = forward(params, batch)
    return logits


def predict_classes(logits: Union[Tensor, np.ndarray]) -> np.ndarray:
    """argmax по строкам; при равенстве берётся меньший индекс класса."""
    data = logits.data if isinstance(logits, Tensor) else np.asarray(logits)
    return data.argmax(axis=1)
