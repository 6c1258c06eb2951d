"""
Эталонные конфигурации моделей.
"""
from typing import Callable, Dict, Tuple

from src.core.constants import NUM_CLASSES
from src.scheme.model import ConvSpec, DenseSpec, FlattenSpec, MaxPoolSpec, ModelConfig, ReluSpec

InputShape = Tuple[int, int, int]


def tiny(input_shape: InputShape = (1, 64, 64), num_classes: int = NUM_CLASSES, seed: int = 0,
         dtype: str = "float32") -> ModelConfig:
    """Две свёртки и один полносвязный слой."""
    return ModelConfig(
        name="tiny",
        input_shape=input_shape,
        layers=[
            ConvSpec(out_channels=8, kernel=3, pad=1),
            ReluSpec(),
            MaxPoolSpec(window=2),
            ConvSpec(out_channels=16, kernel=3, pad=1),
            ReluSpec(),
            MaxPoolSpec(window=2),
            FlattenSpec(),
            DenseSpec(width=num_classes),
        ],
        num_classes=num_classes,
        seed=seed,
        dtype=dtype
    )


def vgg_mini(input_shape: InputShape = (1, 64, 64), num_classes: int = NUM_CLASSES, seed: int = 0,
             dtype: str = "float32") -> ModelConfig:
    """Четыре блока 3×3-свёртка + ReLU + pooling в стиле VGG."""
    layers = []
    for channels in (8, 16, 32, 32):
        layers += [ConvSpec(out_channels=channels, kernel=3, pad=1), ReluSpec(), MaxPoolSpec(window=2)]
    layers += [FlattenSpec(), DenseSpec(width=num_classes)]
    return ModelConfig(
        name="vgg-mini",
        input_shape=input_shape,
        layers=layers,
        num_classes=num_classes,
        seed=seed,
        dtype=dtype
    )


def linear(input_shape: InputShape = (1, 64, 64), num_classes: int = NUM_CLASSES, seed: int = 0,
           dtype: str = "float32") -> ModelConfig:
    """Логистическая регрессия по пикселям (без свёрток)."""
    return ModelConfig(
        name="linear",
        input_shape=input_shape,
        layers=[FlattenSpec(), DenseSpec(width=num_classes)],
        num_classes=num_classes,
        seed=seed,
        dtype=dtype
    )


ZOO: Dict[str, Callable[..., ModelConfig]] = {
    "tiny": tiny,
    "vgg-mini": vgg_mini,
    "linear": linear,
}
