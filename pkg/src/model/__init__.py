from src.model.network import (
    ModelParams, build, forward, predict, predict_classes, conv_layers, resolve_layer
)
from src.model.zoo import ZOO, tiny, vgg_mini, linear

__all__ = [
    "ModelParams",
    "build",
    "forward",
    "predict",
    "predict_classes",
    "conv_layers",
    "resolve_layer",
    "ZOO",
    "tiny",
    "vgg_mini",
    "linear"
]
