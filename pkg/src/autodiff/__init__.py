from src.autodiff.tensor import Tensor, Node, Graph, backward, DEFAULT_DTYPE
from src.autodiff.ops import (
    forward_op, OPS,
    conv2d, matmul, relu, maxpool2d, add_bias, flatten,
    softmax_cross_entropy, softmax, scale, affine_sample,
    add, mul, sum_all, weighted_sum
)
from src.autodiff.gradcheck import gradient_check

# Скалярная функция потерь J: 0-мерный тензор с цепочкой узлов
LossValue = Tensor

__all__ = [
    # Граф
    "Tensor",
    "Node",
    "Graph",
    "backward",
    "DEFAULT_DTYPE",
    "LossValue",

    # Операции
    "forward_op",
    "OPS",
    "conv2d",
    "matmul",
    "relu",
    "maxpool2d",
    "add_bias",
    "flatten",
    "softmax_cross_entropy",
    "softmax",
    "scale",
    "affine_sample",
    "add",
    "mul",
    "sum_all",
    "weighted_sum",

    # Проверка
    "gradient_check"
]
