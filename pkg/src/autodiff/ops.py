"""
Примитивные операции с записью в граф.

Все операции проверяют формы входов (без broadcasting, кроме add_bias)
и конечность выхода. Узел графа создаётся, только если хотя бы один вход
требует градиента.
"""
from typing import Any, Callable, Dict, Optional, Sequence, Tuple, Union

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from src.autodiff.sampling import bilinear_corners, affine_coordinates, gather, scatter
from src.autodiff.tensor import BackwardFn, Node, Tensor
from src.core.exceptions import NonFiniteError, ShapeMismatchError, UsageError


def _record(kind: str, inputs: Sequence[Tensor], data: np.ndarray, backward_fn: BackwardFn) -> Tensor:
    if not np.all(np.isfinite(data)):
        raise NonFiniteError(kind)
    requires_grad = any(tensor.requires_grad for tensor in inputs)
    out = Tensor(data, requires_grad=requires_grad, dtype=data.dtype)
    if requires_grad:
        out.node = Node(kind, tuple(inputs), out, backward_fn)
    return out


def _require_ndim(op: str, tensor: Tensor, ndim: int, role: str) -> None:
    if tensor.ndim != ndim:
        raise ShapeMismatchError(op, f"{role} должен быть {ndim}-мерным", tensor.shape)


def _same_shape(op: str, a: Tensor, b: Tensor) -> None:
    if a.shape != b.shape:
        raise ShapeMismatchError(op, "формы входов различаются", [a.shape, b.shape])


# Поэлементные операции

def relu(x: Tensor) -> Tensor:
    mask = x.data > 0

    def backward_fn(grad):
        return (grad * mask,)

    return _record("relu", [x], np.where(mask, x.data, 0).astype(x.dtype), backward_fn)


def scale(x: Tensor, factor: float) -> Tensor:
    factor = float(factor)

    def backward_fn(grad):
        return (grad * factor,)

    return _record("scale", [x], (x.data * factor).astype(x.dtype), backward_fn)


def add(a: Tensor, b: Tensor) -> Tensor:
    _same_shape("add", a, b)

    def backward_fn(grad):
        return grad, grad

    return _record("add", [a, b], a.data + b.data, backward_fn)


def mul(a: Tensor, b: Tensor) -> Tensor:
    _same_shape("mul", a, b)
    a_data, b_data = a.data, b.data

    def backward_fn(grad):
        return grad * b_data, grad * a_data

    return _record("mul", [a, b], a_data * b_data, backward_fn)


def add_bias(x: Tensor, bias: Tensor) -> Tensor:
    """Прибавляет смещение по оси каналов (ось 1)."""
    _require_ndim("add_bias", bias, 1, "bias")
    if x.ndim < 2 or x.shape[1] != bias.shape[0]:
        raise ShapeMismatchError("add_bias", "число каналов не совпадает с bias", [x.shape, bias.shape])
    view = (1, bias.shape[0]) + (1,) * (x.ndim - 2)
    reduce_axes = tuple(axis for axis in range(x.ndim) if axis != 1)

    def backward_fn(grad):
        return grad, grad.sum(axis=reduce_axes)

    return _record("add_bias", [x, bias], x.data + bias.data.reshape(view), backward_fn)


# Редукции

def sum_all(x: Tensor) -> Tensor:
    def backward_fn(grad):
        return (np.full(x.shape, grad, dtype=x.dtype),)

    return _record("sum", [x], np.asarray(x.data.sum(), dtype=x.dtype), backward_fn)


def weighted_sum(x: Tensor, weights: np.ndarray) -> Tensor:
    """Скаляр sum(x * weights) с постоянными весами той же формы."""
    weights = np.asarray(weights, dtype=x.dtype)
    if weights.shape != x.shape:
        raise ShapeMismatchError("weighted_sum", "форма весов не совпадает со входом", [x.shape, weights.shape])

    def backward_fn(grad):
        return (grad * weights,)

    return _record("weighted_sum", [x], np.asarray((x.data * weights).sum(), dtype=x.dtype), backward_fn)


# Линейная алгебра и свёртки

def matmul(a: Tensor, b: Tensor, transpose_b: bool = False) -> Tensor:
    _require_ndim("matmul", a, 2, "левый операнд")
    _require_ndim("matmul", b, 2, "правый операнд")
    inner = b.shape[1] if transpose_b else b.shape[0]
    if a.shape[1] != inner:
        raise ShapeMismatchError("matmul", "внутренние размерности не совпадают", [a.shape, b.shape])
    a_data, b_data = a.data, b.data
    right = b_data.T if transpose_b else b_data

    def backward_fn(grad):
        grad_a = grad @ right.T
        grad_b = grad.T @ a_data if transpose_b else a_data.T @ grad
        return grad_a, grad_b

    return _record("matmul", [a, b], a_data @ right, backward_fn)


def conv2d(x: Tensor, weight: Tensor, stride: int = 1, padding: int = 0) -> Tensor:
    """Свёртка NCHW с ядром (O, C, kh, kw), без смещения."""
    _require_ndim("conv2d", x, 4, "вход")
    _require_ndim("conv2d", weight, 4, "ядро")
    if x.shape[1] != weight.shape[1]:
        raise ShapeMismatchError("conv2d", "число каналов входа не совпадает с ядром", [x.shape, weight.shape])
    if stride < 1 or padding < 0:
        raise ShapeMismatchError("conv2d", f"недопустимые stride={stride} или padding={padding}")
    batch, _, height, width = x.shape
    out_channels, _, kh, kw = weight.shape
    padded = np.pad(x.data, ((0, 0), (0, 0), (padding, padding), (padding, padding)))
    if padded.shape[2] < kh or padded.shape[3] < kw:
        raise ShapeMismatchError("conv2d", "ядро больше входа", [x.shape, weight.shape])
    windows = sliding_window_view(padded, (kh, kw), axis=(2, 3))[:, :, ::stride, ::stride]
    out_h, out_w = windows.shape[2], windows.shape[3]
    w_data = weight.data
    out = np.tensordot(windows, w_data, axes=([1, 4, 5], [1, 2, 3])).transpose(0, 3, 1, 2)

    def backward_fn(grad):
        grad_w = np.tensordot(grad, windows, axes=([0, 2, 3], [0, 2, 3]))
        grad_cols = np.tensordot(grad, w_data, axes=([1], [0]))
        grad_padded = np.zeros_like(padded)
        for i in range(kh):
            for j in range(kw):
                grad_padded[:, :, i:i + stride * out_h:stride, j:j + stride * out_w:stride] += \
                    grad_cols[:, :, :, :, i, j].transpose(0, 3, 1, 2)
        grad_x = grad_padded[:, :, padding:padding + height, padding:padding + width]
        return grad_x, grad_w

    return _record("conv2d", [x, weight], np.ascontiguousarray(out), backward_fn)


def maxpool2d(x: Tensor, window: int) -> Tensor:
    """Неперекрывающийся max-pooling; хвост, не кратный окну, отбрасывается."""
    _require_ndim("maxpool2d", x, 4, "вход")
    batch, channels, height, width = x.shape
    if window < 1:
        raise ShapeMismatchError("maxpool2d", f"окно {window} должно быть положительным", x.shape)
    out_h, out_w = height // window, width // window
    if out_h == 0 or out_w == 0:
        raise ShapeMismatchError("maxpool2d", f"окно {window} больше входа", x.shape)
    blocks = (
        x.data[:, :, :out_h * window, :out_w * window]
        .reshape(batch, channels, out_h, window, out_w, window)
        .transpose(0, 1, 2, 4, 3, 5)
        .reshape(batch, channels, out_h, out_w, window * window)
    )
    # При равенстве выбирается первый максимум
    index = blocks.argmax(axis=-1)[..., None]
    out = np.take_along_axis(blocks, index, axis=-1)[..., 0]

    def backward_fn(grad):
        grad_blocks = np.zeros_like(blocks)
        np.put_along_axis(grad_blocks, index, grad[..., None], axis=-1)
        grad_x = np.zeros_like(x.data)
        grad_x[:, :, :out_h * window, :out_w * window] = (
            grad_blocks.reshape(batch, channels, out_h, out_w, window, window)
            .transpose(0, 1, 2, 4, 3, 5)
            .reshape(batch, channels, out_h * window, out_w * window)
        )
        return (grad_x,)

    return _record("maxpool2d", [x], out, backward_fn)


def flatten(x: Tensor) -> Tensor:
    if x.ndim < 2:
        raise ShapeMismatchError("flatten", "нужна хотя бы одна ось после батча", x.shape)
    shape = x.shape

    def backward_fn(grad):
        return (grad.reshape(shape),)

    return _record("flatten", [x], x.data.reshape(shape[0], -1), backward_fn)


def affine_sample(x: Tensor, matrix: np.ndarray, out_hw: Optional[Tuple[int, int]] = None, fill: str = "zero") -> Tensor:
    """Билинейная выборка NCHW по аффинной матрице; градиент по входу."""
    _require_ndim("affine_sample", x, 4, "вход")
    out_hw = tuple(out_hw) if out_hw is not None else x.shape[2:]
    src_x, src_y = affine_coordinates(matrix, out_hw, batch=x.shape[0])
    corners = bilinear_corners(src_x, src_y, x.shape[2:], fill=fill)
    in_shape = x.shape

    def backward_fn(grad):
        return (scatter(grad, corners, in_shape),)

    return _record("affine_sample", [x], gather(x.data, corners), backward_fn)


# Функция потерь

def _one_hot(op: str, labels: np.ndarray, num_classes: int, dtype: np.dtype) -> np.ndarray:
    if labels.ndim == 1:
        if labels.size and (labels.min() < 0 or labels.max() >= num_classes):
            raise ShapeMismatchError(op, f"метка вне диапазона [0, {num_classes})", labels.shape)
        target = np.zeros((labels.shape[0], num_classes), dtype=dtype)
        target[np.arange(labels.shape[0]), labels.astype(np.int64)] = 1
        return target
    return labels.astype(dtype)


def softmax_cross_entropy(logits: Tensor, labels: Union[np.ndarray, Sequence[int]], reduction: str = "mean") -> Tensor:
    """Softmax и перекрёстная энтропия одним примитивом (через log-sum-exp).

    Args:
        logits: Логиты N×K
        labels: Индексы классов (N,) или распределения N×K
        reduction: "mean" или "sum" по батчу

    Returns:
        Скалярная функция потерь J
    """
    _require_ndim("softmax_cross_entropy", logits, 2, "логиты")
    labels = np.asarray(labels)
    target = _one_hot("softmax_cross_entropy", labels, logits.shape[1], logits.dtype)
    if target.shape != logits.shape:
        raise ShapeMismatchError("softmax_cross_entropy", "метки не совпадают с логитами", [logits.shape, target.shape])
    if reduction not in ("mean", "sum"):
        raise UsageError(f"softmax_cross_entropy: неизвестная редукция {reduction}")
    shifted = logits.data - logits.data.max(axis=1, keepdims=True)
    log_probs = shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    divisor = logits.shape[0] if reduction == "mean" else 1
    loss = -(target * log_probs).sum() / divisor
    probs = np.exp(log_probs)

    def backward_fn(grad):
        return ((probs - target) * (grad / divisor),)

    return _record("softmax_cross_entropy", [logits], np.asarray(loss, dtype=logits.dtype), backward_fn)


def softmax(logits: np.ndarray) -> np.ndarray:
    """Вероятности классов без записи в граф."""
    shifted = logits - logits.max(axis=-1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=-1, keepdims=True)


OPS: Dict[str, Callable[..., Tensor]] = {
    "conv2d": conv2d,
    "matmul": matmul,
    "relu": relu,
    "maxpool2d": maxpool2d,
    "add_bias": add_bias,
    "flatten": flatten,
    "softmax_cross_entropy": softmax_cross_entropy,
    "scale": scale,
    "affine_sample": affine_sample,
    "add": add,
    "mul": mul,
    "sum": sum_all,
    "weighted_sum": weighted_sum,
}


def forward_op(kind: str, inputs: Sequence[Any], params: Optional[Dict[str, Any]] = None) -> Tensor:
    """Выполняет примитив по имени.

    Args:
        kind: Имя примитива из OPS
        inputs: Входные тензоры (и постоянные массивы, где примитив их принимает)
        params: Атрибуты операции (stride, padding, window, ...)
    """
    op = OPS.get(kind)
    if op is None:
        raise UsageError(f"неизвестная операция '{kind}'; доступны: {', '.join(sorted(OPS))}")
    return op(*inputs, **(params or {}))
