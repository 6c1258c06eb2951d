from typing import Callable, Union

import numpy as np

from src.autodiff.tensor import Tensor, backward
from src.core.exceptions import NonFiniteError, ShapeMismatchError


def _evaluate(f: Callable[[Tensor], Tensor], values: np.ndarray) -> float:
    out = f(Tensor(values.copy(), dtype=np.float64))
    if out.size != 1:
        raise ShapeMismatchError("gradient_check", "функция должна возвращать скаляр", out.shape)
    value = out.item()
    if not np.isfinite(value):
        raise NonFiniteError("gradient_check", "промежуточное значение")
    return value


def gradient_check(f: Callable[[Tensor], Tensor], point: Union[Tensor, np.ndarray], step: float = 1e-5) -> float:
    """Сравнивает аналитический градиент с центральными разностями.

    Вычисления всегда в float64.

    Returns:
        max |analytic - numeric| / max(1, |analytic|, |numeric|)
    """
    values = np.array(point.data if isinstance(point, Tensor) else point, dtype=np.float64)
    if not np.all(np.isfinite(values)):
        raise NonFiniteError("gradient_check", "точка")

    leaf = Tensor(values.copy(), requires_grad=True, dtype=np.float64)
    out = f(leaf)
    if out.size != 1:
        raise ShapeMismatchError("gradient_check", "функция должна возвращать скаляр", out.shape)
    backward(out)
    analytic = leaf.grad if leaf.grad is not None else np.zeros_like(values)

    numeric = np.zeros_like(values)
    flat = values.reshape(-1)
    for index in range(flat.size):
        original = flat[index]
        flat[index] = original + step
        plus = _evaluate(f, values)
        flat[index] = original - step
        minus = _evaluate(f, values)
        flat[index] = original
        numeric.reshape(-1)[index] = (plus - minus) / (2.0 * step)

    denominator = np.maximum(1.0, np.maximum(np.abs(analytic), np.abs(numeric)))
    errors = np.abs(analytic - numeric) / denominator
    return float(errors.max()) if errors.size else 0.0
