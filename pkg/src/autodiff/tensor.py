"""
Тензор с обратным автоматическим дифференцированием.

Тензор хранит numpy-массив в раскладке row-major (изображения в NCHW) и,
если он получен операцией над тензорами с requires_grad, ссылку на узел
графа. Граф восстанавливается от выхода при обратном проходе и после
прохода помечается как использованный.
"""
import logging
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.core.exceptions import GraphConsumedError, NonFiniteError

logger = logging.getLogger(__name__)

DEFAULT_DTYPE = np.float32
FLOAT_DTYPES = (np.float32, np.float64)

BackwardFn = Callable[[np.ndarray], Sequence[Optional[np.ndarray]]]


def resolve_dtype(data: Any, dtype: Any = None) -> np.dtype:
    """Тип по умолчанию float32; float64 сохраняется, если выбран явно."""
    if dtype is not None:
        resolved = np.dtype(dtype)
    elif isinstance(data, (np.ndarray, np.generic)) and data.dtype == np.float64:
        resolved = np.dtype(np.float64)
    else:
        resolved = np.dtype(DEFAULT_DTYPE)
    if resolved.type not in FLOAT_DTYPES:
        raise TypeError(f"поддерживаются только float32/float64, получено {resolved}")
    return resolved


class Tensor:
    """N-мерный массив с буфером градиента."""
    __slots__ = ("data", "requires_grad", "grad", "node", "name")

    def __init__(self, data: Any, requires_grad: bool = False, dtype: Any = None, name: Optional[str] = None):
        self.data: np.ndarray = np.asarray(data, dtype=resolve_dtype(data, dtype))
        self.requires_grad = requires_grad
        self.grad: Optional[np.ndarray] = None
        self.node: Optional["Node"] = None
        self.name = name

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.data.shape

    @property
    def dtype(self) -> np.dtype:
        return self.data.dtype

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return int(self.data.size)

    @property
    def is_leaf(self) -> bool:
        return self.node is None

    def item(self) -> float:
        return float(self.data.reshape(-1)[0]) if self.data.size == 1 else float("nan")

    def numpy(self) -> np.ndarray:
        return self.data

    def detach(self) -> "Tensor":
        """Тот же массив без градиента и без графа."""
        return Tensor(self.data, requires_grad=False, dtype=self.data.dtype, name=self.name)

    def zero_grad(self) -> None:
        self.grad = None

    def __repr__(self) -> str:
        flag = ", requires_grad=True" if self.requires_grad else ""
        return f"Tensor(shape={list(self.shape)}, dtype={self.dtype}{flag})"


class Node:
    """Записанная примитивная операция."""
    __slots__ = ("kind", "inputs", "output", "backward_fn", "consumed")

    def __init__(self, kind: str, inputs: Tuple[Tensor, ...], output: Tensor, backward_fn: BackwardFn):
        self.kind = kind
        self.inputs = inputs
        self.output = output
        self.backward_fn: Optional[BackwardFn] = backward_fn
        self.consumed = False

    def release(self) -> None:
        # Замыкание держит сохранённые массивы прямого прохода
        self.backward_fn = None
        self.consumed = True


class Graph:
    """Узлы, ведущие к выходу, в топологическом порядке."""

    def __init__(self, nodes: List[Node]):
        self.nodes = nodes

    @classmethod
    def trace(cls, output: Tensor) -> "Graph":
        order: List[Node] = []
        visited = set()
        if output.node is None:
            return cls(order)
        stack: List[Tuple[Node, bool]] = [(output.node, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            if id(node) in visited:
                continue
            visited.add(id(node))
            stack.append((node, True))
            for tensor in reversed(node.inputs):
                if tensor.node is not None and id(tensor.node) not in visited:
                    stack.append((tensor.node, False))
        return cls(order)

    @property
    def consumed(self) -> bool:
        return any(node.consumed for node in self.nodes)

    def __len__(self) -> int:
        return len(self.nodes)


def _check_gradient(kind: str, grad: np.ndarray) -> None:
    if not np.all(np.isfinite(grad)):
        raise NonFiniteError(kind, "градиент")


def backward(loss: Tensor, seed: Optional[np.ndarray] = None) -> Graph:
    """Обратный проход от скалярного (или заданного seed) выхода.

    Градиенты листьев накапливаются в их буфере grad, промежуточные
    тензоры получают итоговый градиент. Граф помечается использованным.

    Args:
        loss: Выход прямого прохода
        seed: Начальный градиент; по умолчанию единицы

    Returns:
        Пройденный граф
    """
    if seed is None:
        if loss.size != 1:
            raise ValueError(f"seed обязателен для нескалярного выхода формы {list(loss.shape)}")
        seed = np.ones_like(loss.data)
    seed = np.asarray(seed, dtype=loss.dtype)

    graph = Graph.trace(loss)
    if graph.consumed:
        raise GraphConsumedError("граф уже использован обратным проходом")

    if loss.node is None:
        if loss.requires_grad:
            loss.grad = seed.copy() if loss.grad is None else loss.grad + seed
        return graph

    pending: Dict[int, np.ndarray] = {id(loss): seed}
    for node in reversed(graph.nodes):
        grad = pending.pop(id(node.output), None)
        if grad is None:
            node.release()
            continue
        node.output.grad = grad
        input_grads = node.backward_fn(grad)
        for tensor, tensor_grad in zip(node.inputs, input_grads):
            if tensor_grad is None or not tensor.requires_grad:
                continue
            _check_gradient(node.kind, tensor_grad)
            if tensor.node is None:
                tensor.grad = tensor_grad.astype(tensor.dtype, copy=True) if tensor.grad is None else tensor.grad + tensor_grad
            else:
                key = id(tensor)
                pending[key] = tensor_grad if key not in pending else pending[key] + tensor_grad
        node.release()
    logger.debug("Обратный проход: %d узлов", len(graph))
    return graph
