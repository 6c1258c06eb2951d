from dataclasses import dataclass
from typing import List, Literal

import numpy as np
from pydantic import Field, field_validator, model_validator

from src.core import constants
from src.scheme.base import BaseSchema


class AttackConfig(BaseSchema):
    """Параметры FGSM: бюджет ε и границы обрезки."""
    epsilon: float = Field(default=constants.EPSILON, ge=0.0, le=1.0)
    clip_min: float = constants.CLIP_MIN
    clip_max: float = constants.CLIP_MAX
    target: Literal["true-label"] = "true-label"
    sweep: List[float] = Field(default_factory=list, description="Дополнительные ε для оценки")

    @field_validator("sweep")
    @classmethod
    def check_sweep(cls, value: List[float]) -> List[float]:
        for epsilon in value:
            if not 0.0 <= epsilon <= 1.0:
                raise ValueError(f"ε вне [0, 1]: {epsilon}")
        return value

    @model_validator(mode="after")
    def check_bounds(self) -> "AttackConfig":
        if self.clip_min >= self.clip_max:
            raise ValueError("clip_min должен быть меньше clip_max")
        return self

    def epsilons(self) -> List[float]:
        """Основной ε и ε из списка, без повторов, в исходном порядке."""
        values = []
        for epsilon in [self.epsilon, *self.sweep]:
            if epsilon not in values:
                values.append(epsilon)
        return values


@dataclass(frozen=True)
class PerturbedBatch:
    """Состязательные изображения x_adv, возмущение η и исходные метки."""
    images: np.ndarray
    eta: np.ndarray
    labels: np.ndarray
