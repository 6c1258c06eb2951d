from typing import Annotated, List, Literal, Tuple, Union

from pydantic import Field, model_validator

from src.core.constants import NUM_CLASSES
from src.scheme.base import BaseSchema


class ConvSpec(BaseSchema):
    """Сверточный слой."""
    kind: Literal["conv"] = "conv"
    out_channels: int = Field(..., gt=0)
    kernel: int = Field(default=3, gt=0)
    stride: int = Field(default=1, gt=0)
    pad: int = Field(default=0, ge=0)


class MaxPoolSpec(BaseSchema):
    """Max-pooling с квадратным окном."""
    kind: Literal["maxpool"] = "maxpool"
    window: int = Field(default=2, gt=0)


class DenseSpec(BaseSchema):
    """Полносвязный слой."""
    kind: Literal["dense"] = "dense"
    width: int = Field(..., gt=0)


class ReluSpec(BaseSchema):
    kind: Literal["relu"] = "relu"


class FlattenSpec(BaseSchema):
    kind: Literal["flatten"] = "flatten"


LayerSpec = Annotated[
    Union[ConvSpec, MaxPoolSpec, DenseSpec, ReluSpec, FlattenSpec],
    Field(discriminator="kind")
]


class ModelConfig(BaseSchema):
    """Описание архитектуры по слоям."""
    name: str = "tiny"
    input_shape: Tuple[int, int, int] = Field(..., description="Форма входа (C, H, W)")
    layers: List[LayerSpec]
    num_classes: int = Field(default=NUM_CLASSES, gt=0)
    seed: int = Field(default=0, ge=0)
    dtype: Literal["float32", "float64"] = "float32"

    @model_validator(mode="after")
    def check_shapes(self) -> "ModelConfig":
        # Импорт здесь: модуль слоёв сам зависит от схем
        from src.model.layers import infer_shapes
        infer_shapes(self)
        return self
