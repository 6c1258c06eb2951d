"""
Общие фикстуры: синтетические датасеты и маленькие модели.
"""
from pathlib import Path
from typing import Callable

import numpy as np
import pytest

from src.model.network import ModelParams, build
from src.model.zoo import linear, tiny
from src.scheme.data import SyntheticConfig
from src.scheme.model import ModelConfig
from src.scheme.run import OptimizerConfig, RunConfig
from src.service.synthetic import generate_dataset

SIZE = 16


@pytest.fixture
def make_dataset(tmp_path) -> Callable[..., Path]:
    """Фабрика синтетических датасетов 16×16; возвращает путь к манифесту."""

    def factory(name: str = "data", **overrides) -> Path:
        values = dict(size=SIZE, num_classes=2, counts={"train": 40, "val": 10, "test": 20})
        values.update(overrides)
        manifest = generate_dataset(SyntheticConfig(**values), tmp_path / name)
        return manifest

    return factory


@pytest.fixture
def blob_manifest(make_dataset) -> Path:
    return make_dataset("blob", texture_amplitude=3)


def run_config(manifest: Path, output: Path, **overrides) -> RunConfig:
    values = dict(
        model="linear",
        manifest=str(manifest),
        image_size=(SIZE, SIZE),
        num_classes=2,
        positive_class=1,
        augmentation=None,
        optimizer=OptimizerConfig(learning_rate=0.01),
        batch_size=16,
        max_epochs=3,
        rounds=1,
        seed=0,
        output_dir=str(output)
    )
    values.update(overrides)
    return RunConfig(**values)


@pytest.fixture
def make_run_config() -> Callable[..., RunConfig]:
    return run_config


@pytest.fixture
def tiny_config() -> ModelConfig:
    return tiny(input_shape=(1, SIZE, SIZE), num_classes=3, seed=0)


@pytest.fixture
def tiny_params(tiny_config) -> ModelParams:
    return build(tiny_config)


@pytest.fixture
def linear_params() -> ModelParams:
    return build(linear(input_shape=(1, 4, 4), num_classes=2, seed=1, dtype="float64"))


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)
