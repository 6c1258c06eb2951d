"""
Общие аргументы и загрузка конфигурации для подкоманд.
"""
import argparse
import json
import logging
from pathlib import Path
from typing import Any, Dict, Optional

from pydantic import ValidationError

from src.core.config import settings
from src.core.constants import POSITIVE_CLASS, SPLITS
from src.core.exceptions import ConfigError, MissingFileError
from src.model.network import ModelParams
from src.repository.checkpoint import load_checkpoint
from src.repository.manifest import load_manifest
from src.scheme.run import RunConfig
from src.service.dataset import DatasetService

logger = logging.getLogger(__name__)


def validation_message(exc: ValidationError) -> str:
    """Ошибки pydantic одной строкой: путь поля и сообщение."""
    parts = []
    for error in exc.errors():
        location = ".".join(str(item) for item in error.get("loc", ()))
        parts.append(f"{location or '<корень>'}: {error.get('msg', '')}")
    return "; ".join(parts)


def read_config_file(path: Path) -> Dict[str, Any]:
    if not path.is_file():
        raise MissingFileError(f"конфигурация не найдена: {path}")
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: некорректный JSON: {exc}") from exc
    if not isinstance(payload, dict):
        raise ConfigError(f"{path}: ожидался JSON-объект")
    # Относительный путь к манифесту считается от каталога конфигурации
    manifest = payload.get("manifest")
    if isinstance(manifest, str) and not Path(manifest).is_absolute():
        payload["manifest"] = str((path.parent / manifest).resolve())
    return payload


def load_run_config(path: Optional[str], overrides: Dict[str, Any]) -> RunConfig:
    """Конфигурация из JSON-файла с плоскими переопределениями флагов.

    Переопределения проверяются той же схемой, что и файл.
    """
    payload = read_config_file(Path(path)) if path else {}
    for key, value in overrides.items():
        if value is None:
            continue
        if key == "epsilon":
            attack = dict(payload.get("attack") or {})
            attack["epsilon"] = value
            payload["attack"] = attack
        else:
            payload[key] = value
    try:
        return RunConfig.model_validate(payload)
    except ValidationError as exc:
        raise ConfigError(f"конфигурация не прошла проверку: {validation_message(exc)}") from exc


def add_run_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON-файл RunConfig")
    parser.add_argument("--manifest", help="CSV-манифест датасета")
    parser.add_argument("--seed", type=int, help="Базовый seed")
    parser.add_argument("--rounds", type=int, help="Число раундов")
    parser.add_argument("--epsilon", type=float, help="Бюджет FGSM")
    parser.add_argument("--max-epochs", dest="max_epochs", type=int, help="Максимум эпох")
    parser.add_argument("--batch-size", dest="batch_size", type=int, help="Размер батча")
    parser.add_argument("--model", help="Имя модели из набора (tiny, vgg-mini, linear)")
    parser.add_argument("--output", help="Каталог результатов")


def run_overrides(args: argparse.Namespace) -> Dict[str, Any]:
    return {
        "manifest": args.manifest,
        "seed": args.seed,
        "rounds": args.rounds,
        "epsilon": args.epsilon,
        "max_epochs": args.max_epochs,
        "batch_size": args.batch_size,
        "model": args.model,
        "output_dir": args.output,
    }


def add_checkpoint_arguments(parser: argparse.ArgumentParser, default_output: str) -> None:
    parser.add_argument("--checkpoint", required=True, help="Файл контрольной точки")
    parser.add_argument("--manifest", required=True, help="CSV-манифест датасета")
    parser.add_argument("--split", default="test", choices=SPLITS, help="Выборка (по умолчанию test)")
    parser.add_argument("--positive-class", dest="positive_class", type=int, default=None,
                        help="Положительный класс основных метрик")
    parser.add_argument("--output", default=str(Path(settings.DEFAULT_OUTPUT_DIR) / default_output),
                        help="Каталог результатов")


def load_model(path: str) -> ModelParams:
    checkpoint = load_checkpoint(path)
    return checkpoint.to_params(requires_grad=False)


def open_split(manifest: str, params: ModelParams, split: str) -> DatasetService:
    """Датасет под вход модели из контрольной точки; выборка должна быть непустой."""
    config = params.config
    loaded = load_manifest(manifest, num_classes=config.num_classes, check_files=True)
    loaded.require_split(split)
    return DatasetService(loaded, tuple(config.input_shape[1:]))


def positive_class(args: argparse.Namespace, params: ModelParams) -> int:
    value = POSITIVE_CLASS if args.positive_class is None else args.positive_class
    if not 0 <= value < params.config.num_classes:
        raise ConfigError(f"положительный класс {value} вне [0, {params.config.num_classes})")
    return value
