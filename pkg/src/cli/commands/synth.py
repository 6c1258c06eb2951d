"""
Подкоманда synth: синтетический датасет с манифестом.
"""
import argparse
from pathlib import Path

from pydantic import ValidationError

from src.cli.commands.common import read_config_file, validation_message
from src.core.exceptions import ConfigError
from src.scheme.data import SyntheticConfig
from src.service.synthetic import generate_dataset


def register(subparsers) -> None:
    parser = subparsers.add_parser("synth", help="Синтетический датасет",
                                   description="Пишет изображения, маски лёгких и manifest.csv")
    parser.add_argument("output", help="Каталог датасета")
    parser.add_argument("--config", help="JSON-файл SyntheticConfig")
    parser.add_argument("--size", type=int, help="Сторона изображения")
    parser.add_argument("--classes", dest="num_classes", type=int, help="Число классов")
    parser.add_argument("--texture", dest="texture_amplitude", type=int, help="Амплитуда текстуры")
    parser.add_argument("--stamp", dest="stamp_amplitude", type=int, help="Яркость штампа")
    parser.add_argument("--seed", type=int, help="Seed генератора")
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace) -> int:
    payload = read_config_file(Path(args.config)) if args.config else {}
    for key in ("size", "num_classes", "texture_amplitude", "stamp_amplitude", "seed"):
        value = getattr(args, key)
        if value is not None:
            payload[key] = value
    try:
        config = SyntheticConfig.model_validate(payload)
    except ValidationError as exc:
        raise ConfigError(f"конфигурация генератора не прошла проверку: {validation_message(exc)}") from exc
    manifest = generate_dataset(config, args.output)
    print(manifest)
    return 0
