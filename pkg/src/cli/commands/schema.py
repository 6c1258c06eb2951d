"""
Подкоманда schema: JSON Schema конфигурации эксперимента.
"""
import argparse
import json

from src.scheme.data import SyntheticConfig
from src.scheme.run import RunConfig

SCHEMAS = {
    "run": RunConfig,
    "synth": SyntheticConfig,
}


def register(subparsers) -> None:
    parser = subparsers.add_parser("schema", help="JSON Schema конфигурации")
    parser.add_argument("kind", nargs="?", default="run", choices=sorted(SCHEMAS), help="Какая конфигурация")
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace) -> int:
    print(json.dumps(SCHEMAS[args.kind].model_json_schema(), ensure_ascii=False, indent=2))
    return 0
