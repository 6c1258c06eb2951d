"""
Подкоманда stamp: чувствительность карт значимости к выжженной метке.
"""
import argparse

from src.cli.commands.common import add_run_arguments, load_run_config, run_overrides
from src.service.experiment import stamp_experiment


def register(subparsers) -> None:
    parser = subparsers.add_parser("stamp", help="Эксперимент со штампом",
                                   description="Обучает пары моделей и сравнивает массу значимости в области штампа")
    add_run_arguments(parser)
    parser.add_argument("--seeds", type=int, nargs="+", default=[0], help="Seed каждой пары моделей")
    parser.add_argument("--layer", default=None, help="Сверточный слой для Grad-CAM")
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace) -> int:
    config = load_run_config(args.config, run_overrides(args))
    comparisons = stamp_experiment(config, args.seeds, layer=args.layer)
    for comparison in comparisons:
        print(f"seed {comparison.seed}: масса штампа {comparison.standard.stamp_mass:.4f} (стандартная), "
              f"{comparison.robust.stamp_mass:.4f} (устойчивая)")
    return 0
