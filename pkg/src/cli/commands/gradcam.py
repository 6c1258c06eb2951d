"""
Подкоманда gradcam: наложения карт значимости и оценки содержания в маске.
"""
import argparse
import logging
from pathlib import Path

import numpy as np

from src.cli.commands.common import add_checkpoint_arguments, load_model, open_split
from src.core.constants import OVERLAY_ALPHA
from src.model.network import resolve_layer
from src.repository.artifacts import write_json
from src.repository.images import encode_image
from src.service.colormap import overlay
from src.service.gradcam import explain_samples

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser("gradcam", help="Карты Grad-CAM",
                                   description="Наложения Grad-CAM и scores.json с долей значимости внутри маски")
    add_checkpoint_arguments(parser, "gradcam")
    parser.add_argument("--layer", default=None, help="Сверточный слой: conv1, conv2, ... или индекс")
    parser.add_argument("--include-misclassified", dest="include_misclassified", action="store_true",
                        help="Строить карты и для ошибочно классифицированных снимков")
    parser.add_argument("--label", type=int, default=None, help="Только снимки этого класса")
    parser.add_argument("--limit", type=int, default=None, help="Не больше стольких карт")
    parser.add_argument("--alpha", type=float, default=OVERLAY_ALPHA, help="Прозрачность наложения")
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace) -> int:
    params = load_model(args.checkpoint)
    # Слой проверяется до чтения данных
    layer, _ = resolve_layer(params.config, args.layer)
    dataset = open_split(args.manifest, params, args.split)
    explanations = explain_samples(params, dataset.samples(args.split), layer=layer,
                                   include_misclassified=args.include_misclassified, label=args.label)
    explanations = explanations[:args.limit]
    output = Path(args.output)

    entries = []
    for index, explanation in enumerate(explanations):
        sample, heatmap = explanation.sample, explanation.heatmap
        stem = f"{index:04d}_{Path(sample.path).stem}"
        overlay_path = encode_image(output / "overlays" / f"{stem}.png", overlay(heatmap.map, sample.image[0], args.alpha))
        entries.append({
            "source": sample.path,
            "overlay": str(overlay_path.relative_to(output)),
            "label": sample.label,
            "predicted": heatmap.predicted,
            "probability": heatmap.probability,
            "class_id": heatmap.class_id,
            "zero_map": heatmap.zero_map,
            "score": explanation.score.model_dump(mode="json") if explanation.score is not None else None,
        })

    scored = [entry["score"]["containment"] for entry in entries if entry["score"] is not None]
    summary = {
        "layer": layer,
        "maps": len(entries),
        "mean_containment": float(np.mean(scored)) if scored else None,
        "images": entries,
    }
    write_json(output / "scores.json", summary)
    if scored:
        print(f"{layer}: карт {len(entries)}, средняя доля внутри маски {summary['mean_containment']:.4f}")
    else:
        print(f"{layer}: карт {len(entries)}; масок нет, доля не считалась")
    return 0
