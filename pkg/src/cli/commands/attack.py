"""
Подкоманда attack: FGSM-изображения и смена предсказаний по каждому снимку.
"""
import argparse
import logging
from pathlib import Path

import numpy as np

from src.cli.commands.common import add_checkpoint_arguments, load_model, open_split
from src.cli.commands.evaluate import attack_config
from src.repository.artifacts import write_json
from src.repository.images import encode_image
from src.service.adversarial import fgsm, predict_batches

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser("attack", help="FGSM-изображения для просмотра",
                                   description="Пишет FGSM-двойники снимков и flips.json со сменой предсказаний")
    add_checkpoint_arguments(parser, "attack")
    parser.add_argument("--epsilon", type=float, default=None, help="Бюджет FGSM (по умолчанию 0.02)")
    parser.add_argument("--limit", type=int, default=None, help="Не больше стольких снимков")
    parser.add_argument("--amplify", action="store_true",
                        help="Дополнительно записать возмущение, растянутое в [0, 1]")
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace) -> int:
    params = load_model(args.checkpoint)
    dataset = open_split(args.manifest, params, args.split)
    attack = attack_config(args.epsilon)
    samples = dataset.samples(args.split)[:args.limit]
    output = Path(args.output)

    images = np.stack([sample.image for sample in samples])
    labels = np.array([sample.label for sample in samples], dtype=np.int64)
    perturbed = fgsm(params, images, labels, attack)
    _, clean_predictions = predict_batches(params, images)
    _, adversarial_predictions = predict_batches(params, perturbed.images)

    flips = []
    for index, sample in enumerate(samples):
        stem = f"{index:04d}_{Path(sample.path).stem}"
        image_path = encode_image(output / "images" / f"{stem}.png", perturbed.images[index])
        entry = {
            "source": sample.path,
            "image": str(image_path.relative_to(output)),
            "label": sample.label,
            "clean_prediction": int(clean_predictions[index]),
            "adversarial_prediction": int(adversarial_predictions[index]),
            "flipped": bool(clean_predictions[index] != adversarial_predictions[index]),
        }
        if args.amplify:
            scale = attack.epsilon if attack.epsilon > 0 else 1.0
            amplified = 0.5 + perturbed.eta[index] / (2.0 * scale)
            entry["perturbation"] = str(encode_image(output / "perturbation" / f"{stem}.png", amplified).relative_to(output))
        flips.append(entry)

    flipped = sum(entry["flipped"] for entry in flips)
    write_json(output / "flips.json", {"epsilon": attack.epsilon, "flipped": flipped, "images": flips})
    logger.info("[ATTACK] ε=%g: сменилось предсказаний %d из %d", attack.epsilon, flipped, len(flips))
    print(f"ε={attack.epsilon:g}: сменилось предсказаний {flipped} из {len(flips)}; результаты в {output}")
    return 0
