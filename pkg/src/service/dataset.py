"""
Датасет поверх манифеста: декодирование с кэшем и выдача батчей.
"""
import logging
import threading
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, Iterator, List, Optional, Tuple

import numpy as np

from src.core.config import settings
from src.core.constants import RESCALE
from src.core.exceptions import EmptySplitError
from src.repository.images import decode_image, decode_mask
from src.scheme.data import AugmentationConfig, DatasetManifest, ManifestRecord, Sample
from src.service.augmentation import augment, sample_rng

logger = logging.getLogger(__name__)

Batch = Tuple[np.ndarray, np.ndarray]


class DatasetService:
    """Сервис доступа к изображениям манифеста."""

    def __init__(self, manifest: DatasetManifest, image_hw: Tuple[int, int], rescale: float = RESCALE,
                 threads: Optional[int] = None):
        """Инициализация сервиса.

        Args:
            manifest: Проверенный манифест
            image_hw: Размер входа модели (H, W)
            rescale: Множитель яркости при декодировании
            threads: Число потоков декодирования; по умолчанию из настроек
        """
        self.manifest = manifest
        self.image_hw = tuple(image_hw)
        self.rescale = rescale
        self.threads = threads or settings.THREADS
        self._cache: Dict[str, Sample] = {}
        self._lock = threading.Lock()

    def records(self, split: str) -> List[ManifestRecord]:
        return self.manifest.require_split(split)

    def load(self, record: ManifestRecord) -> Sample:
        """Декодированный образец; повторные обращения берутся из кэша."""
        with self._lock:
            cached = self._cache.get(record.path)
        if cached is not None:
            return cached
        image = decode_image(record.path, self.image_hw, self.rescale)
        mask = decode_mask(record.mask_path, self.image_hw) if record.mask_path else None
        sample = Sample(image=image, label=record.label, mask=mask, path=record.path)
        with self._lock:
            self._cache[record.path] = sample
        return sample

    def samples(self, split: str) -> List[Sample]:
        records = self.records(split)
        if self.threads > 1 and len(records) > 1:
            with ThreadPoolExecutor(max_workers=self.threads) as executor:
                return list(executor.map(self.load, records))
        return [self.load(record) for record in records]

    def arrays(self, split: str) -> Batch:
        """Вся выборка без аугментации: изображения N×1×H×W и метки."""
        samples = self.samples(split)
        images = np.stack([sample.image for sample in samples])
        labels = np.array([sample.label for sample in samples], dtype=np.int64)
        return images, labels

    def batch_iter(self, split: str, batch_size: int, augmentation: Optional[AugmentationConfig] = None,
                   seed: int = 0, epoch: int = 0) -> Iterator[Batch]:
        """Батчи одной эпохи в порядке перестановки, заданной (seed, epoch).

        Последний неполный батч тоже выдаётся. Аугментация применяется,
        только если передана включённая конфигурация.
        """
        samples = self.samples(split)
        if not samples:
            raise EmptySplitError(f"выборка '{split}' пуста")
        order = np.random.default_rng([seed, epoch]).permutation(len(samples))
        augmenting = augmentation is not None and augmentation.enabled

        def prepare(index: int) -> Sample:
            sample = samples[index]
            if not augmenting:
                return sample
            return augment(sample, augmentation, sample_rng(seed, epoch, int(index), augmentation.seed))

        executor = ThreadPoolExecutor(max_workers=self.threads) if augmenting and self.threads > 1 else None
        try:
            for start in range(0, len(order), batch_size):
                indices = order[start:start + batch_size]
                prepared = list(executor.map(prepare, indices)) if executor else [prepare(i) for i in indices]
                images = np.stack([sample.image for sample in prepared])
                labels = np.array([sample.label for sample in prepared], dtype=np.int64)
                logger.debug("[DATA] %s: батч %d, размер %d", split, start // batch_size, len(prepared))
                yield images, labels
        finally:
            if executor is not None:
                executor.shutdown()


def batch_iter(dataset: DatasetService, split: str, batch_size: int, augmentation: Optional[AugmentationConfig] = None,
               seed: int = 0, epoch: int = 0) -> Iterator[Batch]:
    return dataset.batch_iter(split, batch_size, augmentation, seed, epoch)
