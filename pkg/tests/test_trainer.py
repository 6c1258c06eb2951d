"""
Тесты обучения по раундам, экспериментов и пар «стандартная / устойчивая» модель.
"""
import json

import numpy as np
import pytest

from src.core.config import settings
from src.core.exceptions import InsufficientRoundsError, NonFiniteError
from src.model.network import build
from src.repository.artifacts import ArtifactStore
from src.repository.checkpoint import load_checkpoint
from src.scheme.attack import AttackConfig
from src.scheme.data import AugmentationConfig
from src.scheme.run import OptimizerConfig
from src.service.experiment import open_dataset, run_experiment, run_twins, stamp_experiment
from src.service.trainer import TrainerService


def test_round_writes_artifacts(blob_manifest, make_run_config, tmp_path):
    config = make_run_config(blob_manifest, tmp_path / "run", attack=AttackConfig(sweep=[0.05]))
    result = run_experiment(config)
    record = result.records[0]
    directory = tmp_path / "run"
    assert (directory / "config.json").is_file()
    assert (directory / "round-0" / "record.json").is_file()
    assert (directory / "report.txt").read_text(encoding="utf-8").startswith("Model")
    assert record.checkpoint_path == "round-0/checkpoint.rlck"
    assert 1 <= record.best_epoch <= record.halt_epoch <= 3
    assert record.lr_trace == sorted(record.lr_trace, reverse=True)
    assert [evaluation.epsilon for evaluation in record.perturbed] == [0.02, 0.05]
    checkpoint = load_checkpoint(directory / record.checkpoint_path)
    assert checkpoint.metadata.epoch == record.best_epoch
    assert checkpoint.metadata.rng_seed == 0
    assert [row.name for row in result.report.rows] == ["linear", "linear*", "linear*(ε=0.05)"]


def test_checkpoint_holds_best_epoch_parameters(blob_manifest, make_run_config, tmp_path, monkeypatch):
    losses = iter([1.0, 0.5, 0.7, 0.6, 0.9])
    snapshots = []

    def scripted(self, params):
        snapshots.append({name: array.copy() for name, array in params.arrays().items()})
        return next(losses), 0.5

    monkeypatch.setattr(TrainerService, "_validate", scripted)
    config = make_run_config(
        blob_manifest, tmp_path, max_epochs=10,
        optimizer=OptimizerConfig(learning_rate=0.01, early_stop_patience=2)
    )
    trainer = TrainerService(config, open_dataset(config), ArtifactStore(tmp_path))
    record = trainer.train_round(0)
    assert record.halt_epoch == 4
    assert record.best_epoch == 2
    assert record.best_val_loss == 0.5
    restored = load_checkpoint(tmp_path / record.checkpoint_path).arrays
    for name, array in snapshots[1].items():
        np.testing.assert_array_equal(restored[name], array)
    assert not all(np.array_equal(restored[name], array) for name, array in snapshots[3].items())


def test_reruns_are_byte_identical(blob_manifest, make_run_config, tmp_path, monkeypatch):
    config = make_run_config(
        blob_manifest, tmp_path, model="tiny", rounds=2, max_epochs=2,
        augmentation=AugmentationConfig(seed=4), attack=AttackConfig()
    )
    run_experiment(config, tmp_path / "first")
    monkeypatch.setattr(settings, "THREADS", 2)
    run_experiment(config, tmp_path / "second")
    for name in ("round-0/checkpoint.rlck", "round-1/checkpoint.rlck", "round-1/record.json", "report.json"):
        assert (tmp_path / "first" / name).read_bytes() == (tmp_path / "second" / name).read_bytes()


def test_rounds_use_consecutive_seeds(blob_manifest, make_run_config, tmp_path):
    result = run_experiment(make_run_config(blob_manifest, tmp_path, rounds=2, max_epochs=1, seed=7))
    assert [record.seed for record in result.records] == [7, 8]
    assert result.aggregate is not None
    assert result.aggregate.n == 2


def test_failed_round_is_recorded(blob_manifest, make_run_config, tmp_path, monkeypatch):
    original = TrainerService.train

    def flaky(self, round_index, seed):
        if round_index == 1:
            raise NonFiniteError("adam_step", "градиент")
        return original(self, round_index, seed)

    monkeypatch.setattr(TrainerService, "train", flaky)
    with pytest.raises(InsufficientRoundsError):
        run_experiment(make_run_config(blob_manifest, tmp_path, rounds=2, max_epochs=1))
    error = json.loads((tmp_path / "round-1" / "error.json").read_text(encoding="utf-8"))
    assert error["error"] == "NonFiniteError"
    assert (tmp_path / "round-0" / "record.json").is_file()


def test_untrained_model_is_at_chance(make_dataset, make_run_config, tmp_path):
    manifest = make_dataset(
        "chance", num_classes=3, blob_amplitude=0, texture_amplitude=0,
        counts={"train": 1, "val": 1, "test": 100}
    )
    config = make_run_config(manifest, tmp_path, model="tiny", num_classes=3)
    trainer = TrainerService(config, open_dataset(config), ArtifactStore(tmp_path))
    result = trainer.evaluate(build(config.model_config_for(0)))
    assert result.sample_count == 300
    assert result.accuracy == pytest.approx(1.0 / 3.0, abs=0.12)


@pytest.mark.slow
def test_attack_lowers_standard_accuracy(make_dataset, make_run_config, tmp_path):
    manifest = make_dataset("texture", blob_amplitude=0, texture_amplitude=3)
    config = make_run_config(manifest, tmp_path, max_epochs=30, attack=AttackConfig(epsilon=0.02))
    record = run_experiment(config).records[0]
    clean = record.test_report.accuracy
    attacked = record.perturbed[0].report.accuracy
    assert clean >= 0.9
    assert attacked <= clean - 0.10


@pytest.mark.slow
def test_robust_twin_degrades_less(make_dataset, make_run_config, tmp_path):
    # Текстура слабее ε: стандартная модель на ней ломается, устойчивая опирается на пятно
    manifest = make_dataset("twins", blob_amplitude=30, texture_amplitude=3)
    config = make_run_config(manifest, tmp_path, max_epochs=30, attack=AttackConfig(epsilon=0.02))
    result = run_twins(config)
    rows = {row.name: row for row in result.report.rows}
    assert list(rows) == ["linear", "linear*", "linear-robust", "linear-robust*"]
    standard_clean = rows["linear"].metrics["accuracy"].mean
    robust_clean = rows["linear-robust"].metrics["accuracy"].mean
    standard_attacked = rows["linear*"].metrics["accuracy"].mean
    robust_attacked = rows["linear-robust*"].metrics["accuracy"].mean
    assert robust_attacked - standard_attacked >= 0.15
    assert abs(robust_clean - standard_clean) <= 0.05
    assert (tmp_path / "standard" / "round-0" / "checkpoint.rlck").is_file()
    assert (tmp_path / "robust" / "round-0" / "checkpoint.rlck").is_file()
    assert (tmp_path / "report.json").is_file()


@pytest.mark.slow
def test_stamp_experiment_compares_both_variants(make_dataset, make_run_config, tmp_path):
    manifest = make_dataset("stamp", stamp_amplitude=100, counts={"train": 10, "val": 4, "test": 4})
    config = make_run_config(manifest, tmp_path, model="tiny", max_epochs=2)
    comparisons = stamp_experiment(config, seeds=[0, 1])
    assert [comparison.seed for comparison in comparisons] == [0, 1]
    for comparison in comparisons:
        for stats in (comparison.standard, comparison.robust):
            assert 0.0 <= stats.stamp_mass <= 1.0
            assert stats.samples == 8
    saved = json.loads((tmp_path / "stamp.json").read_text(encoding="utf-8"))
    assert len(saved) == 2


@pytest.mark.slow
def test_robust_saliency_stays_off_the_stamp(make_dataset, make_run_config, tmp_path):
    # Слабая метка (ниже ε) коррелирует с классом только в обучении
    manifest = make_dataset(
        "faint-stamp", stamp_amplitude=4, stamp_correlation=0.9,
        counts={"train": 40, "val": 10, "test": 10}
    )
    config = make_run_config(
        manifest, tmp_path, model="tiny", max_epochs=15, attack=AttackConfig(epsilon=0.02)
    )
    comparisons = stamp_experiment(config, seeds=[0, 1, 2, 3, 4])
    less_stamp = sum(item.robust.stamp_mass <= item.standard.stamp_mass for item in comparisons)
    more_inside = sum(item.robust.containment >= item.standard.containment for item in comparisons)
    assert less_stamp >= 4
    assert more_inside >= 4


def test_rerun_replaces_previous_rounds(blob_manifest, make_run_config, tmp_path):
    stale = tmp_path / "round-3"
    stale.mkdir(parents=True)
    (stale / "error.json").write_text("{}", encoding="utf-8")
    (tmp_path / "round-0").mkdir()
    (tmp_path / "round-0" / "error.json").write_text("{}", encoding="utf-8")
    (tmp_path / "notes").mkdir()
    run_experiment(make_run_config(blob_manifest, tmp_path, max_epochs=1))
    assert sorted(path.name for path in tmp_path.glob("round-*")) == ["round-0"]
    assert not (tmp_path / "round-0" / "error.json").exists()
    assert (tmp_path / "round-0" / "record.json").is_file()
    assert (tmp_path / "notes").is_dir()
    assert len(ArtifactStore(tmp_path).read_records()) == 1
