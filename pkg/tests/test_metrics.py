"""
Тесты метрик, доверительных интервалов и итоговых таблиц.
"""
import math

import numpy as np
import pytest

from src.core.exceptions import InsufficientRoundsError, UsageError
from src.repository.artifacts import ArtifactStore
from src.scheme.metrics import MetricSummary
from src.scheme.run import AttackEvaluation, RunRecord
from src.service.metrics import aggregate, confusion, f1_score, report, t_half_width
from src.service.report import build_report, format_table, merge_reports, rows_for, summarize, write_report

T_975_2 = 4.302652729911275


def metrics_for(labels, predictions, positive_class=1, num_classes=3):
    return report(confusion(labels, predictions, num_classes), positive_class)


def test_confusion_counts():
    cm = confusion([0, 1, 2, 1], [0, 2, 2, 1], 3)
    assert cm.counts == [[1, 0, 0], [0, 1, 1], [0, 0, 1]]
    assert cm.total == 4


def test_confusion_matches_direct_tally():
    rng = np.random.default_rng(77)
    for _ in range(500):
        k = int(rng.integers(2, 6))
        n = int(rng.integers(0, 40))
        labels = rng.integers(0, k, size=n)
        predictions = rng.integers(0, k, size=n)
        tally = [[0] * k for _ in range(k)]
        for truth, guess in zip(labels, predictions):
            tally[truth][guess] += 1
        cm = confusion(labels, predictions, k)
        assert cm.counts == tally
        assert cm.total == n
        if n:
            positive = int(rng.integers(0, k))
            result = report(cm, positive)
            assert result.accuracy == pytest.approx(sum(tally[c][c] for c in range(k)) / n)
            column = sum(tally[row][positive] for row in range(k))
            expected = tally[positive][positive] / column if column else 0.0
            assert result.precision == pytest.approx(expected)


def test_report_uses_positive_class():
    result = metrics_for([0, 1, 2, 1], [0, 2, 2, 1])
    assert result.accuracy == pytest.approx(0.75)
    assert result.precision == pytest.approx(1.0)
    assert result.recall == pytest.approx(0.5)
    assert result.f1 == pytest.approx(2.0 / 3.0)
    assert result.per_class[2].precision == pytest.approx(0.5)
    assert result.macro_recall == pytest.approx((1.0 + 0.5 + 1.0) / 3.0)


def test_zero_division_is_flagged():
    result = metrics_for([1, 1, 2], [1, 1, 1])
    assert result.per_class[0].precision == 0.0
    assert "precision[0]" in result.zero_division
    assert "recall[0]" in result.zero_division
    assert result.per_class[2].recall == 0.0


def test_out_of_range_ids_are_rejected():
    with pytest.raises(UsageError):
        confusion([0, 3], [0, 1], 3)
    with pytest.raises(UsageError):
        confusion([0, 1], [0], 3)


def test_f1_of_zero_precision_and_recall():
    assert f1_score(0.0, 0.0) == 0.0


def test_t_interval_half_width():
    values = [0.90, 0.92, 0.94]
    expected = T_975_2 * 0.02 / math.sqrt(3.0)
    assert t_half_width(values, 0.95) == pytest.approx(expected, rel=1e-6)


def test_two_round_half_width():
    # t_{0.975, 1} = 12.7062, s = 0.0707
    assert t_half_width([0.9, 1.0]) == pytest.approx(0.6353, abs=1e-3)


def test_interval_covers_true_mean_at_nominal_rate():
    rng = np.random.default_rng(2024)
    true_mean = 0.8
    covered = 0
    simulations = 1000
    for _ in range(simulations):
        values = rng.normal(true_mean, 0.05, size=15)
        half = t_half_width(values, 0.95)
        covered += abs(values.mean() - true_mean) <= half
    assert 0.93 <= covered / simulations <= 0.97


def test_identical_rounds_give_zero_width():
    assert t_half_width([0.5, 0.5, 0.5]) == 0.0


def test_interval_needs_two_rounds():
    with pytest.raises(InsufficientRoundsError) as error:
        t_half_width([0.5])
    assert error.value.exit_code == 3


def test_aggregate_means():
    first = metrics_for([0, 1, 2, 1], [0, 1, 2, 1])
    second = metrics_for([0, 1, 2, 1], [0, 2, 2, 1])
    summary = aggregate([first, second])
    assert summary.n == 2
    assert summary.metrics["accuracy"].mean == pytest.approx(0.875)
    assert summary.metrics["accuracy"].half_width > 0.0


def test_summary_format():
    assert MetricSummary(mean=0.97031, half_width=0.00649).format() == "0.9703 ± 0.0065"
    assert MetricSummary(mean=0.5).format() == "0.5000"


def test_single_round_summary_has_no_interval():
    summary = summarize([metrics_for([0, 1], [0, 1])])
    assert summary["accuracy"].half_width is None


def make_record(index, clean, perturbed):
    return RunRecord(
        round_index=index,
        seed=index,
        variant="standard",
        epochs=[],
        halt_epoch=1,
        best_epoch=1,
        best_val_loss=0.1,
        checkpoint_path=f"round-{index}/checkpoint.rlck",
        train_accuracy=1.0,
        test_report=clean,
        perturbed=[AttackEvaluation(epsilon=0.02, report=perturbed), AttackEvaluation(epsilon=0.05, report=perturbed)]
    )


@pytest.fixture
def records():
    clean = metrics_for([0, 1, 2, 1], [0, 1, 2, 1])
    worse = metrics_for([0, 1, 2, 1], [0, 2, 2, 0])
    return [make_record(0, clean, worse), make_record(1, clean, clean)]


def test_rows_include_starred_perturbed_rows(records):
    rows = rows_for("tiny", records)
    assert [row.name for row in rows] == ["tiny", "tiny*", "tiny*(ε=0.05)"]
    assert rows[0].metrics["accuracy"].format() == "1.0000 ± 0.0000"
    assert rows[1].epsilon == 0.02


def test_table_layout(records):
    text = format_table(build_report(rows_for("tiny", records)))
    lines = text.splitlines()
    assert lines[0].split() == ["Model", "Accuracy", "Precision", "Recall", "F1-score"]
    assert lines[3].startswith("tiny*")


def test_merge_reports_disambiguates_names(tmp_path, records):
    for name in ("a", "b"):
        write_report(ArtifactStore(tmp_path / name), build_report(rows_for("tiny", records)))
    merged = merge_reports([tmp_path / "a", tmp_path / "b"])
    names = [row.name for row in merged.rows]
    assert names[:3] == ["tiny", "tiny*", "tiny*(ε=0.05)"]
    assert names[3] == "b/tiny"
