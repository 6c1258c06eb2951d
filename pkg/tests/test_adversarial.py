"""
Тесты FGSM и шагов обучения.
"""
import numpy as np
import pytest

from src.autodiff import Tensor, softmax_cross_entropy
from src.core.exceptions import UsageError
from src.model.network import ModelParams, forward
from src.model.zoo import linear
from src.scheme.attack import AttackConfig
from src.service.adversarial import (
    adversarial_train_step, evaluate_under_attack, fgsm, input_gradient, predict_batches, train_step
)
from src.service.metrics import confusion, report
from src.service.optimizer import AdamState


@pytest.fixture
def logistic() -> ModelParams:
    """Одномерная логистическая модель: логиты (-x, x)."""
    config = linear(input_shape=(1, 1, 1), num_classes=2, dtype="float64")
    return ModelParams.from_arrays(config, {"1.weight": np.array([[-1.0], [1.0]]), "1.bias": np.zeros(2)})


def loss_at(params: ModelParams, images: np.ndarray, labels: np.ndarray) -> float:
    logits, _ = forward(params.frozen(), images)
    return softmax_cross_entropy(logits, labels, reduction="sum").item()


def test_budget_and_clip_bounds_hold(tiny_params, rng):
    images = rng.uniform(size=(4, 1, 16, 16)).astype(np.float32)
    images[0, 0, :2] = 0.0
    images[1, 0, :2] = 1.0
    labels = np.array([0, 1, 2, 1])
    result = fgsm(tiny_params, images, labels, AttackConfig(epsilon=0.02))
    assert result.images.shape == images.shape
    assert np.abs(result.images.astype(np.float64) - images.astype(np.float64)).max() <= 0.02
    assert result.images.min() >= 0.0 and result.images.max() <= 1.0
    assert np.abs(result.eta).max() <= 0.02


def test_perturbation_is_signed_gradient(logistic):
    images = np.full((1, 1, 1, 1), 0.5)
    result = fgsm(logistic, images, np.array([0]), AttackConfig(epsilon=0.02))
    assert result.images[0, 0, 0, 0] == pytest.approx(0.52)


def test_zero_gradient_gives_zero_perturbation():
    config = linear(input_shape=(1, 1, 2), num_classes=2, dtype="float64")
    params = ModelParams.from_arrays(config, {"1.weight": np.array([[0.0, -1.0], [0.0, 1.0]]), "1.bias": np.zeros(2)})
    result = fgsm(params, np.full((1, 1, 1, 2), 0.5), np.array([1]), AttackConfig(epsilon=0.1))
    assert result.eta[0, 0, 0, 0] == 0.0
    assert result.eta[0, 0, 0, 1] == pytest.approx(-0.1)


def test_attack_strength_grows_with_budget(logistic):
    images = np.full((1, 1, 1, 1), 0.4)
    labels = np.array([0])
    losses = [
        loss_at(logistic, fgsm(logistic, images, labels, AttackConfig(epsilon=epsilon)).images, labels)
        for epsilon in (0.0, 0.01, 0.05, 0.2)
    ]
    assert losses == sorted(losses)
    assert losses[-1] > losses[0]


def test_zero_budget_returns_inputs(tiny_params, rng):
    images = rng.uniform(size=(2, 1, 16, 16)).astype(np.float32)
    result = fgsm(tiny_params, images, np.array([0, 1]), AttackConfig(epsilon=0.0))
    np.testing.assert_array_equal(result.images, images)
    assert not result.eta.any()


def test_attack_does_not_touch_parameters(tiny_params, rng):
    before = tiny_params.copy()
    fgsm(tiny_params, rng.uniform(size=(2, 1, 16, 16)), np.array([0, 2]), AttackConfig())
    assert tiny_params.equals(before)
    assert all(grad is None for grad in tiny_params.grads().values())


def test_pixels_outside_clip_range_are_rejected(tiny_params):
    with pytest.raises(UsageError):
        fgsm(tiny_params, np.full((1, 1, 16, 16), 1.2), np.array([0]), AttackConfig())


def test_input_gradient_matches_logistic_derivative(logistic):
    x = 0.3
    grad = input_gradient(logistic, np.full((1, 1, 1, 1), x), np.array([0]))
    expected = 2.0 / (1.0 + np.exp(-2.0 * x))
    assert grad[0, 0, 0, 0] == pytest.approx(expected)


def test_training_steps_reduce_loss(linear_params, rng):
    images = rng.uniform(size=(8, 1, 4, 4))
    labels = (images.mean(axis=(1, 2, 3)) > 0.5).astype(np.int64)
    state = AdamState(learning_rate=0.05)
    first = train_step(linear_params, images, labels, state)
    for _ in range(30):
        last = train_step(linear_params, images, labels, state)
    assert last < first
    assert all(grad is None for grad in linear_params.grads().values())


def test_adversarial_step_updates_parameters(linear_params, rng):
    before = linear_params.copy()
    images = rng.uniform(size=(4, 1, 4, 4))
    loss = adversarial_train_step(linear_params, images, np.array([0, 1, 0, 1]), AdamState(), AttackConfig())
    assert np.isfinite(loss)
    assert not linear_params.equals(before)


def test_evaluation_under_attack_is_not_better_on_logistic_model(logistic):
    images = np.linspace(0.05, 0.95, 10).reshape(10, 1, 1, 1)
    labels = (images.reshape(-1) > 0.0).astype(np.int64)
    _, clean = predict_batches(logistic, images)
    attacked = evaluate_under_attack(logistic, images, labels, AttackConfig(epsilon=0.2), positive_class=1)
    assert attacked.accuracy <= float((clean == labels).mean())


def test_attack_config_validation():
    with pytest.raises(ValueError):
        AttackConfig(epsilon=1.5)
    with pytest.raises(ValueError):
        AttackConfig(clip_min=1.0, clip_max=0.0)
    assert AttackConfig(epsilon=0.02, sweep=[0.01, 0.02, 0.05]).epsilons() == [0.02, 0.01, 0.05]


def test_tensor_input_is_accepted_by_forward(logistic):
    logits, _ = forward(logistic, Tensor(np.full((1, 1, 1, 1), 0.5), dtype=np.float64))
    np.testing.assert_allclose(logits.data, [[-0.5, 0.5]])


def test_budget_holds_over_many_images(tiny_params):
    rng = np.random.default_rng(99)
    for epsilon in (0.01, 0.02, 0.1):
        for _ in range(4):
            images = rng.uniform(size=(250, 1, 16, 16)).astype(np.float32)
            images[rng.uniform(size=images.shape) < 0.05] = 0.0
            images[rng.uniform(size=images.shape) < 0.05] = 1.0
            labels = rng.integers(0, 3, size=250)
            adversarial = fgsm(tiny_params, images, labels, AttackConfig(epsilon=epsilon)).images
            assert np.abs(adversarial.astype(np.float64) - images.astype(np.float64)).max() <= epsilon
            assert adversarial.min() >= 0.0 and adversarial.max() <= 1.0


def test_zero_budget_adversarial_step_equals_standard_step(linear_params, rng):
    images = rng.uniform(size=(6, 1, 4, 4))
    labels = np.array([0, 1, 1, 0, 1, 0])
    standard = linear_params.copy()
    robust = linear_params.copy()
    standard_state = AdamState(learning_rate=0.05)
    robust_state = AdamState(learning_rate=0.05)
    for _ in range(3):
        standard_loss = train_step(standard, images, labels, standard_state)
        robust_loss = adversarial_train_step(robust, images, labels, robust_state, AttackConfig(epsilon=0.0))
        assert robust_loss == standard_loss
    assert robust.equals(standard)
    assert not robust.equals(linear_params)


def test_zero_budget_evaluation_equals_clean_report(tiny_params, rng):
    images = rng.uniform(size=(12, 1, 16, 16)).astype(np.float32)
    labels = rng.integers(0, 3, size=12)
    _, clean = predict_batches(tiny_params, images)
    expected = report(confusion(labels, clean, 3), positive_class=1)
    attacked = evaluate_under_attack(tiny_params, images, labels, AttackConfig(epsilon=0.0), positive_class=1)
    assert attacked.model_dump() == expected.model_dump()
