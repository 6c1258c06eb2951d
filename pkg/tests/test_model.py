"""
Тесты конфигураций моделей, инициализации и прямого прохода.
"""
import math

import numpy as np
import pytest

from src.core.exceptions import InvalidLayerError, ShapeMismatchError, UsageError
from src.model.layers import infer_shapes, parameter_shapes
from src.model.network import ModelParams, build, conv_layers, forward, predict, predict_classes, resolve_layer
from src.model.zoo import ZOO, linear, tiny, vgg_mini
from src.scheme.model import ConvSpec, DenseSpec, FlattenSpec, ModelConfig


@pytest.mark.parametrize("name", sorted(ZOO))
def test_zoo_models_produce_logits(name, rng):
    params = build(ZOO[name](input_shape=(1, 16, 16), num_classes=3, seed=0))
    logits = predict(params, rng.uniform(size=(5, 1, 16, 16)).astype(np.float32))
    assert logits.shape == (5, 3)
    assert logits.dtype == np.float32


def test_last_layer_must_match_class_count():
    with pytest.raises(ShapeMismatchError):
        ModelConfig(input_shape=(1, 8, 8), layers=[FlattenSpec(), DenseSpec(width=2)], num_classes=3)


def test_dense_requires_flat_input():
    with pytest.raises(ShapeMismatchError):
        ModelConfig(input_shape=(1, 8, 8), layers=[DenseSpec(width=3)], num_classes=3)


def test_kernel_larger_than_input_is_rejected():
    with pytest.raises(ShapeMismatchError):
        ModelConfig(
            input_shape=(1, 2, 2),
            layers=[ConvSpec(out_channels=2, kernel=3), FlattenSpec(), DenseSpec(width=3)],
            num_classes=3
        )


def test_shapes_follow_layers(tiny_config):
    shapes = infer_shapes(tiny_config)
    assert shapes[0] == (8, 16, 16)
    assert shapes[2] == (8, 8, 8)
    assert shapes[-1] == (3,)
    assert parameter_shapes(tiny_config)["0.weight"] == (8, 1, 3, 3)


def test_initialization_is_deterministic_per_seed(tiny_config):
    first = build(tiny_config)
    again = build(tiny_config)
    other = build(tiny_config.model_copy(update={"seed": 1}))
    assert first.equals(again)
    assert not first.equals(other)


@pytest.mark.parametrize("name", sorted(ZOO))
def test_forward_is_bitwise_deterministic(name, rng):
    images = rng.uniform(size=(4, 1, 16, 16)).astype(np.float32)
    first = build(ZOO[name](input_shape=(1, 16, 16), num_classes=3, seed=5))
    second = build(ZOO[name](input_shape=(1, 16, 16), num_classes=3, seed=5))
    outputs = [predict(params.frozen(), images).data for params in (first, first, second)]
    assert outputs[0].tobytes() == outputs[1].tobytes()
    assert outputs[0].tobytes() == outputs[2].tobytes()


def test_he_uniform_bounds_and_zero_biases(tiny_config):
    params = build(tiny_config)
    for name, array in params.arrays().items():
        if name.endswith(".bias"):
            assert not array.any()
        else:
            fan_in = int(np.prod(array.shape[1:]))
            assert np.abs(array).max() <= math.sqrt(6.0 / fan_in)


def test_predict_rejects_pixels_outside_unit_range(tiny_params):
    with pytest.raises(UsageError):
        predict(tiny_params, np.full((1, 1, 16, 16), 1.5, dtype=np.float32))


def test_predict_rejects_wrong_input_shape(tiny_params):
    with pytest.raises(ShapeMismatchError):
        predict(tiny_params, np.zeros((1, 1, 8, 8), dtype=np.float32))


def test_predict_classes_breaks_ties_to_lower_index():
    logits = np.array([[1.0, 1.0, 0.0], [0.0, 2.0, 2.0]])
    np.testing.assert_array_equal(predict_classes(logits), [0, 1])


def test_frozen_forward_leaves_gradients_untouched(tiny_params, rng):
    logits, _ = forward(tiny_params.frozen(), rng.uniform(size=(2, 1, 16, 16)))
    assert logits.node is None
    assert all(grad is None for grad in tiny_params.grads().values())


def test_forward_tap_exposes_layer_output(tiny_params, rng):
    _, tapped = forward(tiny_params.frozen(), rng.uniform(size=(1, 1, 16, 16)), tap=3)
    assert tapped.shape == (1, 16, 8, 8)
    assert tapped.requires_grad


def test_params_reject_foreign_arrays(tiny_config):
    arrays = build(tiny_config).arrays()
    arrays.pop("0.bias")
    with pytest.raises(ShapeMismatchError):
        ModelParams.from_arrays(tiny_config, arrays)


def test_conv_layer_names():
    config = vgg_mini(input_shape=(1, 16, 16))
    assert list(conv_layers(config)) == ["conv1", "conv2", "conv3", "conv4"]
    assert resolve_layer(config, None) == ("conv4", 9)
    assert resolve_layer(config, "conv2") == ("conv2", 3)
    assert resolve_layer(config, 6) == ("conv3", 6)


def test_unknown_layer_lists_available_layers():
    with pytest.raises(InvalidLayerError) as error:
        resolve_layer(vgg_mini(input_shape=(1, 16, 16)), "conv9")
    assert "conv1" in error.value.detail
    assert error.value.exit_code == 1


def test_model_without_conv_layers_has_no_gradcam_layer():
    with pytest.raises(InvalidLayerError):
        resolve_layer(linear(input_shape=(1, 4, 4)), None)


def test_tiny_defaults_match_zoo_entry():
    assert ZOO["tiny"] is tiny
    assert tiny().input_shape == (1, 64, 64)
