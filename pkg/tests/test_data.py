"""
Тесты данных: декодирование изображений, манифест, датасет и генератор.
"""
import numpy as np
import pytest
from PIL import Image

from src.core.exceptions import (
    CorruptImageError, DuplicatePathError, EmptySplitError, ManifestError, MissingFileError,
    UnknownLabelError, UnsupportedFormatError
)
from src.repository.images import decode_image, decode_mask, encode_image
from src.repository.manifest import load_manifest, parse_label
from src.scheme.data import AugmentationConfig
from src.service.dataset import DatasetService


def save_gray(path, values):
    Image.fromarray(np.asarray(values, dtype=np.uint8)).save(path)
    return path


def write_csv(path, lines):
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def test_decode_scales_to_unit_range(tmp_path):
    path = save_gray(tmp_path / "check.png", [[0, 255], [255, 0]])
    image = decode_image(path)
    assert image.shape == (1, 2, 2)
    assert image.dtype == np.float32
    np.testing.assert_array_equal(image[0], [[0.0, 1.0], [1.0, 0.0]])


def test_decode_resizes_bilinearly(tmp_path):
    path = save_gray(tmp_path / "check.png", [[0, 255], [255, 0]])
    image = decode_image(path, target_hw=(4, 4))[0]
    np.testing.assert_allclose(image[0], [0.0, 0.25, 0.75, 1.0], atol=1e-6)
    assert image[1, 1] == pytest.approx(0.375, abs=1e-6)


def test_decode_converts_rgb_to_gray(tmp_path):
    path = tmp_path / "rgb.png"
    Image.fromarray(np.full((3, 3, 3), 100, dtype=np.uint8), mode="RGB").save(path)
    np.testing.assert_allclose(decode_image(path)[0], 100.0 / 255.0, atol=1e-6)


def test_pgm_round_trip(tmp_path):
    values = np.arange(16, dtype=np.float64).reshape(4, 4) / 255.0
    path = encode_image(tmp_path / "ramp.pgm", values)
    assert path.read_bytes().startswith(b"P5")
    np.testing.assert_allclose(decode_image(path)[0], values, atol=1e-6)


def test_jpeg_is_unsupported(tmp_path):
    path = tmp_path / "photo.jpg"
    Image.fromarray(np.zeros((4, 4), dtype=np.uint8)).save(path, format="JPEG")
    with pytest.raises(UnsupportedFormatError):
        decode_image(path)


def test_sixteen_bit_png_is_unsupported(tmp_path):
    path = tmp_path / "deep.png"
    Image.fromarray(np.full((4, 4), 1000, dtype=np.uint16)).save(path)
    with pytest.raises(UnsupportedFormatError):
        decode_image(path)


def test_truncated_png_is_corrupt(tmp_path):
    source = tmp_path / "full.png"
    Image.fromarray(np.random.default_rng(0).integers(0, 256, size=(32, 32), dtype=np.uint8)).save(source)
    broken = tmp_path / "broken.png"
    broken.write_bytes(source.read_bytes()[:60])
    with pytest.raises(CorruptImageError):
        decode_image(broken)


def test_missing_image(tmp_path):
    with pytest.raises(MissingFileError):
        decode_image(tmp_path / "absent.png")


def test_mask_is_binarized(tmp_path):
    path = save_gray(tmp_path / "mask.png", [[0, 127], [128, 255]])
    np.testing.assert_array_equal(decode_mask(path), [[0.0, 0.0], [1.0, 1.0]])


def test_labels_accept_names_and_indices():
    assert parse_label("COVID") == 1
    assert parse_label("Normal") == 0
    assert parse_label("2") == 2
    with pytest.raises(UnknownLabelError):
        parse_label("tuberculosis")
    with pytest.raises(UnknownLabelError):
        parse_label("pneumonia", num_classes=2)


@pytest.fixture
def image_dir(tmp_path):
    for name in ("a", "b", "c"):
        save_gray(tmp_path / f"{name}.png", np.full((4, 4), 10, dtype=np.uint8))
    return tmp_path


def test_manifest_resolves_paths_relative_to_file(image_dir):
    path = write_csv(image_dir / "manifest.csv", [
        "path,label,split,mask_path",
        "a.png,normal,train,",
        "b.png,COVID,val,",
        "c.png,pneumonia,test,a.png",
    ])
    manifest = load_manifest(path, check_files=True)
    assert manifest.counts() == {"train": 1, "val": 1, "test": 1}
    assert manifest.split("val")[0].label == 1
    assert manifest.split("test")[0].mask_path == str(image_dir.resolve() / "a.png")


def test_manifest_unknown_label(image_dir):
    path = write_csv(image_dir / "manifest.csv", ["path,label,split,mask_path", "a.png,flu,train,"])
    with pytest.raises(UnknownLabelError) as error:
        load_manifest(path)
    assert error.value.exit_code == 2


def test_manifest_duplicate_path(image_dir):
    path = write_csv(image_dir / "manifest.csv", [
        "path,label,split,mask_path", "a.png,0,train,", "a.png,1,test,",
    ])
    with pytest.raises(DuplicatePathError):
        load_manifest(path)


def test_manifest_missing_column(image_dir):
    path = write_csv(image_dir / "manifest.csv", ["path,label", "a.png,0"])
    with pytest.raises(ManifestError):
        load_manifest(path)


def test_manifest_unknown_split(image_dir):
    path = write_csv(image_dir / "manifest.csv", ["path,label,split,mask_path", "a.png,0,holdout,"])
    with pytest.raises(ManifestError):
        load_manifest(path)


def test_manifest_missing_image(image_dir):
    path = write_csv(image_dir / "manifest.csv", ["path,label,split,mask_path", "zzz.png,0,train,"])
    load_manifest(path)
    with pytest.raises(MissingFileError):
        load_manifest(path, check_files=True)


def test_empty_split(image_dir):
    path = write_csv(image_dir / "manifest.csv", ["path,label,split,mask_path", "a.png,0,train,"])
    with pytest.raises(EmptySplitError):
        load_manifest(path).require_split("test")


@pytest.fixture
def dataset(make_dataset) -> DatasetService:
    manifest = load_manifest(make_dataset(counts={"train": 5, "val": 1, "test": 1}), num_classes=2)
    return DatasetService(manifest, (16, 16))


def test_batches_cover_split_once_per_epoch(dataset):
    batches = list(dataset.batch_iter("train", 4, seed=0, epoch=1))
    assert [len(labels) for _, labels in batches] == [4, 4, 2]
    images = np.concatenate([images for images, _ in batches])
    expected, _ = dataset.arrays("train")
    assert sorted(map(bytes, images)) == sorted(map(bytes, expected))


def test_batch_order_depends_only_on_seed_and_epoch(dataset):
    def order(seed, epoch):
        return np.concatenate([labels for _, labels in dataset.batch_iter("train", 3, seed=seed, epoch=epoch)])

    first = [images.tobytes() for images, _ in dataset.batch_iter("train", 3, seed=0, epoch=2)]
    again = [images.tobytes() for images, _ in dataset.batch_iter("train", 3, seed=0, epoch=2)]
    assert first == again
    np.testing.assert_array_equal(order(0, 2), order(0, 2))


def test_identity_augmentation_keeps_images(dataset):
    plain = np.concatenate([images for images, _ in dataset.batch_iter("train", 4, seed=1, epoch=1)])
    augmented = np.concatenate([
        images for images, _ in dataset.batch_iter("train", 4, AugmentationConfig.identity(), seed=1, epoch=1)
    ])
    np.testing.assert_array_equal(plain, augmented)


def test_augmented_batches_are_reproducible(dataset):
    config = AugmentationConfig(seed=5)
    first = [images for images, _ in dataset.batch_iter("train", 4, config, seed=0, epoch=3)]
    again = [images for images, _ in dataset.batch_iter("train", 4, config, seed=0, epoch=3)]
    for left, right in zip(first, again):
        np.testing.assert_array_equal(left, right)


def test_samples_carry_masks(dataset):
    sample = dataset.samples("test")[0]
    assert sample.mask is not None
    assert sample.mask.shape == (16, 16)
    assert 0 < sample.mask.sum() < 16 * 16


def test_generator_is_deterministic(make_dataset):
    first = make_dataset("first", counts={"train": 2, "val": 1, "test": 1}, seed=3)
    second = make_dataset("second", counts={"train": 2, "val": 1, "test": 1}, seed=3)
    names = sorted(path.relative_to(first.parent) for path in first.parent.rglob("*.png"))
    assert len(names) == 2 * 4 + 1
    for name in names:
        assert (first.parent / name).read_bytes() == (second.parent / name).read_bytes()


def test_generator_manifest_counts(make_dataset):
    manifest = load_manifest(make_dataset(counts={"train": 3, "val": 2, "test": 1}), num_classes=2, check_files=True)
    assert manifest.counts() == {"train": 6, "val": 4, "test": 2}
    assert manifest.class_counts("train") == {0: 3, 1: 3}
