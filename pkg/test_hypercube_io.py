"""
Tests for cube and ground-truth loading, validation and quantization
"""
import json

import numpy as np
import pytest

from src.errors import CorruptInputError, InputValidationError
from src.hypercube_io import (
    GroundTruth,
    HyperCube,
    RealImage,
    approx_gt_band_average,
    average_images,
    band_image,
    load_cube,
    load_gt,
    quantize,
    write_cube,
    write_gt,
)


def _cube(bands=3, height=4, width=5):
    data = np.arange(bands * height * width, dtype=np.uint16).reshape(bands, height, width)
    return HyperCube(data=data)


def _write_header(path, **fields):
    header = {"width": 2, "height": 2, "bands": 1, "dtype": "u16",
              "interleave": "bsq", "endian": "little", "raw": "cube.raw"}
    header.update(fields)
    path.write_text(json.dumps(header))
    return path


def test_write_then_load_cube(tmp_path):
    cube = _cube()
    raw_path = write_cube(cube, tmp_path / "cube.json")

    assert raw_path.stat().st_size == 3 * 4 * 5 * 2
    loaded = load_cube(tmp_path / "cube.json")
    assert loaded.n_bands == 3
    assert loaded.height == 4
    assert loaded.width == 5
    assert np.array_equal(loaded.data, cube.data)


def test_raw_file_is_band_sequential_little_endian(tmp_path):
    cube = HyperCube(data=np.array([[[1, 2]], [[258, 4]]], dtype=np.uint16))
    raw_path = write_cube(cube, tmp_path / "cube.json")
    assert raw_path.read_bytes() == bytes([1, 0, 2, 0, 2, 1, 4, 0])


def test_truncated_raw_file_is_corrupt(tmp_path):
    header = _write_header(tmp_path / "cube.json")
    (tmp_path / "cube.raw").write_bytes(b"\x00" * 6)

    with pytest.raises(CorruptInputError) as exc:
        load_cube(header)
    assert exc.value.expected_bytes == 8
    assert exc.value.actual_bytes == 6
    assert "expected 8 bytes, found 6" in str(exc.value)


def test_missing_raw_file_is_corrupt(tmp_path):
    header = _write_header(tmp_path / "cube.json")
    with pytest.raises(CorruptInputError):
        load_cube(header)


def test_header_field_out_of_range_names_the_field(tmp_path):
    header = _write_header(tmp_path / "cube.json", width=0)
    with pytest.raises(InputValidationError) as exc:
        load_cube(header)
    assert exc.value.field == "width"


def test_unsupported_sample_type_rejected(tmp_path):
    header = _write_header(tmp_path / "cube.json", dtype="f32")
    with pytest.raises(InputValidationError) as exc:
        load_cube(header)
    assert exc.value.field == "dtype"


def test_pixel_vectors_row_major():
    cube = _cube(bands=2, height=2, width=2)
    vectors = cube.pixel_vectors([1, 0])
    assert vectors.shape == (4, 2)
    assert vectors[0].tolist() == [4.0, 0.0]
    assert vectors[3].tolist() == [7.0, 3.0]


def test_load_gt_with_class_header(tmp_path):
    path = tmp_path / "gt.csv"
    path.write_text("#classes=16\n0,11,11\n14,14,0\n")

    gt = load_gt(path)
    assert gt.n_classes == 16
    assert gt.labels.tolist() == [[0, 11, 11], [14, 14, 0]]
    assert gt.classes_present() == [11, 14]


def test_load_gt_without_header_uses_largest_label(tmp_path):
    path = tmp_path / "gt.csv"
    path.write_text("1,2\n3,0\n")
    assert load_gt(path).n_classes == 3


def test_load_gt_ragged_row_reports_row(tmp_path):
    path = tmp_path / "gt.csv"
    path.write_text("1,2,3\n1,2\n")
    with pytest.raises(InputValidationError) as exc:
        load_gt(path)
    assert exc.value.row == 1
    assert "Row 1" in str(exc.value)


@pytest.mark.parametrize("cell", ["-1", "x", "1.5", "", "99999999999999999999"])
def test_load_gt_bad_cell_reports_row(tmp_path, cell):
    path = tmp_path / "gt.csv"
    path.write_text(f"1,2\n3,{cell}\n")
    with pytest.raises(InputValidationError) as exc:
        load_gt(path)
    assert exc.value.row == 1


def test_load_gt_wider_later_row_reports_row(tmp_path):
    path = tmp_path / "gt.csv"
    path.write_text("1,2\n\n1,2,3\n")
    with pytest.raises(InputValidationError) as exc:
        load_gt(path)
    assert exc.value.row == 1


def test_load_gt_out_of_range_label_is_an_input_error(tmp_path):
    path = tmp_path / "gt.csv"
    path.write_text("1,2\n99999999999999999999,1\n")
    with pytest.raises(InputValidationError, match="out of range"):
        load_gt(path)


def test_write_gt_then_load(tmp_path):
    gt = GroundTruth(labels=np.array([[0, 1], [2, 2]]), n_classes=5)
    write_gt(gt, tmp_path / "gt.csv")

    assert (tmp_path / "gt.csv").read_text().splitlines()[0] == "#classes=5"
    loaded = load_gt(tmp_path / "gt.csv")
    assert loaded.n_classes == 5
    assert np.array_equal(loaded.labels, gt.labels)


def test_quantize_constant_image_is_all_zero():
    q = quantize(RealImage(values=np.full((3, 3), 42.0)), 256)
    assert q.n_bins == 256
    assert not q.bins.any()


def test_quantize_min_max_binning():
    q = quantize(np.array([[0.0, 1.0, 2.0, 3.0]]), 4)
    assert q.bins.tolist() == [[0, 1, 2, 3]]

    q = quantize(np.array([[10.0, 20.0]]), 256)
    assert q.bins.tolist() == [[0, 255]]


def test_quantize_preserves_order():
    values = np.random.default_rng(3).uniform(0, 5000, size=(8, 8))
    bins = quantize(values, 16).bins.reshape(-1)
    order = np.argsort(values.reshape(-1), kind="stable")
    assert np.all(np.diff(bins[order]) >= 0)


def test_band_image_out_of_range():
    with pytest.raises(InputValidationError):
        band_image(_cube(), 3)


def test_average_images_size_mismatch():
    a = RealImage(values=np.zeros((2, 2)))
    b = RealImage(values=np.zeros((2, 3)))
    with pytest.raises(InputValidationError) as exc:
        average_images(a, b)
    assert exc.value.field == "dimensions"


def test_band_average_single_band_equals_band_image():
    cube = _cube()
    assert np.array_equal(approx_gt_band_average(cube, (1, 1)).values, band_image(cube, 1).values)


def test_band_average_inclusive_range():
    cube = _cube(bands=3, height=1, width=2)
    avg = approx_gt_band_average(cube, (0, 2))
    assert avg.values.tolist() == [[2.0, 3.0]]


@pytest.mark.parametrize("band_range", [(2, 1), (-1, 0), (0, 3)])
def test_band_average_bad_range(band_range):
    with pytest.raises(InputValidationError):
        approx_gt_band_average(_cube(), band_range)


def test_models_are_read_only():
    cube = _cube()
    with pytest.raises(ValueError):
        cube.data[0, 0, 0] = 7
