"""
Hyperspectral cube and ground-truth I/O

Loads, validates and quantizes band-sequential cubes and label maps, and
exposes the per-pixel vector view used by the evaluator.
"""
import io
import json
import os
from pathlib import Path
from typing import List, Literal, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from .errors import CorruptInputError, InputValidationError


U16_MAX = 65535
CLASSES_HEADER_PREFIX = "#classes="


def _freeze(array: np.ndarray) -> np.ndarray:
    array = np.ascontiguousarray(array)
    array.flags.writeable = False
    return array


class HyperCube(BaseModel):
    """W x H x B grid of 16-bit reflectances, stored band-major (bands, rows, cols)"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    data: np.ndarray

    @field_validator("data", mode="before")
    @classmethod
    def _check_data(cls, value: np.ndarray) -> np.ndarray:
        value = np.asarray(value)
        if value.ndim != 3 or min(value.shape) < 1:
            raise ValueError(f"cube data must be a non-empty (bands, height, width) array, got shape {value.shape}")
        if value.dtype != np.uint16:
            if np.any(value < 0) or np.any(value > U16_MAX) or not np.all(np.isfinite(value)):
                raise ValueError("cube samples must be representable as unsigned 16-bit integers")
            value = value.astype(np.uint16)
        return _freeze(value)

    @property
    def n_bands(self) -> int:
        return int(self.data.shape[0])

    @property
    def height(self) -> int:
        return int(self.data.shape[1])

    @property
    def width(self) -> int:
        return int(self.data.shape[2])

    @property
    def samples(self) -> np.ndarray:
        """Flat band-sequential view of the samples"""
        return self.data.reshape(-1)

    def pixel_vectors(self, bands: Optional[Sequence[int]] = None) -> np.ndarray:
        """
        Get one row per pixel (row-major order) with the requested bands as columns

        Args:
            bands: Band indices to keep, in order. All bands when None.

        Returns:
            Float array of shape (height * width, len(bands))
        """
        selected = self.data if bands is None else self.data[list(bands)]
        return selected.reshape(selected.shape[0], -1).T.astype(np.float64)


class GroundTruth(BaseModel):
    """Per-pixel class labels; 0 marks an unlabeled pixel"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    labels: np.ndarray
    n_classes: int = Field(ge=1)

    @field_validator("labels", mode="before")
    @classmethod
    def _check_labels(cls, value: np.ndarray) -> np.ndarray:
        value = np.asarray(value)
        if value.ndim != 2 or min(value.shape) < 1:
            raise ValueError(f"labels must be a non-empty 2-D grid, got shape {value.shape}")
        if not np.issubdtype(value.dtype, np.integer):
            raise ValueError("labels must be integers")
        if np.any(value < 0):
            raise ValueError("labels must be non-negative")
        return _freeze(value.astype(np.int64))

    @model_validator(mode="after")
    def _check_range(self) -> "GroundTruth":
        if int(self.labels.max()) > self.n_classes:
            raise ValueError(
                f"label {int(self.labels.max())} exceeds n_classes={self.n_classes}"
            )
        return self

    @property
    def height(self) -> int:
        return int(self.labels.shape[0])

    @property
    def width(self) -> int:
        return int(self.labels.shape[1])

    @property
    def labeled_mask(self) -> np.ndarray:
        return self.labels > 0

    def classes_present(self) -> List[int]:
        """Distinct non-zero labels, ascending"""
        return [int(c) for c in np.unique(self.labels) if c > 0]


class QuantizedImage(BaseModel):
    """Per-pixel bin indices in 0..n_bins-1"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    bins: np.ndarray
    n_bins: int = Field(ge=1)

    @field_validator("bins", mode="before")
    @classmethod
    def _check_bins(cls, value: np.ndarray) -> np.ndarray:
        value = np.asarray(value)
        if value.ndim != 2 or min(value.shape) < 1:
            raise ValueError(f"bins must be a non-empty 2-D grid, got shape {value.shape}")
        if not np.issubdtype(value.dtype, np.integer) or np.any(value < 0):
            raise ValueError("bins must be non-negative integers")
        return _freeze(value.astype(np.int64))

    @model_validator(mode="after")
    def _check_range(self) -> "QuantizedImage":
        if int(self.bins.max()) >= self.n_bins:
            raise ValueError(f"bin index {int(self.bins.max())} >= n_bins={self.n_bins}")
        return self

    @property
    def height(self) -> int:
        return int(self.bins.shape[0])

    @property
    def width(self) -> int:
        return int(self.bins.shape[1])


class RealImage(BaseModel):
    """Real-valued image; holds band images and estimated reference maps"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    values: np.ndarray

    @field_validator("values", mode="before")
    @classmethod
    def _check_values(cls, value: np.ndarray) -> np.ndarray:
        value = np.asarray(value, dtype=np.float64)
        if value.ndim != 2 or min(value.shape) < 1:
            raise ValueError(f"values must be a non-empty 2-D grid, got shape {value.shape}")
        if not np.all(np.isfinite(value)):
            raise ValueError("values must be finite")
        return _freeze(value)

    @property
    def height(self) -> int:
        return int(self.values.shape[0])

    @property
    def width(self) -> int:
        return int(self.values.shape[1])


class CubeHeader(BaseModel):
    """JSON header describing a band-sequential raw cube"""
    width: int = Field(ge=1, le=U16_MAX)
    height: int = Field(ge=1, le=U16_MAX)
    bands: int = Field(ge=1, le=U16_MAX)
    dtype: Literal["u16"] = "u16"
    interleave: Literal["bsq"] = "bsq"
    endian: Literal["little"] = "little"
    raw: str = Field(min_length=1)

    @property
    def expected_bytes(self) -> int:
        return self.width * self.height * self.bands * 2


Image = Union[RealImage, QuantizedImage, GroundTruth]


def image_shape(image: Union[Image, HyperCube]) -> Tuple[int, int]:
    """(height, width) of any raster type"""
    return (image.height, image.width)


def check_same_shape(a: Union[Image, HyperCube], b: Union[Image, HyperCube], what: str = "images") -> None:
    """Raise InputValidationError when two rasters differ in size"""
    if image_shape(a) != image_shape(b):
        raise InputValidationError(
            f"{what} differ in size: {image_shape(a)[1]}x{image_shape(a)[0]} "
            f"vs {image_shape(b)[1]}x{image_shape(b)[0]}",
            field="dimensions"
        )


def _first_error_field(error: ValidationError) -> str:
    errors = error.errors()
    if errors and errors[0].get("loc"):
        return ".".join(str(part) for part in errors[0]["loc"])
    return "header"


def load_cube(path: Union[str, Path]) -> HyperCube:
    """
    Load a cube from its JSON header and sibling raw file

    Args:
        path: Path to the header file

    Returns:
        HyperCube with samples in band-sequential order

    Raises:
        InputValidationError: If the header is unreadable or a field is out of range
        CorruptInputError: If the raw file is missing or has the wrong size
    """
    path = Path(path)
    try:
        with open(path) as f:
            raw_header = json.load(f)
    except FileNotFoundError:
        raise InputValidationError(f"Cube header not found: {path}", field="cube")
    except json.JSONDecodeError as e:
        raise InputValidationError(f"Cube header {path} is not valid JSON: {e}", field="cube")

    try:
        header = CubeHeader.model_validate(raw_header)
    except ValidationError as e:
        field = _first_error_field(e)
        raise InputValidationError(
            f"Cube header {path}: invalid field '{field}': {e.errors()[0]['msg']}",
            field=field
        )

    raw_path = path.parent / header.raw
    actual = raw_path.stat().st_size if raw_path.exists() else 0
    if actual != header.expected_bytes:
        raise CorruptInputError(str(raw_path), header.expected_bytes, actual)

    samples = np.fromfile(raw_path, dtype="<u2")
    data = samples.reshape(header.bands, header.height, header.width).astype(np.uint16)
    return HyperCube(data=data)


def write_cube(cube: HyperCube, path: Union[str, Path], raw_name: Optional[str] = None) -> Path:
    """
    Write a cube as a JSON header plus little-endian u16 band-sequential raw file

    Args:
        cube: Cube to write
        path: Header path; the raw file is written next to it
        raw_name: Raw file name, defaults to the header stem + ".raw"

    Returns:
        Path of the raw file
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    raw_name = raw_name or f"{path.stem}.raw"
    raw_path = path.parent / raw_name

    header = CubeHeader(width=cube.width, height=cube.height, bands=cube.n_bands, raw=raw_name)

    tmp_raw = raw_path.with_name(raw_path.name + ".tmp")
    cube.data.astype("<u2").tofile(tmp_raw)
    os.replace(tmp_raw, raw_path)

    tmp_header = path.with_name(path.name + ".tmp")
    tmp_header.write_text(json.dumps(header.model_dump(), indent=2, sort_keys=True) + "\n")
    os.replace(tmp_header, path)
    return raw_path


def load_gt(path: Union[str, Path]) -> GroundTruth:
    """
    Load a ground-truth label grid from CSV

    An optional first line "#classes=<Nc>" declares the number of classes;
    otherwise it is the largest label found (at least 1).

    Raises:
        InputValidationError: On ragged rows, negative or non-integer cells (row index in message)
    """
    path = Path(path)
    if not path.exists():
        raise InputValidationError(f"Ground truth file not found: {path}", field="gt")

    declared: Optional[int] = None
    rows: List[List[int]] = []
    with open(path, newline="") as f:
        lines = f.read().splitlines()

    if lines and lines[0].strip().startswith(CLASSES_HEADER_PREFIX):
        value = lines[0].strip()[len(CLASSES_HEADER_PREFIX):]
        try:
            declared = int(value)
        except ValueError:
            raise InputValidationError(f"Invalid class count header: {lines[0]!r}", field="n_classes", row=0)
        if declared < 1:
            raise InputValidationError(f"Class count must be positive, got {declared}", field="n_classes", row=0)
        lines = lines[1:]

    data_lines = [line for line in lines if line.strip()]
    if not data_lines:
        raise InputValidationError(f"Ground truth file {path} is empty", field="labels")

    widths = [line.count(",") + 1 for line in data_lines]
    frame = pd.read_csv(
        io.StringIO("\n".join(data_lines)),
        header=None,
        names=list(range(max(widths))),
        dtype=str,
        keep_default_na=False
    )

    label_max = np.iinfo(np.int64).max
    for row_index, width in enumerate(widths):
        if width != widths[0]:
            raise InputValidationError(
                f"Row {row_index}: expected {widths[0]} cells, found {width}",
                field="labels",
                row=row_index
            )
        parsed = []
        for cell in frame.iloc[row_index, :width]:
            try:
                label = int(str(cell).strip())
            except ValueError:
                raise InputValidationError(
                    f"Row {row_index}: non-integer cell {cell!r}", field="labels", row=row_index
                )
            if label < 0:
                raise InputValidationError(
                    f"Row {row_index}: negative label {label}", field="labels", row=row_index
                )
            if label > label_max:
                raise InputValidationError(
                    f"Row {row_index}: label {label} is out of range", field="labels", row=row_index
                )
            parsed.append(label)
        rows.append(parsed)

    if not rows or not rows[0]:
        raise InputValidationError(f"Ground truth file {path} is empty", field="labels")

    labels = np.array(rows, dtype=np.int64)
    n_classes = declared if declared is not None else max(int(labels.max()), 1)
    if int(labels.max()) > n_classes:
        raise InputValidationError(
            f"Label {int(labels.max())} exceeds declared class count {n_classes}", field="n_classes"
        )
    return GroundTruth(labels=labels, n_classes=n_classes)


def write_gt(gt: GroundTruth, path: Union[str, Path]) -> None:
    """Write a label grid as CSV with a "#classes=" header line"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w", newline="") as f:
        f.write(f"{CLASSES_HEADER_PREFIX}{gt.n_classes}\n")
        pd.DataFrame(gt.labels).to_csv(f, header=False, index=False, lineterminator="\n")
    os.replace(tmp, path)


def quantize(image: Union[RealImage, np.ndarray], n_bins: int) -> QuantizedImage:
    """
    Linear min-max binning

    bin = floor((v - min) * n_bins / (max - min)), with the maximum mapped to
    n_bins - 1. A constant image maps to bin 0 everywhere.
    """
    if n_bins < 1:
        raise InputValidationError(f"n_bins must be >= 1, got {n_bins}", field="n_bins")

    values = image.values if isinstance(image, RealImage) else np.asarray(image, dtype=np.float64)
    if values.ndim == 1:
        values = values.reshape(1, -1)

    lo = float(values.min())
    hi = float(values.max())
    if hi == lo:
        return QuantizedImage(bins=np.zeros(values.shape, dtype=np.int64), n_bins=n_bins)

    scaled = np.floor((values - lo) * n_bins / (hi - lo))
    bins = np.clip(scaled, 0, n_bins - 1).astype(np.int64)
    return QuantizedImage(bins=bins, n_bins=n_bins)


def band_image(cube: HyperCube, band: int) -> RealImage:
    """One band of the cube as a real image, values unchanged"""
    if not 0 <= band < cube.n_bands:
        raise InputValidationError(
            f"Band index {band} out of range for a cube with {cube.n_bands} bands", field="band"
        )
    return RealImage(values=cube.data[band].astype(np.float64))


def average_images(a: RealImage, b: RealImage) -> RealImage:
    """Pixel-wise arithmetic mean in real arithmetic"""
    check_same_shape(a, b)
    return RealImage(values=(a.values + b.values) / 2.0)


def approx_gt_band_average(cube: HyperCube, band_range: Tuple[int, int]) -> RealImage:
    """
    Pixel-wise mean over an inclusive band range

    Stands in for the ground truth when none is supplied (e.g. a range of
    long-wavelength bands of a wide-range sensor).
    """
    lo, hi = band_range
    if lo > hi:
        raise InputValidationError(f"Empty band range {lo}:{hi}", field="approx_gt")
    if lo < 0 or hi >= cube.n_bands:
        raise InputValidationError(
            f"Band range {lo}:{hi} outside 0:{cube.n_bands - 1}", field="approx_gt"
        )
    if lo == hi:
        return band_image(cube, lo)
    stack = cube.data[lo:hi + 1].astype(np.float64)
    return RealImage(values=stack.mean(axis=0))
