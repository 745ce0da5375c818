"""
Synthetic scenes for oracle testing

Builds rectangular-region ground truths and class-indicator bands: band A holds
one class, band B another, band C both. Averaging A or B into C adds no
information; averaging A with B does.
"""
from typing import Dict, Iterable, List, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from .errors import InputValidationError
from .hypercube_io import U16_MAX, GroundTruth, HyperCube, RealImage
from .observability import ObservabilityManager


TABLE1_CLASS_A = 11
TABLE1_CLASS_B = 14

# Well separated so that averages of these values never share a 256-bin quantization cell
TABLE1_FILL_A = 2000.0
TABLE1_FILL_B = 6000.0


class Region(BaseModel):
    """Half-open pixel rectangle [x0, x1) x [y0, y1) carrying one label"""
    model_config = ConfigDict(frozen=True)

    x0: int = Field(ge=0)
    y0: int = Field(ge=0)
    x1: int
    y1: int
    label: int = Field(ge=0)

    @model_validator(mode="after")
    def _check_extent(self) -> "Region":
        if self.x1 <= self.x0 or self.y1 <= self.y0:
            raise ValueError(f"empty region {self.x0}:{self.x1} x {self.y0}:{self.y1}")
        return self


class SceneSpec(BaseModel):
    """Size, class count and region layout of a synthetic scene"""
    model_config = ConfigDict(frozen=True)

    width: int = Field(ge=1)
    height: int = Field(ge=1)
    n_classes: int = Field(ge=1)
    regions: List[Region] = Field(default_factory=list)
    noise_seed: Optional[int] = None
    noise_amplitude: float = Field(default=0.0, ge=0.0)

    @model_validator(mode="after")
    def _check_regions(self) -> "SceneSpec":
        for region in self.regions:
            if region.x1 > self.width or region.y1 > self.height:
                raise ValueError(f"region {region.model_dump()} exceeds the {self.width}x{self.height} scene")
            if region.label > self.n_classes:
                raise ValueError(f"region label {region.label} exceeds n_classes={self.n_classes}")
        return self


class IndicatorBand(BaseModel):
    """A generated band plus notes about requested classes absent from the GT"""
    model_config = ConfigDict(frozen=True)

    image: RealImage
    missing_classes: List[int] = Field(default_factory=list)


class Table1Facts(BaseModel):
    """Orderings and equalities the A, B, C scene is built to exhibit"""
    model_config = ConfigDict(frozen=True)

    expected_rank: List[int]
    redundant_pairs: List[Tuple[int, int]]
    additive_pair: Tuple[int, int]
    equal_ab: bool = False


class Table1Scenario(BaseModel):
    model_config = ConfigDict(frozen=True)

    cube: HyperCube
    gt: GroundTruth
    expected: Table1Facts


class PipelineScenario(BaseModel):
    """Four-class scene with three informative and three constant bands"""
    model_config = ConfigDict(frozen=True)

    cube: HyperCube
    gt: GroundTruth
    informative_bands: List[int]
    constant_bands: List[int]


def make_gt(spec: SceneSpec) -> GroundTruth:
    """
    Paint the region layout into a label grid; unassigned pixels stay 0

    Raises:
        InputValidationError: If overlapping regions carry different labels
    """
    labels = np.zeros((spec.height, spec.width), dtype=np.int64)
    painted = np.zeros_like(labels, dtype=bool)

    for region in spec.regions:
        window = (slice(region.y0, region.y1), slice(region.x0, region.x1))
        clash = painted[window] & (labels[window] != region.label)
        if np.any(clash):
            raise InputValidationError(
                f"Region with label {region.label} overlaps a region with a different label",
                field="regions"
            )
        labels[window] = region.label
        painted[window] = True

    return GroundTruth(labels=labels, n_classes=spec.n_classes)


def make_indicator_band(
    gt: GroundTruth,
    classes: Iterable[int],
    fill_value: Union[float, Dict[int, float]],
    background: float = 0.0,
    noise_amplitude: float = 0.0,
    seed: Optional[int] = None,
    observability: Optional[ObservabilityManager] = None
) -> IndicatorBand:
    """
    Band whose listed classes get their fill value and everything else the background

    Args:
        gt: Label map defining the class regions
        classes: Labels to paint
        fill_value: One value for all listed classes, or a value per class
        background: Value elsewhere
        noise_amplitude: Half-width of uniform noise added on painted pixels
        seed: Noise seed

    Returns:
        IndicatorBand; classes absent from the GT are listed in missing_classes
    """
    classes = sorted(set(classes))
    if not classes:
        raise InputValidationError("At least one class is required", field="classes")

    values = np.full(gt.labels.shape, float(background))
    present = set(gt.classes_present())
    missing = [c for c in classes if c not in present]

    rng = np.random.default_rng(seed)
    noise = rng.uniform(-noise_amplitude, noise_amplitude, size=values.shape) if noise_amplitude > 0 else None

    for label in classes:
        fill = fill_value[label] if isinstance(fill_value, dict) else fill_value
        where = gt.labels == label
        values[where] = float(fill)
        if noise is not None:
            values[where] += noise[where]

    if missing and observability:
        observability.log_event(
            "indicator_missing_classes",
            f"Classes {missing} do not occur in the ground truth",
            {"missing": missing},
            level="warning"
        )
    return IndicatorBand(image=RealImage(values=values), missing_classes=missing)


def cube_from_images(images: List[RealImage]) -> HyperCube:
    """Stack real images into a u16 cube, rounding and clipping to the u16 range"""
    stack = np.stack([np.clip(np.rint(image.values), 0, U16_MAX) for image in images])
    return HyperCube(data=stack.astype(np.uint16))


def table1_preset(size: int = 64, n_classes: int = 16) -> SceneSpec:
    """
    Default desk-scale layout: vertical strips of about 40% class 11, 20% class 14,
    and two other labeled classes sharing the rest
    """
    if size < 5:
        raise InputValidationError(f"Scene size must be at least 5, got {size}", field="size")
    a_end = max(1, round(0.4 * size))
    b_end = a_end + max(1, round(0.2 * size))
    c_end = b_end + max(1, (size - b_end + 1) // 2)
    strips = [
        (0, a_end, TABLE1_CLASS_A),
        (a_end, b_end, TABLE1_CLASS_B),
        (b_end, c_end, 2),
        (c_end, size, 5),
    ]
    return SceneSpec(
        width=size,
        height=size,
        n_classes=n_classes,
        regions=[Region(x0=x0, y0=0, x1=x1, y1=size, label=label) for x0, x1, label in strips if x1 > x0]
    )


def table1_scenario(
    spec: SceneSpec,
    observability: Optional[ObservabilityManager] = None
) -> Table1Scenario:
    """
    Three-band cube [A, B, C] over the scene's ground truth

    A paints class 11, B class 14, C both (with A's and B's values).

    Raises:
        InputValidationError: If the scene lacks class 11 or class 14
    """
    gt = make_gt(spec)
    present = set(gt.classes_present())
    missing = [c for c in (TABLE1_CLASS_A, TABLE1_CLASS_B) if c not in present]
    if missing:
        raise InputValidationError(
            f"Scene must contain classes {TABLE1_CLASS_A} and {TABLE1_CLASS_B}; missing {missing}",
            field="regions"
        )

    noise = dict(noise_amplitude=spec.noise_amplitude, seed=spec.noise_seed, observability=observability)
    band_a = make_indicator_band(gt, [TABLE1_CLASS_A], TABLE1_FILL_A, **noise)
    band_b = make_indicator_band(gt, [TABLE1_CLASS_B], TABLE1_FILL_B, **noise)
    band_c = make_indicator_band(
        gt,
        [TABLE1_CLASS_A, TABLE1_CLASS_B],
        {TABLE1_CLASS_A: TABLE1_FILL_A, TABLE1_CLASS_B: TABLE1_FILL_B},
        **noise
    )
    cube = cube_from_images([band_a.image, band_b.image, band_c.image])

    size_a = int(np.count_nonzero(gt.labels == TABLE1_CLASS_A))
    size_b = int(np.count_nonzero(gt.labels == TABLE1_CLASS_B))
    if size_a >= size_b:
        expected_rank = [2, 0, 1]
    else:
        expected_rank = [2, 1, 0]

    facts = Table1Facts(
        expected_rank=expected_rank,
        redundant_pairs=[(0, 2), (1, 2)],
        additive_pair=(0, 1),
        equal_ab=size_a == size_b
    )
    return Table1Scenario(cube=cube, gt=gt, expected=facts)


def indicator_scenario(
    spec: SceneSpec,
    observability: Optional[ObservabilityManager] = None
) -> Tuple[HyperCube, GroundTruth]:
    """
    One indicator band per class present in a scene layout

    Band i paints the i-th present class (ascending label order) with
    1000 * (i + 1) on a zero background. A layout holding classes 11 and 14
    gets the A, B, C bands instead.
    """
    gt = make_gt(spec)
    present = gt.classes_present()
    if not present:
        raise InputValidationError("Scene has no labeled regions", field="regions")
    if TABLE1_CLASS_A in present and TABLE1_CLASS_B in present:
        scenario = table1_scenario(spec, observability)
        return scenario.cube, scenario.gt

    bands = [
        make_indicator_band(
            gt, [label], min(1000.0 * (i + 1), float(U16_MAX)), 0.0,
            spec.noise_amplitude, None if spec.noise_seed is None else spec.noise_seed + i,
            observability
        ).image
        for i, label in enumerate(present)
    ]
    return cube_from_images(bands), gt


def pipeline_scenario(
    size: int = 32,
    noise_amplitude: float = 0.0,
    seed: Optional[int] = None
) -> PipelineScenario:
    """
    Four quadrant classes observed through three informative and three constant bands

    Band 0 separates {1,2} from {3,4}, band 1 separates {1,3} from {2,4} and
    band 2 singles out class 4. No single band separates all classes; bands 0
    and 1 together do. Bands 3..5 are constant.
    """
    if size < 2 or size % 2:
        raise InputValidationError(f"Scene size must be a positive even number, got {size}", field="size")
    half = size // 2
    spec = SceneSpec(
        width=size,
        height=size,
        n_classes=4,
        regions=[
            Region(x0=0, y0=0, x1=half, y1=half, label=1),
            Region(x0=half, y0=0, x1=size, y1=half, label=2),
            Region(x0=0, y0=half, x1=half, y1=size, label=3),
            Region(x0=half, y0=half, x1=size, y1=size, label=4),
        ],
        noise_seed=seed,
        noise_amplitude=noise_amplitude
    )
    gt = make_gt(spec)

    rng_seeds = [None if seed is None else seed + k for k in range(3)]
    background = 1000.0
    informative = [
        make_indicator_band(gt, [3, 4], 5000.0, background, noise_amplitude, rng_seeds[0]),
        make_indicator_band(gt, [2, 4], 3000.0, background, noise_amplitude, rng_seeds[1]),
        make_indicator_band(gt, [4], 7000.0, background, noise_amplitude, rng_seeds[2]),
    ]
    constants = [RealImage(values=np.full((size, size), value)) for value in (1500.0, 4000.0, 9000.0)]

    cube = cube_from_images([band.image for band in informative] + constants)
    return PipelineScenario(cube=cube, gt=gt, informative_bands=[0, 1, 2], constant_bands=[3, 4, 5])
