"""
Classification accuracy of a band subset

Labeled pixels are split into train and test sets; a classifier is trained on
the train pixels' band-restricted vectors and scored on the test pixels.
"""
import hashlib
from typing import Dict, List, Optional, Protocol, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from sklearn.metrics import pairwise_distances
from sklearn.model_selection import train_test_split
from sklearn.neighbors import NearestCentroid
from sklearn.preprocessing import StandardScaler

from .errors import DegenerateDataError, InputValidationError
from .hypercube_io import GroundTruth, HyperCube, check_same_shape
from .observability import ObservabilityManager


class SplitSpec(BaseModel):
    """How labeled pixels are divided between training and testing"""
    model_config = ConfigDict(frozen=True)

    train_fraction: float = Field(default=0.5, gt=0.0, lt=1.0)
    seed: int = 0
    stratified: bool = True


class DataSplit(BaseModel):
    """Flat (row-major) pixel indices of the train and test sets"""
    model_config = ConfigDict(frozen=True)

    train: List[int]
    test: List[int]
    warnings: List[str] = Field(default_factory=list)


class EvalReport(BaseModel):
    """Accuracy of one band subset"""
    model_config = ConfigDict(frozen=True)

    overall_accuracy: float = Field(ge=0.0, le=100.0)
    per_class_accuracy: Dict[int, float]
    n_train: int
    n_test: int
    bands_used: List[int]
    split: SplitSpec
    classifier: str
    run_id: Optional[str] = None
    warnings: List[str] = Field(default_factory=list)

    @property
    def bands_hash(self) -> str:
        return bands_hash(self.bands_used)


def bands_hash(bands: Sequence[int]) -> str:
    """Short stable hash of an ordered band list"""
    return hashlib.sha256(",".join(str(b) for b in bands).encode()).hexdigest()[:12]


class BandClassifier(Protocol):
    """Anything that can be fitted on pixel vectors and predict labels"""
    name: str

    def fit(self, X: np.ndarray, y: np.ndarray) -> "BandClassifier":
        ...

    def predict(self, X: np.ndarray) -> np.ndarray:
        ...


class NearestCentroidClassifier:
    """
    Nearest class centroid on features standardized with training statistics

    Zero-variance features get unit scale. Equidistant centroids resolve to
    the class most frequent in training, then to the lower label.
    """
    name = "nearest_centroid"

    def __init__(self, tie_tolerance: float = 1e-12):
        self.tie_tolerance = tie_tolerance
        self.scaler = StandardScaler()
        self.model = NearestCentroid()
        self.classes_: Optional[np.ndarray] = None
        self.centroids_: Optional[np.ndarray] = None
        self._priority: Optional[np.ndarray] = None

    def fit(self, X: np.ndarray, y: np.ndarray) -> "NearestCentroidClassifier":
        scaled = self.scaler.fit_transform(np.asarray(X, dtype=np.float64))
        y = np.asarray(y)

        if np.any(np.ptp(scaled, axis=0) > 0):
            self.model.fit(scaled, y)
            self.classes_, self.centroids_ = self.model.classes_, self.model.centroids_
        else:
            # NearestCentroid refuses input where every feature is constant
            self.classes_ = np.unique(y)
            self.centroids_ = np.vstack([scaled[y == c].mean(axis=0) for c in self.classes_])

        train_counts = np.array([np.count_nonzero(y == c) for c in self.classes_])
        # lexsort: last key is primary; higher count first, then lower label
        self._priority = np.lexsort((self.classes_, -train_counts))
        return self

    def predict(self, X: np.ndarray) -> np.ndarray:
        scaled = self.scaler.transform(np.asarray(X, dtype=np.float64))
        distances = pairwise_distances(scaled, self.centroids_)

        nearest = distances.min(axis=1, keepdims=True)
        tied = distances <= nearest + self.tie_tolerance * np.maximum(1.0, nearest)
        ordered = tied[:, self._priority]
        winner = self._priority[np.argmax(ordered, axis=1)]
        return self.classes_[winner]


def _labeled_indices(gt: GroundTruth) -> np.ndarray:
    return np.flatnonzero(gt.labels.reshape(-1) > 0)


def _train_count(n: int, fraction: float) -> int:
    return min(max(int(np.floor(n * fraction + 0.5)), 1), n - 1)


def split_labeled(
    gt: GroundTruth,
    spec: SplitSpec,
    observability: Optional[ObservabilityManager] = None
) -> DataSplit:
    """
    Split labeled pixels into disjoint train and test sets

    Deterministic given the seed. With stratification every class with at
    least two pixels contributes to both sides; a single-pixel class goes to
    train and a warning is recorded.

    Raises:
        DegenerateDataError: If fewer than 2 pixels are labeled
    """
    labeled = _labeled_indices(gt)
    if labeled.size < 2:
        raise DegenerateDataError(f"Need at least 2 labeled pixels to split, found {labeled.size}")

    warnings: List[str] = []
    if not spec.stratified:
        train, test = train_test_split(
            labeled,
            train_size=_train_count(labeled.size, spec.train_fraction),
            random_state=spec.seed,
            shuffle=True
        )
    else:
        flat_labels = gt.labels.reshape(-1)
        rng = np.random.default_rng(spec.seed)
        train_parts, test_parts = [], []
        for label in gt.classes_present():
            members = labeled[flat_labels[labeled] == label]
            if members.size == 1:
                train_parts.append(members)
                warnings.append(f"class {label} has a single labeled pixel; placed in train")
                continue
            shuffled = rng.permutation(members)
            k = _train_count(members.size, spec.train_fraction)
            train_parts.append(shuffled[:k])
            test_parts.append(shuffled[k:])
        train = np.concatenate(train_parts) if train_parts else np.array([], dtype=np.int64)
        test = np.concatenate(test_parts) if test_parts else np.array([], dtype=np.int64)

    if observability:
        for warning in warnings:
            observability.log_event("split_warning", warning, level="warning")

    return DataSplit(
        train=sorted(int(i) for i in train),
        test=sorted(int(i) for i in test),
        warnings=warnings
    )


def evaluate_subset(
    cube: HyperCube,
    gt: GroundTruth,
    bands: Sequence[int],
    spec: SplitSpec,
    classifier: Optional[BandClassifier] = None,
    run_id: Optional[str] = None,
    observability: Optional[ObservabilityManager] = None
) -> EvalReport:
    """
    Train on the train pixels and report test accuracy for a band subset

    Args:
        cube: Hyperspectral cube
        gt: Ground truth labels
        bands: Band indices to use as features
        spec: Train/test split settings
        classifier: Defaults to NearestCentroidClassifier
        run_id: Identifier of the selection the bands came from, if any

    Raises:
        InputValidationError: If bands is empty or out of range, or sizes differ
        DegenerateDataError: If there are no labeled pixels or no test pixels
    """
    bands = [int(b) for b in bands]
    if not bands:
        raise InputValidationError("Band list is empty", field="bands")
    bad = [b for b in bands if not 0 <= b < cube.n_bands]
    if bad:
        raise InputValidationError(
            f"Bands {bad} out of range for a cube with {cube.n_bands} bands", field="bands"
        )
    check_same_shape(cube, gt, "cube and ground truth")

    split = split_labeled(gt, spec, observability)
    if not split.test:
        raise DegenerateDataError("The split left no test pixels")

    features = cube.pixel_vectors(bands)
    flat_labels = gt.labels.reshape(-1)
    train = np.array(split.train)
    test = np.array(split.test)

    if np.unique(flat_labels[train]).size < 2:
        raise DegenerateDataError("Training pixels cover fewer than 2 classes")

    classifier = classifier or NearestCentroidClassifier()
    classifier.fit(features[train], flat_labels[train])
    predicted = np.asarray(classifier.predict(features[test]))
    truth = flat_labels[test]

    correct = predicted == truth
    per_class = {
        int(label): 100.0 * float(np.mean(correct[truth == label]))
        for label in np.unique(truth)
    }
    report = EvalReport(
        overall_accuracy=100.0 * float(np.mean(correct)),
        per_class_accuracy=per_class,
        n_train=len(split.train),
        n_test=len(split.test),
        bands_used=bands,
        split=spec,
        classifier=getattr(classifier, "name", type(classifier).__name__),
        run_id=run_id,
        warnings=split.warnings
    )

    if observability:
        observability.log_event(
            "evaluation_complete",
            f"accuracy {report.overall_accuracy:.2f}% with {len(bands)} bands",
            {"bands": bands, "accuracy": report.overall_accuracy, "n_test": report.n_test}
        )
    return report


def prefix_accuracy(
    cube: HyperCube,
    gt: GroundTruth,
    selected: Sequence[int],
    spec: SplitSpec,
    sizes: Optional[Sequence[int]] = None,
    classifier_factory=NearestCentroidClassifier
) -> Dict[int, float]:
    """
    Accuracy of the first k selected bands for each requested k

    Returns:
        Mapping k -> overall accuracy; sizes larger than the selection are skipped
    """
    sizes = sizes if sizes is not None else range(1, len(selected) + 1)
    return {
        int(k): evaluate_subset(cube, gt, selected[:k], spec, classifier_factory()).overall_accuracy
        for k in sizes
        if 1 <= k <= len(selected)
    }
