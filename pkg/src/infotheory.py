"""
Discrete information measures over quantized images and label maps

All probabilities are empirical frequencies taken from a joint histogram.
Terms are evaluated from integer counts and summed with math.fsum, so the
result does not depend on summation order: histograms that are equal up to a
permutation of rows/columns give bit-identical values.
"""
import math
from typing import Optional, Sequence, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .errors import DegenerateDataError, InputValidationError
from .hypercube_io import GroundTruth, QuantizedImage, check_same_shape


Discrete = Union[QuantizedImage, GroundTruth]


class JointHistogram(BaseModel):
    """Pixel co-occurrence counts; rows index values of A, columns values of B"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    counts: np.ndarray
    total: int = Field(ge=1)

    @field_validator("counts", mode="before")
    @classmethod
    def _check_counts(cls, value: np.ndarray) -> np.ndarray:
        value = np.asarray(value, dtype=np.int64)
        if value.ndim != 2 or np.any(value < 0):
            raise ValueError("counts must be a 2-D matrix of non-negative integers")
        value = np.ascontiguousarray(value)
        value.flags.writeable = False
        return value

    @model_validator(mode="after")
    def _check_total(self) -> "JointHistogram":
        if int(self.counts.sum()) != self.total:
            raise ValueError(f"total={self.total} does not match the sum of cells {int(self.counts.sum())}")
        return self

    @property
    def row_marginal(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    @property
    def col_marginal(self) -> np.ndarray:
        return self.counts.sum(axis=0)

    def transpose(self) -> "JointHistogram":
        return JointHistogram(counts=self.counts.T, total=self.total)


class FanoBounds(BaseModel):
    """Bounds on classification error probability derived from H(C|X)"""
    model_config = ConfigDict(frozen=True)

    h_c: float
    h_c_given_x: float
    mi: float
    n_classes: int
    lower: float
    upper: float

    @classmethod
    def from_entropies(cls, h_c: float, mi: float, n_classes: int) -> "FanoBounds":
        """
        Build bounds from H(C), I(C;X) and the number of classes

        lower = max(0, (H(C|X) - 1) / log2(Nc)); upper = H(C|X) / log2(2).
        """
        if n_classes < 2:
            raise DegenerateDataError(f"Fano bounds need at least 2 classes, got {n_classes}")
        h_c_given_x = max(h_c - mi, 0.0)
        lower = max(0.0, (h_c_given_x - 1.0) / math.log2(n_classes))
        upper = h_c_given_x / math.log2(2)
        return cls(
            h_c=h_c,
            h_c_given_x=h_c_given_x,
            mi=mi,
            n_classes=n_classes,
            lower=lower,
            upper=upper
        )


def _axis(image: Discrete, flat: np.ndarray) -> tuple:
    """Histogram codes and axis length for the selected pixels of one image"""
    if isinstance(image, GroundTruth):
        # Labels are sparse and unbounded; only the values present get a row
        present, codes = np.unique(flat, return_inverse=True)
        return codes.reshape(-1), present.size
    return flat, max(image.n_bins, int(flat.max()) + 1)


def _selected(image: Discrete, keep: Optional[np.ndarray]) -> np.ndarray:
    values = image.labels if isinstance(image, GroundTruth) else image.bins
    return values.reshape(-1) if keep is None else values[keep]


def build_mask(
    a: Discrete,
    b: Discrete,
    mask: Optional[np.ndarray] = None,
    labeled_only: bool = True
) -> Optional[np.ndarray]:
    """
    Combine an explicit pixel predicate with the labeled-only rule

    Returns None when every pixel is included.
    """
    check_same_shape(a, b)
    combined = None
    if mask is not None:
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != (a.height, a.width):
            raise InputValidationError(
                f"mask shape {mask.shape} does not match image {(a.height, a.width)}", field="mask"
            )
        combined = mask
    if labeled_only:
        for image in (a, b):
            if isinstance(image, GroundTruth):
                combined = image.labeled_mask if combined is None else combined & image.labeled_mask
    return combined


def joint_histogram(
    a: Discrete,
    b: Discrete,
    mask: Optional[np.ndarray] = None,
    labeled_only: bool = True
) -> JointHistogram:
    """
    Count pixels by (value of a, value of b)

    Args:
        a: Quantized image or ground truth (rows)
        b: Quantized image or ground truth (columns)
        mask: Optional boolean pixel predicate
        labeled_only: Exclude label-0 pixels of any participating ground truth

    Raises:
        InputValidationError: If a and b differ in size
        DegenerateDataError: If no pixel passes the mask
    """
    keep = build_mask(a, b, mask, labeled_only)
    a_flat = _selected(a, keep)
    b_flat = _selected(b, keep)

    if a_flat.size == 0:
        raise DegenerateDataError("No pixel passes the mask; cannot estimate a distribution")

    a_codes, n_a = _axis(a, a_flat)
    b_codes, n_b = _axis(b, b_flat)
    counts = np.bincount(a_codes * n_b + b_codes, minlength=n_a * n_b).reshape(n_a, n_b)
    return JointHistogram(counts=counts, total=int(a_flat.size))


def entropy(counts: Sequence[int]) -> float:
    """
    Shannon entropy in bits of an empirical distribution given as counts

    Raises:
        DegenerateDataError: If all counts are zero
    """
    counts = np.asarray(counts, dtype=np.int64).reshape(-1)
    if np.any(counts < 0):
        raise InputValidationError("counts must be non-negative", field="counts")
    total = int(counts.sum())
    if total == 0:
        raise DegenerateDataError("entropy of an all-zero count vector is undefined")

    nonzero = counts[counts > 0].astype(np.float64)
    terms = (nonzero / total) * np.log2(total / nonzero)
    return math.fsum(terms.tolist())


def histogram_mutual_information(hist: JointHistogram) -> float:
    """Mutual information in bits of the distribution a joint histogram describes"""
    counts = hist.counts
    total = float(hist.total)
    rows = hist.row_marginal.astype(np.float64)
    cols = hist.col_marginal.astype(np.float64)

    i, j = np.nonzero(counts)
    n_ij = counts[i, j].astype(np.float64)
    terms = (n_ij / total) * np.log2((n_ij * total) / (rows[i] * cols[j]))
    return max(math.fsum(terms.tolist()), 0.0)


def mutual_information(
    a: Discrete,
    b: Discrete,
    mask: Optional[np.ndarray] = None,
    labeled_only: bool = True
) -> float:
    """
    I(A;B) in bits, estimated from the joint histogram of two discrete images

    Symmetric in its arguments; zero when either image is constant over the mask.
    """
    return histogram_mutual_information(joint_histogram(a, b, mask, labeled_only))


def conditional_entropy(
    c: GroundTruth,
    x: QuantizedImage,
    mask: Optional[np.ndarray] = None,
    labeled_only: bool = True
) -> float:
    """H(C|X) = H(C) - I(C;X) over the masked pixels"""
    hist = joint_histogram(c, x, mask, labeled_only)
    h_c = entropy(hist.row_marginal)
    return max(h_c - histogram_mutual_information(hist), 0.0)


def fano_bounds(
    c: GroundTruth,
    x: QuantizedImage,
    mask: Optional[np.ndarray] = None,
    labeled_only: bool = True
) -> FanoBounds:
    """
    Lower and upper bounds on the error probability of predicting C from X

    The number of classes is the number of distinct nonzero labels present in
    the masked pixels. With labeled_only off, label 0 still enters H(C) but
    does not count as a class.

    Raises:
        DegenerateDataError: If fewer than 2 labeled classes are present
    """
    hist = joint_histogram(c, x, mask, labeled_only)
    labels = _selected(c, build_mask(c, x, mask, labeled_only))
    present = int(np.unique(labels[labels > 0]).size)
    if present < 2:
        raise DegenerateDataError(
            f"Fano bounds need at least 2 labeled classes present, found {present}"
        )
    h_c = entropy(hist.row_marginal)
    mi = histogram_mutual_information(hist)
    return FanoBounds.from_entropies(h_c, mi, present)
