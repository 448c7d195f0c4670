"""Discrete information measures over integer-coded pixel samples.

Every measure here is a plug-in (empirical histogram) estimator reported
in bits. Entropy is Shannon entropy H = -sum(p * log2 p); mutual
information is computed through the entropy identity
I(A,B) = H(A) + H(B) - H(A,B); interaction information is the symmetric
three-variable quantity I(A,B,C) = I((A,B);C) - I(A;C) - I(B;C), which is
positive for synergy and negative for redundancy.

All functions are pure and operate on immutable inputs, so batched
scoring of many variables against a fixed pair may run concurrently;
results do not depend on evaluation order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _core

MIN_MAX_UNIFORM = "min_max_uniform"
GT_RANGE = "gt_range"
_STRATEGIES = (MIN_MAX_UNIFORM, GT_RANGE)

# joint_histogram materializes a dense array; refuse absurd level spaces.
_HISTOGRAM_CELL_CAP = 1 << 24


@dataclass(frozen=True, eq=False)
class CodedVariable:
    """Integer-coded sample vector with levels in ``0..alphabet_size-1``.

    One entry per labeled pixel; every CodedVariable derived from the same
    (cube, ground truth) pair shares the canonical row-major labeled-pixel
    ordering and therefore the same length.
    """

    codes: np.ndarray
    alphabet_size: int

    def __post_init__(self):
        codes = np.ascontiguousarray(self.codes, dtype=np.int32)
        if codes.ndim != 1:
            raise ValueError("codes must be a 1-D vector")
        if self.alphabet_size < 1:
            raise ValueError("alphabet_size must be >= 1")
        if codes.size and (codes.min() < 0 or codes.max() >= self.alphabet_size):
            raise ValueError(
                f"codes out of range for alphabet of size {self.alphabet_size}")
        codes.flags.writeable = False
        object.__setattr__(self, "codes", codes)

    def __len__(self):
        return self.codes.size


@dataclass(frozen=True)
class DiscretizationConfig:
    """How band radiance is quantized into integer codes.

    ``min_max_uniform`` maps the observed [min, max] of a band (over the
    labeled pixels) onto ``n_bins`` uniform-width bins, codes
    ``0..n_bins-1``. ``gt_range`` bins the same range straight into the
    ground-truth label alphabet (codes ``0..n_classes-1``), so a band
    whose values are the labels recodes them exactly; ``n_bins`` is
    ignored for that strategy.
    """

    n_bins: int = 256
    strategy: str = MIN_MAX_UNIFORM

    def __post_init__(self):
        if self.n_bins < 2:
            raise ValueError("n_bins must be >= 2")
        if self.strategy not in _STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}; "
                             f"expected one of {_STRATEGIES}")


@dataclass(frozen=True, eq=False)
class JointHistogram:
    """Dense joint count array over the level product space."""

    dims: tuple[int, ...]
    counts: np.ndarray
    total: int


def _check_lengths(*variables: CodedVariable):
    n = len(variables[0])
    for v in variables[1:]:
        if len(v) != n:
            raise ValueError(
                f"coded variables differ in length ({n} vs {len(v)})")
    if n == 0:
        raise ValueError("coded variables must be nonempty")


def discretize_band(cube, band: int, gt, config: DiscretizationConfig) -> CodedVariable:
    """Quantize one band over the labeled pixels in canonical order.

    ``band`` is a user-facing band id (1-based by default, following
    ``cube.band_id_offset``). Bin edges are uniform over the band's
    observed [min, max] on the labeled pixels, half-open with the maximum
    clamped into the top bin; a constant band codes every pixel as 0.
    """
    mask = gt.labeled_mask
    if not mask.any():
        raise ValueError("ground truth has no labeled pixels")
    values = cube.band_values(band)[mask].astype(np.float64)
    if config.strategy == GT_RANGE:
        n_bins = gt.n_classes
    else:
        n_bins = config.n_bins
    lo = values.min()
    hi = values.max()
    if hi == lo:
        codes = np.zeros(values.size, dtype=np.int32)
    else:
        scaled = (values - lo) * (n_bins / (hi - lo))
        codes = np.clip(np.floor(scaled).astype(np.int64), 0, n_bins - 1)
    return CodedVariable(codes, n_bins)


def gt_codes(gt) -> CodedVariable:
    """Ground-truth labels over labeled pixels, remapped to ``0..C-1``."""
    mask = gt.labeled_mask
    if not mask.any():
        raise ValueError("ground truth has no labeled pixels")
    return CodedVariable(gt.labels[mask].astype(np.int64) - 1, gt.n_classes)


def joint_histogram(*variables: CodedVariable) -> JointHistogram:
    """Dense joint histogram of 1 to 3 coded variables."""
    if not 1 <= len(variables) <= 3:
        raise ValueError("joint_histogram takes 1 to 3 variables")
    _check_lengths(*variables)
    dims = tuple(v.alphabet_size for v in variables)
    if math.prod(dims) > _HISTOGRAM_CELL_CAP:
        raise ValueError(f"joint level space {dims} is too large to "
                         f"materialize (> {_HISTOGRAM_CELL_CAP} cells)")
    counts = _core.dense_counts(tuple(v.codes for v in variables), dims)
    counts.flags.writeable = False
    return JointHistogram(dims, counts, len(variables[0]))


def entropy(x: CodedVariable) -> float:
    """Shannon entropy in bits, clamped into [0, log2(alphabet_size)]."""
    _check_lengths(x)
    h = _core.joint_entropy_bits((x.codes,), (x.alphabet_size,))
    return min(max(h, 0.0), math.log2(x.alphabet_size))


def joint_entropy(*variables: CodedVariable) -> float:
    """Entropy in bits of the product-alphabet pairing of 2 or 3 variables."""
    if len(variables) not in (2, 3):
        raise ValueError("joint_entropy takes 2 or 3 variables")
    _check_lengths(*variables)
    dims = tuple(v.alphabet_size for v in variables)
    h = _core.joint_entropy_bits(tuple(v.codes for v in variables), dims)
    return min(max(h, 0.0), math.log2(math.prod(dims)))


def mutual_info(a: CodedVariable, b: CodedVariable) -> float:
    """I(A,B) = H(A) + H(B) - H(A,B) in bits, clamped at 0."""
    _check_lengths(a, b)
    ha, hb, hab = _core.entropy_terms2(a.codes, b.codes,
                                       a.alphabet_size, b.alphabet_size)
    return max(0.0, (ha + hb) - hab)


def mi_joined(a: CodedVariable, b: CodedVariable, c: CodedVariable) -> float:
    """Mutual information between ``a`` and the joined pair ``(b, c)``."""
    _check_lengths(a, b, c)
    ha, _hb, _hc, _hab, _hac, hbc, habc = _core.entropy_terms3(
        a.codes, b.codes, c.codes,
        a.alphabet_size, b.alphabet_size, c.alphabet_size)
    return max(0.0, (ha + hbc) - habc)


def interaction_info(a: CodedVariable, b: CodedVariable, c: CodedVariable) -> float:
    """Interaction information I(A,B,C) in bits (signed).

    Equals I((A,B);C) - I(A;C) - I(B;C): positive when the variables are
    jointly informative beyond their pairwise contributions (synergy),
    negative when they overlap (redundancy). Invariant under permutation
    of the arguments. Never clamped; the sign is meaningful.
    """
    _check_lengths(a, b, c)
    ha, hb, hc, hab, hac, hbc, habc = _core.entropy_terms3(
        a.codes, b.codes, c.codes,
        a.alphabet_size, b.alphabet_size, c.alphabet_size)
    # Grouped so that degenerate candidates cancel exactly: a constant or
    # duplicate argument yields identical paired terms and an exact result.
    return (hab - ha - hb) + (hbc - hc) + (hac - habc)
