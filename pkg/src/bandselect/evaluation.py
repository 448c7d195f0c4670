"""Split / classify / score pipeline for comparing band subsets.

Mirrors the measurement protocol the selectors are judged by: a seeded
(by default stratified) 50/50 split of the labeled pixels, a fully
deterministic k-NN classifier on min-max-normalized selected-band
features, and overall accuracy reported as a percentage. ``sweep`` runs
a selector once and scores each requested prefix of the selected bands,
which is valid because both selectors are greedy without backtracking.

k-NN determinism contract: squared Euclidean distances accumulate in
band order, distance ties break to the lower training-pixel canonical
index, majority ties break to the smallest class code. Distance work may
be parallelized per test pixel as long as results equal the sequential
reference, tie-breaks included.

For running an external classifier instead, ``export_features`` writes
the normalized train/test feature tables as CSV.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import _core
from .data import atomic_write_text
from .selection import SelectionConfig, select_bands

REPORT_CSV_HEADER = "algorithm,n_bands,accuracy_percent,selected_bands"

_TEST_CHUNK = 256  # test rows per distance block; bounds peak memory


@dataclass(frozen=True)
class SplitSpec:
    """Seeded train/test split over the labeled pixels."""

    train_fraction: float = 0.5
    seed: int = 0
    stratified: bool = True

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise ValueError("train_fraction must be in (0, 1)")


@dataclass(frozen=True)
class ClassifierConfig:
    kind: str = "knn"
    k: int = 3

    def __post_init__(self):
        if self.kind != "knn":
            raise ValueError("only the built-in 'knn' classifier runs in "
                             "process; use export_features for external "
                             "classifiers")
        if self.k < 1:
            raise ValueError("k must be >= 1")


@dataclass(frozen=True)
class EvalRow:
    algorithm: str
    n_bands: int
    accuracy_percent: float
    selected_bands: tuple[int, ...]
    requested_n: int
    shortfall: bool


@dataclass(frozen=True, eq=False)
class EvalReport:
    rows: tuple[EvalRow, ...]
    split: SplitSpec
    classifier: ClassifierConfig
    selection: SelectionConfig


def split(gt, spec: SplitSpec) -> tuple[np.ndarray, np.ndarray]:
    """Boolean (train, test) masks over labeled pixels in canonical order.

    Stratified mode splits each class independently; per-class train
    counts are the half-up rounding of fraction * class size, clamped so
    both sides keep at least one pixel (hence within one of the exact
    fraction).
    """
    labels = gt.labels[gt.labeled_mask].astype(np.int64)
    n = labels.size
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    train = np.zeros(n, dtype=bool)
    if spec.stratified:
        for cls in range(1, gt.n_classes + 1):
            idx = np.flatnonzero(labels == cls)
            if idx.size < 2:
                raise ValueError(f"class {cls} has {idx.size} labeled "
                                 f"pixel(s); stratified split needs >= 2")
            n_train = int(np.floor(spec.train_fraction * idx.size + 0.5))
            n_train = min(max(n_train, 1), idx.size - 1)
            perm = rng.permutation(idx.size)
            train[idx[perm[:n_train]]] = True
    else:
        if n < 2:
            raise ValueError("need at least 2 labeled pixels to split")
        n_train = int(np.floor(spec.train_fraction * n + 0.5))
        n_train = min(max(n_train, 1), n - 1)
        perm = rng.permutation(n)
        train[perm[:n_train]] = True
    return train, ~train


def _labeled_features(cube, gt, bands) -> np.ndarray:
    mask = gt.labeled_mask
    cols = [cube.band_values(band)[mask].astype(np.float64) for band in bands]
    return np.column_stack(cols)


def _normalize(train_feats, test_feats):
    """Per-band min-max over the training pixels; test clamped into [0,1]."""
    lo = train_feats.min(axis=0)
    hi = train_feats.max(axis=0)
    span = hi - lo
    flat = span == 0
    span = np.where(flat, 1.0, span)
    ntr = (train_feats - lo) / span
    nte = np.clip((test_feats - lo) / span, 0.0, 1.0)
    if flat.any():
        ntr[:, flat] = 0.0
        nte[:, flat] = 0.0
    return ntr, nte


def classify_knn(cube, gt, bands, train_mask, test_mask,
                 k: int = 3) -> np.ndarray:
    """Predicted labels (1..C) for the test pixels, canonical order."""
    bands = tuple(bands)
    if not bands:
        raise ValueError("band list is empty")
    if k < 1:
        raise ValueError("k must be >= 1")
    labels = gt.labels[gt.labeled_mask].astype(np.int64)
    feats = _labeled_features(cube, gt, bands)
    xtr, xte = _normalize(feats[train_mask], feats[test_mask])
    ytr = labels[train_mask]
    if ytr.size == 0:
        raise ValueError("training mask selects no pixels")
    k = min(k, ytr.size)
    n_test = xte.shape[0]
    preds = np.zeros(n_test, dtype=np.int32)
    xtr_t = np.ascontiguousarray(xtr.T)
    for start in range(0, n_test, _TEST_CHUNK):
        block = np.ascontiguousarray(xte[start:start + _TEST_CHUNK])
        # band-order accumulation; identical across kernel backends
        d2 = _core.sq_distances(block, xtr_t)
        # equal distances resolve to the ascending training-pixel index
        nearest = _core.nearest_k(d2, k)
        votes = ytr[nearest]
        counts = np.zeros((block.shape[0], gt.n_classes + 1), dtype=np.int64)
        np.add.at(counts, (np.repeat(np.arange(block.shape[0]), k),
                           votes.ravel()), 1)
        # argmax returns the first maximum, i.e. the smallest class code
        preds[start:start + block.shape[0]] = counts.argmax(axis=1)
    return preds


def accuracy(predictions, truth) -> float:
    """Overall accuracy: 100 * correct / total."""
    predictions = np.asarray(predictions)
    truth = np.asarray(truth)
    if predictions.shape != truth.shape:
        raise ValueError("predictions and truth differ in length")
    if predictions.size == 0:
        raise ValueError("empty test set")
    return 100.0 * float(np.count_nonzero(predictions == truth)) / predictions.size


def macro_accuracy(predictions, truth) -> float:
    """Per-class recall averaged over the classes present in ``truth``."""
    predictions = np.asarray(predictions)
    truth = np.asarray(truth)
    if predictions.shape != truth.shape:
        raise ValueError("predictions and truth differ in length")
    if predictions.size == 0:
        raise ValueError("empty test set")
    rates = [np.count_nonzero(predictions[truth == cls] == cls)
             / np.count_nonzero(truth == cls)
             for cls in np.unique(truth)]
    return 100.0 * float(np.mean(rates))


def sweep(cube, gt, config: SelectionConfig, sizes,
          split_spec: SplitSpec,
          classifier: ClassifierConfig = ClassifierConfig(),
          metric: str = "overall") -> EvalReport:
    """Accuracy over subset-size prefixes of one selection run.

    Selection runs once at k_max = max(sizes); each requested size is
    scored on the corresponding prefix (greedy selection makes smaller
    runs prefixes of larger ones). If the selector retained fewer bands
    than requested, the row reports the actual count with its shortfall
    flag set. Rows are keyed uniquely by (algorithm, n_bands).
    """
    sizes = tuple(int(s) for s in sizes)
    if not sizes:
        raise ValueError("sizes is empty")
    if list(sizes) != sorted(sizes):
        raise ValueError("sizes must be ascending")
    if sizes[0] < 1:
        raise ValueError("sizes must be positive")
    if sizes[-1] > cube.n_bands:
        raise ValueError(f"size {sizes[-1]} exceeds band count {cube.n_bands}")
    if metric not in ("overall", "macro"):
        raise ValueError("metric must be 'overall' or 'macro'")
    score = accuracy if metric == "overall" else macro_accuracy

    run_config = SelectionConfig(
        k_max=sizes[-1], algorithm=config.algorithm,
        threshold_th=config.threshold_th,
        discretization=config.discretization)
    result = select_bands(cube, gt, run_config)
    train_mask, test_mask = split(gt, split_spec)
    truth = gt.labels[gt.labeled_mask][test_mask]

    rows = []
    seen = set()
    for requested in sizes:
        subset = result.selected[:requested]
        key = (config.algorithm, len(subset))
        if key in seen:
            continue
        seen.add(key)
        preds = classify_knn(cube, gt, subset, train_mask, test_mask,
                             k=classifier.k)
        rows.append(EvalRow(
            algorithm=config.algorithm,
            n_bands=len(subset),
            accuracy_percent=score(preds, truth),
            selected_bands=subset,
            requested_n=requested,
            shortfall=len(subset) < requested,
        ))
    return EvalReport(tuple(rows), split_spec, classifier, run_config)


def classify_map(cube, gt, bands, train_mask, k: int = 3) -> np.ndarray:
    """Full-scene label raster: truth on train pixels, predictions on test.

    Unlabeled pixels stay 0. Output is a (height, width) grid in the
    ground-truth text format's value space.
    """
    test_mask = ~train_mask
    out = np.zeros((gt.height, gt.width), dtype=np.int32)
    mask = gt.labeled_mask
    labeled_values = np.zeros(gt.labeled_count, dtype=np.int32)
    labeled_values[train_mask] = gt.labels[mask][train_mask]
    if test_mask.any():
        labeled_values[test_mask] = classify_knn(
            cube, gt, bands, train_mask, test_mask, k=k)
    out[mask] = labeled_values
    return out


def export_features(cube, gt, bands, train_mask, test_mask, out_dir):
    """Write normalized feature tables for an external classifier.

    Produces ``train.csv`` and ``test.csv`` with header
    ``pixel_id,label,b<idx>,...`` where pixel_id is the row-major raster
    index of the pixel and features use the same train-min-max
    normalization as the built-in classifier.
    """
    bands = tuple(bands)
    if not bands:
        raise ValueError("band list is empty")
    out_dir = Path(out_dir)
    mask = gt.labeled_mask
    labels = gt.labels[mask]
    pixel_ids = np.flatnonzero(mask.ravel())
    feats = _labeled_features(cube, gt, bands)
    ntr, nte = _normalize(feats[train_mask], feats[test_mask])
    header = "pixel_id,label," + ",".join(f"b{band}" for band in bands)

    def rows(ids, labs, matrix):
        lines = [header]
        for pid, lab, row in zip(ids, labs, matrix):
            values = ",".join(repr(float(v)) for v in row)
            lines.append(f"{pid},{lab},{values}")
        return "\n".join(lines) + "\n"

    train_path = out_dir / "train.csv"
    test_path = out_dir / "test.csv"
    atomic_write_text(train_path, rows(pixel_ids[train_mask],
                                       labels[train_mask], ntr))
    atomic_write_text(test_path, rows(pixel_ids[test_mask],
                                      labels[test_mask], nte))
    return train_path, test_path


def write_report_csv(report: EvalReport, path):
    """Serialize: algorithm,n_bands,accuracy_percent,selected_bands."""
    lines = [REPORT_CSV_HEADER]
    for row in report.rows:
        joined = "|".join(str(b) for b in row.selected_bands)
        lines.append(f"{row.algorithm},{row.n_bands},"
                     f"{row.accuracy_percent!r},{joined}")
    atomic_write_text(path, "\n".join(lines) + "\n")
