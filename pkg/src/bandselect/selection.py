"""Greedy band-selection filters built on a shared ground-truth estimate.

Both filters first rank all bands by mutual information with the ground
truth, seed the selection with the top band, and maintain an estimate of
the ground truth (a label-space image) that is refined by pixel-wise
averaging with each accepted band:

* ``mi_filter`` walks the remaining candidates in ranking order and
  accepts a band iff averaging it into the estimate raises
  MI(GT, GT_est) by more than a signed threshold; negative thresholds
  permit mildly redundant bands.
* ``tmi_filter`` repeatedly commits the candidate that maximizes the
  three-variable interaction information I3(GT_est, band, GT); no
  threshold is applied, selection stops only at ``k_max``.

Bands entering the estimate are recoded into the ground-truth label
alphabet (gt_range discretization), so MI(GT, GT_est) and I3 live on a
fixed small alphabet.
Ties always break to the lowest band index; both selectors are pure
functions of (cube, gt, config). The per-step candidate loop is a
parallel map + deterministic reduce and may be parallelized as long as
results match sequential evaluation, tie-breaks included.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .data import atomic_write_text, format_kv
from .info import (GT_RANGE, CodedVariable, DiscretizationConfig,
                   discretize_band, gt_codes, interaction_info, mutual_info)

MI_FILTER = "mi_filter"
TMI_FILTER = "tmi_filter"
_ALGORITHMS = (MI_FILTER, TMI_FILTER)

SELECTION_CSV_HEADER = "step,band,score_bits,score_kind,accepted"


@dataclass(frozen=True)
class SelectionConfig:
    """Parameters shared by both filters.

    ``threshold_th`` only applies to ``mi_filter``; ``discretization``
    controls the initial ranking (the estimate always uses label-space
    coding).
    """

    k_max: int
    algorithm: str = TMI_FILTER
    threshold_th: float = 0.0
    discretization: DiscretizationConfig = field(default_factory=DiscretizationConfig)

    def __post_init__(self):
        if self.k_max < 1:
            raise ValueError("k_max must be >= 1")
        if not np.isfinite(self.threshold_th):
            raise ValueError("threshold_th must be finite")
        if self.algorithm not in _ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}; "
                             f"expected one of {_ALGORITHMS}")


@dataclass(frozen=True)
class TraceStep:
    """One examined candidate (mi_filter) or one committed step (tmi_filter).

    Step 0 records the seed band with the starting MI(GT, GT_est).
    """

    step: int
    band: int
    score_bits: float
    score_kind: str  # "mi_gain" or "i3"
    accepted: bool


@dataclass(frozen=True, eq=False)
class GtEstimate:
    """Current ground-truth approximation, coded in the GT label alphabet."""

    codes: CodedVariable


@dataclass(frozen=True, eq=False)
class SelectionResult:
    selected: tuple[int, ...]
    trace: tuple[TraceStep, ...]
    config: SelectionConfig
    ranking: tuple[tuple[int, float], ...]


def rank_bands_by_mi(cube, gt, disc: DiscretizationConfig) -> list[tuple[int, float]]:
    """All bands scored by MI with the ground truth, best first.

    Ties break to the lower band index; band ids are user-facing
    (1-based by default).
    """
    truth = gt_codes(gt)
    scores = []
    for band in range(cube.band_id_offset, cube.band_id_offset + cube.n_bands):
        coded = discretize_band(cube, band, gt, disc)
        scores.append((band, mutual_info(coded, truth)))
    scores.sort(key=lambda item: (-item[1], item[0]))
    return scores


def estimate_codes_for_band(cube, band: int, gt) -> CodedVariable:
    """A band recoded into the ground-truth label alphabet (0..C-1).

    This is the coding used for the estimate seed, for candidates being
    averaged in, and for the candidate variable inside the interaction
    score: gt_range discretization, which lands a labels-valued band on
    the label codes exactly.
    """
    return discretize_band(cube, band, gt,
                           DiscretizationConfig(strategy=GT_RANGE))


def init_estimate(cube, gt, best_band: int,
                  disc: DiscretizationConfig | None = None) -> GtEstimate:
    """Seed the estimate from the top-ranked band (label-space coding).

    ``disc`` is accepted for signature symmetry with the ranking step but
    does not affect the coding: the estimate always lives in the
    ground-truth alphabet.
    """
    return GtEstimate(estimate_codes_for_band(cube, best_band, gt))


def update_estimate(est: GtEstimate, band_codes: CodedVariable) -> GtEstimate:
    """Average a label-space band into the estimate, rounding half up."""
    if band_codes.alphabet_size != est.codes.alphabet_size:
        raise ValueError(
            f"band alphabet {band_codes.alphabet_size} does not match "
            f"estimate alphabet {est.codes.alphabet_size}")
    if len(band_codes) != len(est.codes):
        raise ValueError("band and estimate differ in length")
    merged = (est.codes.codes.astype(np.int64) + band_codes.codes + 1) // 2
    return GtEstimate(CodedVariable(merged, est.codes.alphabet_size))


def _prepare(cube, gt, config):
    ranking = rank_bands_by_mi(cube, gt, config.discretization)
    truth = gt_codes(gt)
    label_codes = {
        band: estimate_codes_for_band(cube, band, gt)
        for band in range(cube.band_id_offset,
                          cube.band_id_offset + cube.n_bands)
    }
    seed_band = ranking[0][0]
    est = GtEstimate(label_codes[seed_band])
    start_mi = mutual_info(truth, est.codes)
    return ranking, truth, label_codes, seed_band, est, start_mi


def select_mi_filter(cube, gt, config: SelectionConfig) -> SelectionResult:
    """Forward selection by MI gain against a signed redundancy threshold.

    Walks candidates once in decreasing initial-MI order; a band is
    accepted iff MI(GT, avg(GT_est, band)) - MI(GT, GT_est) exceeds
    ``threshold_th``, and then the averaged estimate is committed.
    Rejected bands are not revisited. The trace records every examined
    candidate with its gain and accept/reject flag.
    """
    if config.algorithm != MI_FILTER:
        raise ValueError(f"config.algorithm must be {MI_FILTER!r}")
    ranking, truth, label_codes, seed_band, est, current_mi = \
        _prepare(cube, gt, config)
    selected = [seed_band]
    trace = [TraceStep(0, seed_band, current_mi, "mi_gain", True)]
    for step, (band, _mi) in enumerate(ranking[1:], start=1):
        if len(selected) >= config.k_max:
            break
        candidate = update_estimate(est, label_codes[band])
        new_mi = mutual_info(truth, candidate.codes)
        gain = new_mi - current_mi
        accepted = gain > config.threshold_th
        trace.append(TraceStep(step, band, gain, "mi_gain", accepted))
        if accepted:
            est = candidate
            current_mi = new_mi
            selected.append(band)
    return SelectionResult(tuple(selected), tuple(trace), config, tuple(ranking))


def select_tmi_filter(cube, gt, config: SelectionConfig) -> SelectionResult:
    """Forward selection by three-variable interaction information.

    Each step scores every unselected band with
    I3(GT_est, band, GT) and commits the argmax (lowest band index on
    ties), then averages it into the estimate. Threshold-free; stops at
    ``k_max`` or band exhaustion. The trace records the winning score per
    step.
    """
    if config.algorithm != TMI_FILTER:
        raise ValueError(f"config.algorithm must be {TMI_FILTER!r}")
    ranking, truth, label_codes, seed_band, est, start_mi = \
        _prepare(cube, gt, config)
    selected = [seed_band]
    chosen = {seed_band}
    trace = [TraceStep(0, seed_band, start_mi, "i3", True)]
    all_bands = sorted(label_codes)
    step = 0
    while len(selected) < config.k_max and len(chosen) < len(all_bands):
        step += 1
        best_band = None
        best_score = -np.inf
        for band in all_bands:
            if band in chosen:
                continue
            score = interaction_info(est.codes, label_codes[band], truth)
            if score > best_score:
                best_band = band
                best_score = score
        selected.append(best_band)
        chosen.add(best_band)
        est = update_estimate(est, label_codes[best_band])
        trace.append(TraceStep(step, best_band, best_score, "i3", True))
    return SelectionResult(tuple(selected), tuple(trace), config, tuple(ranking))


def select_bands(cube, gt, config: SelectionConfig) -> SelectionResult:
    """Dispatch to the configured filter."""
    if config.algorithm == MI_FILTER:
        return select_mi_filter(cube, gt, config)
    return select_tmi_filter(cube, gt, config)


def selection_config_entries(config: SelectionConfig) -> dict:
    return {
        "algorithm": config.algorithm,
        "k_max": config.k_max,
        "threshold_th": repr(config.threshold_th),
        "n_bins": config.discretization.n_bins,
        "strategy": config.discretization.strategy,
    }


def write_selection_csv(result: SelectionResult, path):
    """Serialize the trace: step,band,score_bits,score_kind,accepted."""
    rows = [SELECTION_CSV_HEADER]
    for entry in result.trace:
        flag = "true" if entry.accepted else "false"
        rows.append(f"{entry.step},{entry.band},{entry.score_bits!r},"
                    f"{entry.score_kind},{flag}")
    atomic_write_text(path, "\n".join(rows) + "\n")


def write_selection_config(config: SelectionConfig, path):
    atomic_write_text(path, format_kv(selection_config_entries(config)))
