"""Information-theoretic band selection for hyperspectral images.

Two greedy filters over a shared ground-truth-estimate scheme: a mutual-
information gain filter with a signed redundancy threshold, and a
threshold-free filter that maximizes three-variable interaction
information, plus the split / k-NN / accuracy pipeline used to compare
them. See the README for the CLI and on-disk formats.
"""

from ._core import BACKEND
from .data import (GroundTruth, HyperCube, SyntheticSpec, generate_synthetic,
                   load_cube, load_ground_truth, parse_synthetic_spec,
                   write_cube, write_label_grid)
from .evaluation import (ClassifierConfig, EvalReport, EvalRow, SplitSpec,
                         accuracy, classify_knn, classify_map,
                         export_features, macro_accuracy, split, sweep,
                         write_report_csv)
from .info import (GT_RANGE, MIN_MAX_UNIFORM, CodedVariable,
                   DiscretizationConfig, JointHistogram, discretize_band,
                   entropy, gt_codes, interaction_info, joint_entropy,
                   joint_histogram, mi_joined, mutual_info)
from .selection import (MI_FILTER, TMI_FILTER, GtEstimate, SelectionConfig,
                        SelectionResult, TraceStep, estimate_codes_for_band,
                        init_estimate, rank_bands_by_mi, select_bands,
                        select_mi_filter, select_tmi_filter, update_estimate,
                        write_selection_csv)

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "__version__",
    "HyperCube", "GroundTruth", "SyntheticSpec", "load_cube", "write_cube",
    "load_ground_truth", "write_label_grid", "generate_synthetic",
    "parse_synthetic_spec",
    "CodedVariable", "DiscretizationConfig", "JointHistogram",
    "MIN_MAX_UNIFORM", "GT_RANGE", "discretize_band", "gt_codes", "entropy",
    "joint_entropy", "joint_histogram", "mutual_info", "mi_joined",
    "interaction_info",
    "MI_FILTER", "TMI_FILTER", "SelectionConfig", "SelectionResult",
    "TraceStep", "GtEstimate", "rank_bands_by_mi", "estimate_codes_for_band",
    "init_estimate", "update_estimate", "select_mi_filter",
    "select_tmi_filter", "select_bands", "write_selection_csv",
    "SplitSpec", "ClassifierConfig", "EvalRow", "EvalReport", "split",
    "classify_knn", "classify_map", "accuracy", "macro_accuracy", "sweep",
    "export_features", "write_report_csv",
]
