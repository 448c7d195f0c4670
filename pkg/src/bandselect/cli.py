"""Command-line front end: dataset -> selection -> evaluation.

Subcommands: ``stats`` (per-band MI ranking), ``select`` (run one
filter), ``sweep`` (accuracy over subset sizes, optionally with a
classified map), ``synth`` (generate a synthetic dataset from a spec
file). Values resolve as defaults < config file (--config) < flags, and
every run writes the fully resolved configuration next to its outputs.
All randomness flows from the explicit seeds (split seed, synthetic
spec seed). Files are written via temp + rename, so a failing run never
leaves a partially written CSV; exit status is 0 iff all outputs were
written.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, fields, replace
from pathlib import Path

from .data import (atomic_write_text, format_kv, generate_synthetic,
                   load_cube, load_ground_truth, parse_synthetic_spec,
                   read_kv, synthetic_spec_entries, write_cube,
                   write_label_grid)
from .evaluation import (ClassifierConfig, SplitSpec, classify_map, split,
                         sweep, write_report_csv)
from .info import DiscretizationConfig
from .selection import (MI_FILTER, TMI_FILTER, SelectionConfig,
                        rank_bands_by_mi, select_bands,
                        write_selection_config, write_selection_csv)

_ALGO_FLAGS = {"mi": MI_FILTER, "tmi": TMI_FILTER,
               MI_FILTER: MI_FILTER, TMI_FILTER: TMI_FILTER}


@dataclass(frozen=True)
class RunConfig:
    cube_header: str = ""
    gt_path: str = ""
    algorithm: str = TMI_FILTER
    k_max: int = 0  # 0 = unset; required by `select`
    threshold_th: float = 0.0
    n_bins: int = 256
    split_seed: int = 0
    train_fraction: float = 0.5
    knn_k: int = 3
    sizes: tuple[int, ...] = ()
    output_dir: str = "."


def _parse_sizes(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(tok) for tok in text.split(",") if tok.strip())
    except ValueError:
        raise ValueError(f"bad sizes list {text!r}; expected e.g. 3,4,12") from None


def _config_from_file(path) -> dict:
    converters = {
        "cube_header": str, "gt_path": str, "output_dir": str,
        "algorithm": str, "k_max": int, "threshold_th": float,
        "n_bins": int, "split_seed": int, "train_fraction": float,
        "knn_k": int, "sizes": _parse_sizes,
    }
    entries = read_kv(path)
    values = {}
    for key, raw in entries.items():
        if key not in converters:
            raise ValueError(f"{path}: unknown config key '{key}'")
        values[key] = converters[key](raw)
    return values


def resolve_config(args) -> RunConfig:
    config = RunConfig()
    if getattr(args, "config", None):
        config = replace(config, **_config_from_file(args.config))
    overrides = {}
    mapping = {
        "cube": "cube_header", "gt": "gt_path", "algo": "algorithm",
        "k": "k_max", "th": "threshold_th", "bins": "n_bins",
        "seed": "split_seed", "fraction": "train_fraction",
        "knn": "knn_k", "sizes": "sizes", "out": "output_dir",
    }
    for flag, field_name in mapping.items():
        value = getattr(args, flag, None)
        if value is not None:
            overrides[field_name] = value
    if "algorithm" in overrides:
        overrides["algorithm"] = _ALGO_FLAGS[overrides["algorithm"]]
    config = replace(config, **overrides)
    if config.algorithm not in (MI_FILTER, TMI_FILTER):
        raise ValueError(f"unknown algorithm {config.algorithm!r}")
    return config


def _config_entries(config: RunConfig) -> dict:
    entries = {}
    for f in fields(config):
        value = getattr(config, f.name)
        if f.name == "sizes":
            value = ",".join(str(s) for s in value)
        elif isinstance(value, float):
            value = repr(value)
        entries[f.name] = value
    return entries


def _load_dataset(config: RunConfig):
    if not config.cube_header:
        raise ValueError("no cube header given (--cube or cube_header)")
    if not config.gt_path:
        raise ValueError("no ground truth given (--gt or gt_path)")
    cube = load_cube(config.cube_header)
    gt = load_ground_truth(config.gt_path, (cube.width, cube.height))
    return cube, gt


def _out_dir(config: RunConfig) -> Path:
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_resolved(config: RunConfig, out: Path):
    atomic_write_text(out / "resolved_config.cfg",
                      format_kv(_config_entries(config)))


def _selection_config(config: RunConfig, k_max: int) -> SelectionConfig:
    return SelectionConfig(
        k_max=k_max, algorithm=config.algorithm,
        threshold_th=config.threshold_th,
        discretization=DiscretizationConfig(n_bins=config.n_bins))


def cmd_stats(config: RunConfig) -> int:
    cube, gt = _load_dataset(config)
    ranking = rank_bands_by_mi(cube, gt,
                               DiscretizationConfig(n_bins=config.n_bins))
    out = _out_dir(config)
    lines = ["rank,band,mi_bits"]
    for rank, (band, mi) in enumerate(ranking, start=1):
        lines.append(f"{rank},{band},{mi!r}")
    atomic_write_text(out / "mi_ranking.csv", "\n".join(lines) + "\n")
    _write_resolved(config, out)
    print("band,mi_bits")
    for band, mi in ranking:
        print(f"{band},{mi!r}")
    return 0


def cmd_select(config: RunConfig) -> int:
    cube, gt = _load_dataset(config)
    if config.k_max < 1:
        raise ValueError("select needs --k (number of bands to retain)")
    if config.k_max > cube.n_bands:
        raise ValueError(f"k_max {config.k_max} exceeds band count "
                         f"{cube.n_bands}")
    sel_config = _selection_config(config, config.k_max)
    result = select_bands(cube, gt, sel_config)
    out = _out_dir(config)
    write_selection_csv(result, out / "selection.csv")
    write_selection_config(sel_config, out / "selection.cfg")
    _write_resolved(config, out)
    print(",".join(str(b) for b in result.selected))
    return 0


def cmd_sweep(config: RunConfig, map_at: int | None) -> int:
    cube, gt = _load_dataset(config)
    if not config.sizes:
        raise ValueError("sweep needs --sizes (e.g. --sizes 3,4,12)")
    sizes = tuple(sorted(config.sizes))
    if sizes[-1] > cube.n_bands:
        raise ValueError(f"size {sizes[-1]} exceeds band count {cube.n_bands}")
    sel_config = _selection_config(config, sizes[-1])
    split_spec = SplitSpec(train_fraction=config.train_fraction,
                           seed=config.split_seed)
    classifier = ClassifierConfig(k=config.knn_k)
    report = sweep(cube, gt, sel_config, sizes, split_spec, classifier)
    out = _out_dir(config)
    write_report_csv(report, out / f"report_{config.algorithm}.csv")
    for row in report.rows:
        if row.shortfall:
            print(f"warning: requested {row.requested_n} bands, selection "
                  f"retained {row.n_bands}", file=sys.stderr)
    if map_at is not None:
        # greedy prefixes nest, so the largest row holds the full selection
        selected = max(report.rows, key=lambda r: r.n_bands).selected_bands
        if map_at < 1 or map_at > len(selected):
            raise ValueError(f"--map-at {map_at} outside the retained range "
                             f"1..{len(selected)}")
        train_mask, _ = split(gt, split_spec)
        grid = classify_map(cube, gt, selected[:map_at], train_mask,
                            k=config.knn_k)
        write_label_grid(grid, out / f"classified_map_{map_at}.txt")
    _write_resolved(config, out)
    return 0


def cmd_synth(spec_path: str, out_dir: str) -> int:
    spec = parse_synthetic_spec(spec_path)
    cube, gt = generate_synthetic(spec)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_cube(cube, out / "synthetic.hdr", out / "synthetic.img")
    write_label_grid(gt.labels, out / "synthetic_gt.txt")
    atomic_write_text(out / "synthetic_spec.cfg",
                      format_kv(synthetic_spec_entries(spec)))
    print(f"wrote {cube.n_bands}-band {cube.width}x{cube.height} cube and "
          f"ground truth ({gt.n_classes} classes) to {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bandselect",
        description="Information-theoretic band selection for hyperspectral "
                    "images.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--cube", help="cube header path")
        p.add_argument("--gt", help="ground-truth path")
        p.add_argument("--algo", choices=sorted(_ALGO_FLAGS),
                       help="selection filter (mi | tmi)")
        p.add_argument("--k", type=int, help="bands to retain")
        p.add_argument("--th", type=float,
                       help="redundancy threshold in bits (mi filter)")
        p.add_argument("--bins", type=int, help="histogram bins per band")
        p.add_argument("--seed", type=int, help="train/test split seed")
        p.add_argument("--fraction", type=float, help="train fraction")
        p.add_argument("--knn", type=int, help="k-NN neighbor count")
        p.add_argument("--sizes", type=_parse_sizes,
                       help="comma-separated subset sizes")
        p.add_argument("--out", help="output directory")
        p.add_argument("--config", help="key = value config file")

    add_common(sub.add_parser("stats", help="rank all bands by MI with GT"))
    add_common(sub.add_parser("select", help="run one selection filter"))
    p_sweep = sub.add_parser("sweep", help="accuracy over subset sizes")
    add_common(p_sweep)
    p_sweep.add_argument("--map-at", type=int, dest="map_at",
                         help="also write a classified map at this size")
    p_synth = sub.add_parser("synth", help="generate a synthetic dataset")
    p_synth.add_argument("--config", required=True,
                         help="synthetic spec (key = value file)")
    p_synth.add_argument("--out", default=".", help="output directory")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "synth":
            return cmd_synth(args.config, args.out)
        config = resolve_config(args)
        if args.command == "stats":
            return cmd_stats(config)
        if args.command == "select":
            return cmd_select(config)
        return cmd_sweep(config, getattr(args, "map_at", None))
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
