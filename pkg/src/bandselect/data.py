"""Hyperspectral cube and ground-truth ingestion, plus synthetic datasets.

On-disk formats
---------------
Cube: a text header of ``key = value`` lines (required keys ``samples``,
``lines``, ``bands``, ``interleave`` in {bsq, bil, bip}, ``data type``
with codes 1=u8, 2=i16, 4=f32, 12=u16, and ``byte order`` 0=little /
1=big) next to a raw binary payload. The payload file is taken from an
optional ``data file`` key, else the header path minus its extension,
else that stem with ``.img``.

Ground truth: either a plain-text grid (``height`` rows of ``width``
whitespace/comma-separated non-negative integers) or a raw 8-bit label
plane accompanied by a one-line ``<path>.dims`` sidecar holding
``<lines> <samples>``.

Synthetic spec: a flat ``key = value`` file mirroring SyntheticSpec.

Loaded objects are immutable after construction and safe to share across
threads for reading.
"""

from __future__ import annotations

import os
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np


class FormatError(ValueError):
    """Malformed or inconsistent file content."""


class TruncationError(FormatError):
    """Binary payload does not match the declared size."""


class UnsupportedFormatError(FormatError):
    """Declared format is valid but not supported."""


class DimensionError(ValueError):
    """Loaded dimensions disagree with the expected ones."""


class SpecError(ValueError):
    """Inconsistent synthetic dataset specification."""


ENVI_DTYPES = {1: np.uint8, 2: np.int16, 4: np.float32, 12: np.uint16}
INTERLEAVES = ("bsq", "bil", "bip")


@dataclass(frozen=True, eq=False)
class HyperCube:
    """Radiance raster with band-major access: values[band, row, col].

    Band ids in user-facing APIs start at ``band_id_offset`` (default 1,
    so bands are reported 1..n_bands); storage is 0-based. The source
    format fields remember how the cube was laid out on disk so that
    ``write_cube`` can reproduce the original payload byte for byte.
    """

    values: np.ndarray
    band_id_offset: int = 1
    dtype_code: int = 4
    interleave: str = "bsq"
    byte_order: int = 0

    def __post_init__(self):
        values = np.ascontiguousarray(self.values, dtype=np.float32)
        if values.ndim != 3:
            raise ValueError("cube values must be (n_bands, height, width)")
        if min(values.shape) < 1:
            raise ValueError("cube dimensions must be positive")
        if not np.isfinite(values).all():
            bad = int(np.count_nonzero(~np.isfinite(values)))
            raise FormatError(f"cube contains {bad} non-finite samples")
        if self.interleave not in INTERLEAVES:
            raise ValueError(f"unknown interleave {self.interleave!r}")
        if self.dtype_code not in ENVI_DTYPES:
            raise ValueError(f"unknown data type code {self.dtype_code}")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    @property
    def n_bands(self) -> int:
        return self.values.shape[0]

    @property
    def height(self) -> int:
        return self.values.shape[1]

    @property
    def width(self) -> int:
        return self.values.shape[2]

    def band_values(self, band_id: int) -> np.ndarray:
        """(height, width) view of one band, addressed by user-facing id."""
        idx = band_id - self.band_id_offset
        if not 0 <= idx < self.n_bands:
            raise ValueError(f"band {band_id} out of range "
                             f"{self.band_id_offset}.."
                             f"{self.band_id_offset + self.n_bands - 1}")
        return self.values[idx]


@dataclass(frozen=True, eq=False)
class GroundTruth:
    """Per-pixel class labels: 0 = unlabeled, 1..n_classes = classes."""

    labels: np.ndarray
    n_classes: int

    def __post_init__(self):
        labels = np.ascontiguousarray(self.labels, dtype=np.int32)
        if labels.ndim != 2:
            raise ValueError("labels must be a (height, width) grid")
        if labels.min() < 0:
            raise FormatError("negative label in ground truth")
        if labels.max() > self.n_classes:
            raise FormatError(f"label {int(labels.max())} exceeds declared "
                              f"n_classes={self.n_classes}")
        if not (labels > 0).any():
            raise FormatError("ground truth has no labeled pixels")
        present = np.unique(labels[labels > 0])
        missing = sorted(set(range(1, self.n_classes + 1)) - set(present.tolist()))
        if missing:
            raise FormatError(f"classes {missing} have no labeled pixels")
        labels.flags.writeable = False
        object.__setattr__(self, "labels", labels)

    @property
    def height(self) -> int:
        return self.labels.shape[0]

    @property
    def width(self) -> int:
        return self.labels.shape[1]

    @property
    def labeled_mask(self) -> np.ndarray:
        return self.labels > 0

    @property
    def labeled_count(self) -> int:
        return int(np.count_nonzero(self.labels > 0))


# ---------------------------------------------------------------------------
# key = value files and atomic writers

def read_kv(path) -> dict[str, str]:
    """Parse a flat ``key = value`` text file.

    Blank lines, comment lines (# or ;) and a bare ENVI magic line are
    ignored; any other line without '=' is an error.
    """
    entries: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith(("#", ";")) or line.upper() == "ENVI":
                continue
            if "=" not in line:
                raise FormatError(f"{path}: line {lineno} is not 'key = value'")
            key, value = line.split("=", 1)
            entries[key.strip().lower()] = value.strip()
    return entries


def format_kv(entries: dict) -> str:
    return "".join(f"{k} = {v}\n" for k, v in entries.items())


def atomic_write_bytes(path, payload: bytes):
    """Write a file via temp + rename so no partial file is ever visible."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_text(path, text: str):
    atomic_write_bytes(path, text.encode("utf-8"))


# ---------------------------------------------------------------------------
# cube IO

def _require_int(entries: dict, key: str, path) -> int:
    if key not in entries:
        raise FormatError(f"{path}: missing header field '{key}'")
    try:
        return int(entries[key])
    except ValueError:
        raise FormatError(f"{path}: header field '{key}' is not an integer "
                          f"(got {entries[key]!r})") from None


def _resolve_data_path(header_path: Path, entries: dict) -> Path:
    if "data file" in entries:
        return header_path.parent / entries["data file"]
    stem = header_path.with_suffix("")
    if stem != header_path and stem.is_file():
        return stem
    return stem.with_suffix(".img")


def load_cube(header_path) -> HyperCube:
    """Load a cube from its header, normalizing to band-major float32."""
    header_path = Path(header_path)
    entries = read_kv(header_path)
    samples = _require_int(entries, "samples", header_path)
    lines = _require_int(entries, "lines", header_path)
    bands = _require_int(entries, "bands", header_path)
    dtype_code = _require_int(entries, "data type", header_path)
    byte_order = _require_int(entries, "byte order", header_path)
    if "interleave" not in entries:
        raise FormatError(f"{header_path}: missing header field 'interleave'")
    interleave = entries["interleave"].lower()
    if interleave not in INTERLEAVES:
        raise FormatError(f"{header_path}: header field 'interleave' must be "
                          f"one of {INTERLEAVES}, got {interleave!r}")
    if dtype_code not in ENVI_DTYPES:
        raise UnsupportedFormatError(
            f"{header_path}: data type code {dtype_code} is not supported "
            f"(supported: {sorted(ENVI_DTYPES)})")
    if byte_order not in (0, 1):
        raise FormatError(f"{header_path}: header field 'byte order' must be "
                          f"0 or 1, got {byte_order}")
    if min(samples, lines, bands) < 1:
        raise FormatError(f"{header_path}: samples/lines/bands must be positive")

    data_path = _resolve_data_path(header_path, entries)
    if not data_path.is_file():
        raise FileNotFoundError(f"cube data file not found: {data_path}")
    dtype = np.dtype(ENVI_DTYPES[dtype_code])
    dtype = dtype.newbyteorder(">" if byte_order == 1 else "<")
    expected = samples * lines * bands * dtype.itemsize
    actual = data_path.stat().st_size
    if actual != expected:
        raise TruncationError(f"{data_path}: expected {expected} bytes "
                              f"({bands}x{lines}x{samples} {dtype.name}), "
                              f"found {actual}")
    raw = np.fromfile(data_path, dtype=dtype)
    if interleave == "bsq":
        arr = raw.reshape(bands, lines, samples)
    elif interleave == "bil":
        arr = raw.reshape(lines, bands, samples).transpose(1, 0, 2)
    else:  # bip
        arr = raw.reshape(lines, samples, bands).transpose(2, 0, 1)
    return HyperCube(arr.astype(np.float32), dtype_code=dtype_code,
                     interleave=interleave, byte_order=byte_order)


def write_cube(cube: HyperCube, header_path, data_path=None):
    """Write a cube back to header + payload in its source layout.

    For cubes loaded with ``load_cube`` the payload is byte-identical to
    the original file. Integer source types assume the float32 values
    still hold exact integers (true for all loadable inputs).
    """
    header_path = Path(header_path)
    if data_path is None:
        data_path = header_path.with_suffix(".img")
    data_path = Path(data_path)
    dtype = np.dtype(ENVI_DTYPES[cube.dtype_code])
    dtype = dtype.newbyteorder(">" if cube.byte_order == 1 else "<")
    arr = cube.values
    if cube.interleave == "bil":
        arr = arr.transpose(1, 0, 2)
    elif cube.interleave == "bip":
        arr = arr.transpose(1, 2, 0)
    payload = np.ascontiguousarray(arr).astype(dtype).tobytes()
    header = format_kv({
        "samples": cube.width,
        "lines": cube.height,
        "bands": cube.n_bands,
        "interleave": cube.interleave,
        "data type": cube.dtype_code,
        "byte order": cube.byte_order,
        "data file": data_path.name,
    })
    atomic_write_bytes(data_path, payload)
    atomic_write_text(header_path, header)


# ---------------------------------------------------------------------------
# ground-truth IO

def load_ground_truth(path, expected_dims: tuple[int, int]) -> GroundTruth:
    """Load a label map and check it against ``(width, height)``.

    If a ``<path>.dims`` sidecar exists the file is read as a raw 8-bit
    label plane; otherwise it is parsed as a text grid.
    """
    path = Path(path)
    width, height = expected_dims
    sidecar = path.with_name(path.name + ".dims")
    if sidecar.is_file():
        labels = _load_gt_binary(path, sidecar)
    else:
        labels = _load_gt_text(path)
    if labels.shape != (height, width):
        raise DimensionError(f"{path}: ground truth is {labels.shape[1]}x"
                             f"{labels.shape[0]} (width x height), expected "
                             f"{width}x{height}")
    n_classes = int(labels.max())
    if n_classes < 1:
        raise FormatError(f"{path}: ground truth has no labeled pixels")
    return GroundTruth(labels, n_classes)


def _load_gt_text(path: Path) -> np.ndarray:
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            tokens = line.replace(",", " ").split()
            try:
                row = [int(t) for t in tokens]
            except ValueError:
                raise FormatError(f"{path}: line {lineno} has a non-integer "
                                  f"label") from None
            if any(v < 0 for v in row):
                raise FormatError(f"{path}: line {lineno} has a negative label")
            rows.append(row)
    if not rows:
        raise FormatError(f"{path}: empty ground-truth grid")
    widths = {len(r) for r in rows}
    if len(widths) != 1:
        raise FormatError(f"{path}: ragged grid (row widths {sorted(widths)})")
    return np.array(rows, dtype=np.int32)


def _load_gt_binary(path: Path, sidecar: Path) -> np.ndarray:
    tokens = sidecar.read_text(encoding="utf-8").split()
    if len(tokens) != 2:
        raise FormatError(f"{sidecar}: expected one line '<lines> <samples>'")
    try:
        lines, samples = int(tokens[0]), int(tokens[1])
    except ValueError:
        raise FormatError(f"{sidecar}: non-integer dimensions") from None
    expected = lines * samples
    actual = path.stat().st_size
    if actual != expected:
        raise TruncationError(f"{path}: expected {expected} bytes "
                              f"({lines}x{samples} u8), found {actual}")
    return np.fromfile(path, dtype=np.uint8).reshape(lines, samples).astype(np.int32)


def write_label_grid(labels: np.ndarray, path):
    """Write a (height, width) integer grid in the ground-truth text format."""
    labels = np.asarray(labels)
    lines = "\n".join(" ".join(str(int(v)) for v in row) for row in labels)
    atomic_write_text(path, lines + "\n")


# ---------------------------------------------------------------------------
# synthetic datasets

@dataclass(frozen=True)
class SyntheticSpec:
    """Recipe for a synthetic cube + ground truth with known structure.

    Band layout, in order: informative bands (monotone recodings of the
    class signal), redundant bands (affine copies of informative parents),
    synergy pairs (two bands whose level-sum parity equals the class
    parity, so each member alone is uninformative), then noise bands
    (class-independent; constant when noise_sigma = 0). When synergy
    pairs are present the class signal carried by informative bands is
    the label with its parity bit removed, so parity is available only
    through the pairs; n_classes must then be even.
    """

    width: int
    height: int
    n_classes: int
    n_informative: int = 0
    n_redundant: int = 0
    n_noise: int = 0
    synergy_pairs: int = 0
    noise_sigma: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise SpecError("width and height must be positive")
        if self.n_classes < 1:
            raise SpecError("n_classes must be >= 1")
        if self.width * self.height < self.n_classes:
            raise SpecError("fewer pixels than classes")
        if min(self.n_informative, self.n_redundant, self.n_noise,
               self.synergy_pairs) < 0:
            raise SpecError("band counts must be non-negative")
        if self.total_bands < 1:
            raise SpecError("spec describes zero bands")
        if self.n_redundant > 0 and self.n_informative == 0:
            raise SpecError("redundant bands need an informative parent")
        if self.synergy_pairs > 0 and (self.n_classes < 2 or self.n_classes % 2):
            raise SpecError("synergy pairs require an even n_classes >= 2")
        if self.noise_sigma < 0:
            raise SpecError("noise_sigma must be non-negative")

    @property
    def total_bands(self) -> int:
        return (self.n_informative + self.n_redundant + self.n_noise
                + 2 * self.synergy_pairs)


_SPEC_FIELDS = {
    "width": int, "height": int, "n_classes": int, "n_informative": int,
    "n_redundant": int, "n_noise": int, "synergy_pairs": int,
    "noise_sigma": float, "seed": int,
}


def parse_synthetic_spec(path) -> SyntheticSpec:
    """Read a SyntheticSpec from a flat ``key = value`` file."""
    entries = read_kv(path)
    kwargs = {}
    for key, value in entries.items():
        if key not in _SPEC_FIELDS:
            raise SpecError(f"{path}: unknown synthetic spec key '{key}'")
        try:
            kwargs[key] = _SPEC_FIELDS[key](value)
        except ValueError:
            raise SpecError(f"{path}: bad value for '{key}': {value!r}") from None
    for required in ("width", "height", "n_classes"):
        if required not in kwargs:
            raise SpecError(f"{path}: missing required key '{required}'")
    return SyntheticSpec(**kwargs)


def synthetic_spec_entries(spec: SyntheticSpec) -> dict:
    return {name: getattr(spec, name) for name in _SPEC_FIELDS}


def generate_synthetic(spec: SyntheticSpec) -> tuple[HyperCube, GroundTruth]:
    """Generate a (cube, ground truth) pair; a pure function of the spec.

    Labels are assigned round-robin over the row-major pixel index, so
    class counts differ by at most one. Randomness comes from a PCG64
    generator seeded with ``spec.seed``; draws happen in band layout
    order (informative noise, redundant noise, per-pair level shuffles
    then pair noise, noise-band noise), which pins the output bit for bit
    for a given spec. Synergy levels are balanced exactly within each
    class (odd class counts leave one extra pixel at level 1), so each
    pair member's empirical mutual information with the class is zero.
    """
    n_pixels = spec.width * spec.height
    c = spec.n_classes
    labels = (np.arange(n_pixels, dtype=np.int64) % c) + 1
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    sigma = spec.noise_sigma

    if spec.synergy_pairs > 0:
        parity = (labels - 1) % 2
        signal = (labels - 1) // 2
    else:
        parity = None
        signal = labels - 1

    def noisy(values):
        if sigma > 0:
            return values + rng.normal(0.0, sigma, n_pixels)
        return values

    bands = []
    informative = []
    for i in range(spec.n_informative):
        gain = 100.0 * (1.0 + 0.5 * i)
        offset = 10.0 * i
        values = noisy(offset + gain * (signal + 1).astype(np.float64))
        informative.append(values)
        bands.append(values)
    for j in range(spec.n_redundant):
        parent = informative[j % spec.n_informative]
        scale = 0.5 + 0.5 * (j % 4)
        shift = 25.0 * (j + 1)
        bands.append(noisy(shift + scale * parent))
    for _ in range(spec.synergy_pairs):
        level = np.zeros(n_pixels, dtype=np.int64)
        for cls in range(1, c + 1):
            idx = np.flatnonzero(labels == cls)
            perm = rng.permutation(idx.size)
            level[idx[perm[idx.size // 2:]]] = 1
        partner = (parity + level) % 2
        bands.append(noisy(100.0 + 100.0 * level.astype(np.float64)))
        bands.append(noisy(100.0 + 100.0 * partner.astype(np.float64)))
    for m in range(spec.n_noise):
        bands.append(noisy(np.full(n_pixels, 50.0 * (m + 1))))

    values = np.stack(bands).reshape(spec.total_bands, spec.height, spec.width)
    cube = HyperCube(values.astype(np.float32))
    gt = GroundTruth(labels.reshape(spec.height, spec.width).astype(np.int32), c)
    return cube, gt
