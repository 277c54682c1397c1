"""Seismic patch datasets: loading, geometry transforms, augmentation, folds, mosaics.

On-disk layout is competition-compatible: a directory of 8-bit grayscale PNGs
named ``<id>.png`` plus a CSV ``id,rle_mask`` for labels. Images are grayscale
patches normalized to [0, 1]; masks are binary with 1 = salt.
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from PIL import Image

from .errors import ConfigurationError, DataIOError, ShapeError, ValidationError
from .rle import read_mask_csv, write_mask_csv

SPLIT_TAGS = ("labeled", "unlabeled", "holdout")
DATASET_KINDS = ("ground_truth", "pseudo", "mixed")


# ---------------------------------------------------------------------------
# domain types
# ---------------------------------------------------------------------------


@dataclass
class SeismicSample:
    """One grayscale patch with an optional binary ground-truth mask."""

    id: str
    image: np.ndarray
    mask: np.ndarray | None = None
    split_tag: str = "labeled"

    def __post_init__(self):
        self.image = np.asarray(self.image, dtype=np.float32)
        if self.image.ndim != 2 or self.image.shape[0] != self.image.shape[1]:
            raise ShapeError(f"sample {self.id!r}: image must be square 2-D, got {self.image.shape}")
        if self.image.min() < 0.0 or self.image.max() > 1.0:
            raise ValidationError(f"sample {self.id!r}: image values must lie in [0, 1]")
        if self.mask is not None:
            self.mask = np.asarray(self.mask, dtype=np.uint8)
            if self.mask.shape != self.image.shape:
                raise ShapeError(f"sample {self.id!r}: mask shape {self.mask.shape} != image shape {self.image.shape}")
            if not np.isin(self.mask, (0, 1)).all():
                raise ValidationError(f"sample {self.id!r}: mask must contain only values {{0, 1}}")
        if self.split_tag not in SPLIT_TAGS:
            raise ValidationError(f"sample {self.id!r}: unknown split_tag {self.split_tag!r}")

    @property
    def size(self) -> int:
        return self.image.shape[0]


class Dataset:
    """Ordered, immutable-after-load collection of samples with unique ids."""

    def __init__(self, samples: list[SeismicSample], kind: str = "ground_truth"):
        if kind not in DATASET_KINDS:
            raise ValidationError(f"unknown dataset kind {kind!r}")
        ids = [s.id for s in samples]
        if len(set(ids)) != len(ids):
            dupes = sorted({i for i in ids if ids.count(i) > 1})
            raise ValidationError(f"duplicate sample ids: {dupes[:5]}")
        if kind == "ground_truth" and any(s.mask is None for s in samples):
            missing = [s.id for s in samples if s.mask is None]
            raise ValidationError(f"ground_truth dataset requires a mask for every sample; missing: {missing[:5]}")
        sizes = {s.size for s in samples}
        if len(sizes) > 1:
            raise ShapeError(f"mixed patch sizes in one dataset: {sorted(sizes)}")
        self.samples = list(samples)
        self.kind = kind
        self._by_id = {s.id: s for s in samples}

    def __len__(self) -> int:
        return len(self.samples)

    def __iter__(self):
        return iter(self.samples)

    @property
    def ids(self) -> list[str]:
        return [s.id for s in self.samples]

    @property
    def image_size(self) -> int:
        if not self.samples:
            raise ValidationError("empty dataset has no image size")
        return self.samples[0].size

    def by_id(self, sample_id: str) -> SeismicSample:
        try:
            return self._by_id[sample_id]
        except KeyError:
            raise ValidationError(f"unknown sample id {sample_id!r}") from None

    def subset(self, ids, kind: str | None = None) -> "Dataset":
        return Dataset([self.by_id(i) for i in ids], kind=kind or self.kind)


@dataclass
class FoldAssignment:
    """Partition of sample ids into balanced cross-validation folds."""

    n_folds: int
    assignment: dict[str, int]

    def __post_init__(self):
        if self.n_folds < 1:
            raise ConfigurationError(f"n_folds must be positive, got {self.n_folds}")
        counts = np.zeros(self.n_folds, dtype=int)
        for sample_id, fold in self.assignment.items():
            if not 0 <= fold < self.n_folds:
                raise ValidationError(f"id {sample_id!r} assigned to out-of-range fold {fold}")
            counts[fold] += 1
        if counts.sum() and counts.max() - counts.min() > 1:
            raise ValidationError(f"unbalanced folds, sizes {counts.tolist()}")

    def ids_in_fold(self, fold: int) -> list[str]:
        return [i for i, f in self.assignment.items() if f == fold]

    def ids_not_in_fold(self, fold: int) -> list[str]:
        return [i for i, f in self.assignment.items() if f != fold]


@dataclass
class MosaicLayout:
    """Grid of optional sample ids; None cells render black."""

    grid: list[list[str | None]]
    cell_size: int = 101

    def __post_init__(self):
        if not self.grid or not self.grid[0]:
            raise ValidationError("mosaic grid must be non-empty")
        width = len(self.grid[0])
        if any(len(row) != width for row in self.grid):
            raise ValidationError("mosaic grid rows must have equal length")


# ---------------------------------------------------------------------------
# geometry: resize, pad, crop
# ---------------------------------------------------------------------------


def _upsample2x_bilinear(arr: np.ndarray) -> np.ndarray:
    """Double both spatial dims with half-pixel-centered bilinear weights."""

    def along_axis0(a):
        prev = np.concatenate([a[:1], a[:-1]], axis=0)
        nxt = np.concatenate([a[1:], a[-1:]], axis=0)
        out = np.empty((2 * a.shape[0],) + a.shape[1:], dtype=np.float64)
        out[0::2] = 0.25 * prev + 0.75 * a
        out[1::2] = 0.75 * a + 0.25 * nxt
        return out

    arr = np.asarray(arr, dtype=np.float64)
    return along_axis0(along_axis0(arr).T).T


def _upsample2x_nearest(arr: np.ndarray) -> np.ndarray:
    return np.repeat(np.repeat(arr, 2, axis=0), 2, axis=1)


def _downsample2x_mean(arr: np.ndarray) -> np.ndarray:
    h, w = arr.shape
    return arr.reshape(h // 2, 2, w // 2, 2).mean(axis=(1, 3))


def preprocess(arr: np.ndarray, out_size: int = 256, mask: bool = False) -> np.ndarray:
    """Resize a square patch 2x, then reflection-pad to ``out_size``.

    The default maps 101x101 -> 202x202 -> 256x256 (27 px of reflection
    padding per side). Images use bilinear resampling; masks use nearest
    neighbor so they stay binary.
    """
    arr = np.asarray(arr)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ShapeError(f"preprocess expects a square 2-D array, got {arr.shape}")
    n = arr.shape[0]
    total_pad = out_size - 2 * n
    if total_pad < 0:
        raise ShapeError(f"out_size {out_size} too small for 2x-resized input of size {2 * n}")
    if mask:
        if not np.isin(arr, (0, 1)).all():
            raise ValidationError("mask preprocess requires binary input")
        up = _upsample2x_nearest(arr)
    else:
        up = _upsample2x_bilinear(arr).astype(np.float32)
    before = total_pad // 2
    after = total_pad - before
    if total_pad == 0:
        return up
    return np.pad(up, ((before, after), (before, after)), mode="reflect")


def postprocess(pred: np.ndarray, orig_size: int = 101) -> np.ndarray:
    """Crop the central 2x region and area-average back to ``orig_size``.

    Inverse of :func:`preprocess`: exact on masks (nearest-upsampled blocks
    average back to their original value) and on constant regions.
    """
    pred = np.asarray(pred, dtype=np.float64)
    if pred.ndim != 2 or pred.shape[0] != pred.shape[1]:
        raise ShapeError(f"postprocess expects a square 2-D array, got {pred.shape}")
    size = pred.shape[0]
    core = 2 * orig_size
    margin = size - core
    if margin < 0:
        raise ShapeError(f"input size {size} smaller than 2x target {core}")
    before = margin // 2
    cropped = pred[before:before + core, before:before + core]
    return _downsample2x_mean(cropped)


# ---------------------------------------------------------------------------
# augmentation
# ---------------------------------------------------------------------------


@dataclass
class AugmentConfig:
    """Train-time augmentation; horizontal flip only unless extras are enabled."""

    hflip: bool = True
    max_shift: int = 0
    intensity_jitter: float = 0.0


def hflip(arr: np.ndarray) -> np.ndarray:
    """Horizontal (left-right) flip; an involution."""
    return np.ascontiguousarray(arr[:, ::-1])


def _shift(arr: np.ndarray, dy: int, dx: int) -> np.ndarray:
    """Shift with reflection fill; keeps the array size fixed."""
    m = max(abs(dy), abs(dx))
    if m == 0:
        return arr
    padded = np.pad(arr, m, mode="reflect")
    n = arr.shape[0]
    return padded[m - dy:m - dy + n, m - dx:m - dx + n]


def augment(sample: SeismicSample, config: AugmentConfig, rng: np.random.Generator) -> SeismicSample:
    """Apply the configured random augmentations jointly to image and mask.

    With everything disabled this is the identity.
    """
    image, mask = sample.image, sample.mask
    if config.hflip and rng.random() < 0.5:
        image = hflip(image)
        mask = hflip(mask) if mask is not None else None
    if config.max_shift > 0:
        dy = int(rng.integers(-config.max_shift, config.max_shift + 1))
        dx = int(rng.integers(-config.max_shift, config.max_shift + 1))
        image = _shift(image, dy, dx)
        mask = _shift(mask, dy, dx) if mask is not None else None
    if config.intensity_jitter > 0:
        offset = rng.uniform(-config.intensity_jitter, config.intensity_jitter)
        image = np.clip(image + offset, 0.0, 1.0).astype(np.float32)
    if image is sample.image:
        return sample
    return replace(sample, image=image, mask=mask)


# ---------------------------------------------------------------------------
# cross-validation folds
# ---------------------------------------------------------------------------


def make_folds(ids, n_folds: int = 5, seed: int = 0) -> FoldAssignment:
    """Shuffle ids with a fixed seed and deal them round-robin into folds."""
    ids = list(ids)
    if not ids:
        raise ConfigurationError("cannot build folds from an empty id list")
    if n_folds > len(ids):
        raise ConfigurationError(f"n_folds {n_folds} exceeds number of ids {len(ids)}")
    order = np.random.default_rng(seed).permutation(len(ids))
    assignment = {ids[j]: int(pos % n_folds) for pos, j in enumerate(order)}
    return FoldAssignment(n_folds=n_folds, assignment=assignment)


def save_folds(folds: FoldAssignment, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", "fold"])
        for sample_id in sorted(folds.assignment):
            writer.writerow([sample_id, folds.assignment[sample_id]])


def load_folds(path) -> FoldAssignment:
    if not os.path.exists(path):
        raise DataIOError(f"fold file not found: {path}")
    assignment: dict[str, int] = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            assignment[row["id"]] = int(row["fold"])
    if not assignment:
        raise ValidationError(f"fold file {path} is empty")
    return FoldAssignment(n_folds=max(assignment.values()) + 1, assignment=assignment)


# ---------------------------------------------------------------------------
# disk I/O
# ---------------------------------------------------------------------------


def load_dataset(images_dir, labels_csv=None, split_tag: str = "labeled",
                 image_size: int | None = None, kind: str | None = None) -> Dataset:
    """Load a directory of grayscale PNGs, optionally joined with an RLE label CSV."""
    images_dir = Path(images_dir)
    if not images_dir.is_dir():
        raise DataIOError(f"image directory not found: {images_dir}")
    paths = sorted(images_dir.glob("*.png"))
    if not paths:
        raise DataIOError(f"no .png images in {images_dir}")
    samples = []
    first = None
    for path in paths:
        try:
            with Image.open(path) as im:
                arr = np.asarray(im.convert("L"), dtype=np.float32) / 255.0
        except Exception as exc:
            raise DataIOError(f"failed to read image {path}: {exc}") from exc
        if image_size is not None and arr.shape != (image_size, image_size):
            raise ShapeError(f"{path}: expected {image_size}x{image_size}, got {arr.shape}")
        if first is None:
            first = arr.shape
        samples.append(SeismicSample(id=path.stem, image=arr, split_tag=split_tag))
    masks = None
    if labels_csv is not None:
        h, w = first
        masks = read_mask_csv(labels_csv, h, w)
        missing = [s.id for s in samples if s.id not in masks]
        if missing:
            raise ValidationError(f"label CSV {labels_csv} missing ids: {missing[:5]}")
        samples = [replace(s, mask=masks[s.id]) for s in samples]
    default_kind = "ground_truth" if masks is not None else "mixed"
    return Dataset(samples, kind=kind or default_kind)


def save_dataset(dataset: Dataset, images_dir, labels_csv=None) -> None:
    """Write samples as 8-bit grayscale PNGs plus an optional label CSV."""
    images_dir = Path(images_dir)
    images_dir.mkdir(parents=True, exist_ok=True)
    for sample in dataset:
        arr = np.clip(np.rint(sample.image * 255.0), 0, 255).astype(np.uint8)
        Image.fromarray(arr, mode="L").save(images_dir / f"{sample.id}.png")
    if labels_csv is not None:
        rows = []
        for sample in dataset:
            if sample.mask is None:
                raise ValidationError(f"sample {sample.id!r} has no mask to write to {labels_csv}")
            rows.append((sample.id, sample.mask))
        write_mask_csv(rows, labels_csv)


# ---------------------------------------------------------------------------
# mosaic rendering
# ---------------------------------------------------------------------------

_OVERLAY_RGB = (255, 64, 64)


def mask_boundary(mask: np.ndarray) -> np.ndarray:
    """Foreground pixels with at least one 4-neighbor outside the mask."""
    m = np.asarray(mask).astype(bool)
    padded = np.pad(m, 1)
    core = (padded[1:-1, 1:-1] & padded[:-2, 1:-1] & padded[2:, 1:-1]
            & padded[1:-1, :-2] & padded[1:-1, 2:])
    return m & ~core


def render_mosaic(layout: MosaicLayout, dataset: Dataset) -> np.ndarray:
    """Tile patches into an RGB image with mask boundaries drawn as overlay."""
    cell = layout.cell_size
    rows, cols = len(layout.grid), len(layout.grid[0])
    canvas = np.zeros((rows * cell, cols * cell, 3), dtype=np.uint8)
    for r, row in enumerate(layout.grid):
        for c, sample_id in enumerate(row):
            if sample_id is None:
                continue
            sample = dataset.by_id(sample_id)
            if sample.size != cell:
                raise ShapeError(f"sample {sample_id!r} is {sample.size}px but cell size is {cell}px")
            tile = np.clip(np.rint(sample.image * 255.0), 0, 255).astype(np.uint8)
            tile = np.stack([tile] * 3, axis=-1)
            if sample.mask is not None:
                tile[mask_boundary(sample.mask)] = _OVERLAY_RGB
            canvas[r * cell:(r + 1) * cell, c * cell:(c + 1) * cell] = tile
    return canvas


def save_mosaic(canvas: np.ndarray, path) -> None:
    Image.fromarray(canvas, mode="RGB").save(path)
