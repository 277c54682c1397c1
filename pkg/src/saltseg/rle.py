"""Run-length encoding of binary masks in the competition submission format.

Masks are encoded column-major (Fortran order), 1-indexed, as space-separated
``start length`` pairs with maximal runs and ascending starts. An empty mask
encodes to the empty string.
"""

from __future__ import annotations

import csv
import os

import numpy as np

from .errors import BoundsError, DataIOError, FormatError, ValidationError


def decode_rle(rle: str, height: int, width: int) -> np.ndarray:
    """Decode an RLE string into a binary uint8 mask of shape (height, width).

    Raises FormatError for malformed tokens and BoundsError for runs that
    extend past height*width. Runs must be ascending and non-overlapping so
    the decoded mask has exactly sum(lengths) foreground pixels.
    """
    flat = np.zeros(height * width, dtype=np.uint8)
    tokens = rle.split()
    if not tokens:
        return flat.reshape((height, width), order="F")
    if len(tokens) % 2 != 0:
        raise FormatError(f"RLE has odd token count {len(tokens)}: {rle!r}")
    try:
        values = [int(t) for t in tokens]
    except ValueError as exc:
        raise FormatError(f"RLE contains a non-integer token: {rle!r}") from exc
    prev_end = 0  # exclusive end of the previous run, 0-indexed
    for start, run in zip(values[0::2], values[1::2]):
        if start < 1 or run < 1:
            raise FormatError(f"RLE start/run must be positive, got {start} {run}")
        lo = start - 1
        if lo < prev_end:
            raise FormatError(f"RLE runs overlap or are out of order at start {start}")
        hi = lo + run
        if hi > height * width:
            raise BoundsError(f"RLE run {start} {run} exceeds image size {height}x{width}")
        flat[lo:hi] = 1
        prev_end = hi
    return flat.reshape((height, width), order="F")


def encode_rle(mask: np.ndarray) -> str:
    """Encode a binary mask as an RLE string; inverse of :func:`decode_rle`."""
    mask = np.asarray(mask)
    if mask.ndim != 2:
        raise ValidationError(f"mask must be 2-D, got shape {mask.shape}")
    if not np.isin(mask, (0, 1)).all():
        raise ValidationError("mask must contain only values {0, 1}")
    flat = mask.reshape(-1, order="F").astype(np.int8)
    # transitions: +1 at run starts, -1 one past run ends
    diff = np.diff(np.concatenate(([0], flat, [0])))
    starts = np.flatnonzero(diff == 1) + 1  # 1-indexed
    ends = np.flatnonzero(diff == -1) + 1
    return " ".join(f"{s} {e - s}" for s, e in zip(starts, ends))


def write_mask_csv(rows: list[tuple[str, np.ndarray]], path, extra: dict[str, list] | None = None) -> None:
    """Write ``id,rle_mask`` rows (plus optional extra columns) to a CSV file."""
    fieldnames = ["id", "rle_mask"] + list(extra.keys() if extra else [])
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(fieldnames)
        for i, (sample_id, mask) in enumerate(rows):
            row = [sample_id, encode_rle(mask)]
            if extra:
                row.extend(str(extra[key][i]) for key in extra)
            writer.writerow(row)


def read_mask_csv(path, height: int, width: int) -> dict[str, np.ndarray]:
    """Read an ``id,rle_mask`` CSV into a dict of decoded masks."""
    if not os.path.exists(path):
        raise DataIOError(f"label CSV not found: {path}")
    masks: dict[str, np.ndarray] = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or "id" not in reader.fieldnames or "rle_mask" not in reader.fieldnames:
            raise FormatError(f"{path}: expected header with columns id,rle_mask")
        for row in reader:
            sample_id = row["id"]
            if sample_id in masks:
                raise FormatError(f"{path}: duplicate id {sample_id!r}")
            masks[sample_id] = decode_rle(row["rle_mask"] or "", height, width)
    return masks
