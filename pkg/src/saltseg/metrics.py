"""Competition metric (mean average precision over IoU thresholds) and
pseudo-label confidence.

Threshold comparisons use exact rational arithmetic so that ties at a
threshold (which score 0 under the strict ``IoU > t`` rule) are handled
identically to a brute-force pixel-set oracle.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import ShapeError, ValidationError

#: The 10 canonical IoU thresholds 0.50, 0.55, ..., 0.95 as exact rationals.
IOU_THRESHOLDS: tuple[Fraction, ...] = tuple(Fraction(10 + i, 20) for i in range(10))


def threshold_vector() -> tuple[float, ...]:
    """The canonical thresholds as floats (for display and configs)."""
    return tuple(float(t) for t in IOU_THRESHOLDS)


@dataclass
class EvaluationReport:
    """Per-image average precisions and their mean."""

    per_image_ap: dict[str, float]
    map_score: float


def _counts(a: np.ndarray, b: np.ndarray) -> tuple[int, int, int, int]:
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ShapeError(f"mask shapes differ: {a.shape} vs {b.shape}")
    a = a.astype(bool)
    b = b.astype(bool)
    inter = int(np.count_nonzero(a & b))
    union = int(np.count_nonzero(a | b))
    return inter, union, int(np.count_nonzero(a)), int(np.count_nonzero(b))


def iou(a: np.ndarray, b: np.ndarray) -> float:
    """Intersection over union by exact pixel counting.

    Raises ValidationError when both masks are empty (the caller decides
    what a 0/0 overlap means; see :func:`precision_at`).
    """
    inter, union, _, _ = _counts(a, b)
    if union == 0:
        raise ValidationError("IoU undefined for two empty masks")
    return inter / union


def precision_at(y: np.ndarray, y_pred: np.ndarray, t) -> int:
    """Per-image precision at one threshold.

    1 if both masks are empty, 0 if exactly one is, otherwise the indicator
    of IoU(y, y_pred) strictly exceeding ``t``. The comparison is exact: an
    IoU that ties the threshold scores 0.
    """
    t_exact = t if isinstance(t, Fraction) else Fraction(t)
    if not 0 < t_exact < 1:
        raise ValidationError(f"threshold must lie in (0, 1), got {t}")
    inter, union, n_true, n_pred = _counts(y, y_pred)
    if n_true == 0 and n_pred == 0:
        return 1
    if n_true == 0 or n_pred == 0:
        return 0
    return int(Fraction(inter, union) > t_exact)


def average_precision(y: np.ndarray, y_pred: np.ndarray, thresholds=IOU_THRESHOLDS) -> float:
    """Mean of :func:`precision_at` over the threshold vector."""
    passed = sum(precision_at(y, y_pred, t) for t in thresholds)
    return passed / len(thresholds)


def mean_ap(pairs, ids=None) -> EvaluationReport:
    """Mean average precision over a sequence of (truth, prediction) pairs."""
    pairs = list(pairs)
    if not pairs:
        raise ValidationError("mean_ap requires at least one mask pair")
    if ids is None:
        ids = [str(i) for i in range(len(pairs))]
    elif len(ids) != len(pairs):
        raise ValidationError("ids and pairs must have equal length")
    per_image = {str(i): average_precision(y, yp) for i, (y, yp) in zip(ids, pairs)}
    score = math.fsum(per_image.values()) / len(per_image)
    return EvaluationReport(per_image_ap=per_image, map_score=score)


def mask_confidence(probabilities: np.ndarray) -> float:
    """Negative mean binary entropy of a soft probability mask.

    Always <= 0, with 0 attained exactly when every pixel is 0 or 1.
    Natural log; 0*log(0) is taken as 0.
    """
    p = np.asarray(probabilities, dtype=np.float64)
    if p.size == 0:
        raise ValidationError("confidence undefined for an empty mask")
    if p.min() < 0.0 or p.max() > 1.0:
        raise ValidationError("probabilities must lie in [0, 1]")
    plogp = p * np.log(np.where(p > 0.0, p, 1.0))
    qlogq = (1.0 - p) * np.log(np.where(p < 1.0, 1.0 - p, 1.0))
    entropy = -(plogp + qlogq)
    return float(-entropy.mean())


def write_report(report: EvaluationReport, path) -> None:
    """Write per-image APs as ``id,ap`` rows followed by a mAP summary row."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", "ap"])
        for sample_id in sorted(report.per_image_ap):
            writer.writerow([sample_id, f"{report.per_image_ap[sample_id]:.6f}"])
        writer.writerow(["mAP", f"{report.map_score:.6f}"])
