"""Saliency evaluation: MAE, PR / F-measure curves, mean F and E-measure.

Curves are evaluated on the 256 thresholds ``k / 255``; a pixel counts as
positive when its value is ``>= t``. Mean scores average the curve over the
thresholds ``t > 0`` (at ``t = 0`` every pixel is positive, which carries no
information about the prediction).
"""
import csv
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ._files import atomic_open
from .image import DimensionMismatch, as_gray, as_mask, check_same_shape, load_gray, load_mask


BETA2 = 0.3
DELTA = 1e-8
THRESHOLDS = np.arange(256) / 255.0


class NoPairs(FileNotFoundError):
    pass


@dataclass
class CurvePoints:
    thresholds: np.ndarray
    precision: np.ndarray
    recall: np.ndarray
    f_measure: np.ndarray


@dataclass
class MetricReport:
    names: list
    mae: list
    mean_f: list
    e_measure: list
    curve: CurvePoints = field(default=None, repr=False)

    def aggregate(self):
        return {
            "mae": float(np.mean(self.mae)),
            "mean_f": float(np.mean(self.mean_f)),
            "e_measure": float(np.mean(self.e_measure)),
        }


def mae(pred, gt):
    check_same_shape(pred, gt)
    return float(np.mean(np.abs(np.asarray(pred, float) - np.asarray(gt, float))))


def _confusion(pred, gt, thresholds):
    """TP, FP, FN, TN at each threshold, with ``pred >= t`` as positive."""
    pred = np.asarray(pred, dtype=np.float64)
    fg = np.asarray(gt).astype(bool)
    fg_vals = np.sort(pred[fg])
    bg_vals = np.sort(pred[~fg])
    t = np.asarray(thresholds, dtype=np.float64)
    tp = fg_vals.size - np.searchsorted(fg_vals, t, side="left")
    fp = bg_vals.size - np.searchsorted(bg_vals, t, side="left")
    fn = fg_vals.size - tp
    tn = bg_vals.size - fp
    return tp, fp, fn, tn


def f_beta(precision, recall, beta2=BETA2):
    precision = np.asarray(precision, dtype=np.float64)
    recall = np.asarray(recall, dtype=np.float64)
    num = (1 + beta2) * precision * recall
    den = beta2 * precision + recall
    return np.where(den > 0, num / np.where(den > 0, den, 1.0), 0.0)


def pr_curve(pred, gt, thresholds=THRESHOLDS):
    """Precision, recall and F-measure of ``pred`` swept over thresholds.

    Precision is 1 when nothing is predicted positive; recall is 1 when the
    ground truth is empty.
    """
    check_same_shape(pred, gt)
    gt = as_mask(gt)
    tp, fp, fn, _ = _confusion(pred, gt, thresholds)
    predicted = tp + fp
    actual = tp + fn
    precision = np.where(predicted > 0, tp / np.maximum(predicted, 1), 1.0)
    recall = np.where(actual > 0, tp / np.maximum(actual, 1), 1.0)
    return CurvePoints(np.asarray(thresholds, dtype=np.float64), precision,
                       recall, f_beta(precision, recall))


def _positive_thresholds(thresholds):
    return np.asarray(thresholds) > 0


def mean_f(curve):
    """Mean F-measure over the curve's thresholds ``t > 0``."""
    keep = _positive_thresholds(curve.thresholds)
    return float(np.mean(np.asarray(curve.f_measure)[keep]))


def adaptive_threshold(pred):
    return min(2.0 * float(np.mean(pred)), 1.0)


def adaptive_f(pred, gt):
    """F-measure at the adaptive threshold ``min(2 * mean(pred), 1)``."""
    curve = pr_curve(pred, gt, [adaptive_threshold(pred)])
    return float(curve.f_measure[0])


def e_measure(pred_binary, gt):
    """Enhanced-alignment measure between two binary maps.

    Identical maps score 1. If the maps differ and either one is constant
    the score is 0. Otherwise both maps are centred on their means and the
    per-pixel alignment ``2 a b / (a^2 + b^2 + delta)`` is mapped through
    ``(x + 1)^2 / 4`` and averaged.
    """
    check_same_shape(pred_binary, gt)
    p = as_mask(pred_binary).astype(np.float64)
    g = as_mask(gt).astype(np.float64)
    if np.array_equal(p, g):
        return 1.0
    if p.min() == p.max() or g.min() == g.max():
        return 0.0
    return _alignment(p, g)


def _alignment(p, g):
    a = p - p.mean()
    b = g - g.mean()
    xi = 2.0 * a * b / (a * a + b * b + DELTA)
    return float(np.mean((xi + 1.0) ** 2 / 4.0))


def e_curve(pred, gt, thresholds=THRESHOLDS):
    """E-measure of ``pred >= t`` against ``gt`` at each threshold.

    Computed from confusion counts: for binary maps the alignment term only
    depends on the (pred, gt) value pair, so four cell values suffice.
    """
    check_same_shape(pred, gt)
    gt = as_mask(gt)
    tp, fp, fn, tn = (c.astype(np.float64) for c in _confusion(pred, gt, thresholds))
    n = float(gt.size)
    mp = (tp + fp) / n
    mg = (tp + fn) / n

    def cell(pv, gv):
        a = pv - mp
        b = gv - mg
        xi = 2.0 * a * b / (a * a + b * b + DELTA)
        return (xi + 1.0) ** 2 / 4.0

    score = (tp * cell(1, 1) + fp * cell(1, 0) + fn * cell(0, 1) + tn * cell(0, 0)) / n
    identical = (fp == 0) & (fn == 0)
    pred_const = (mp == 0) | (mp == 1)
    gt_const = (mg == 0) | (mg == 1)
    score = np.where(pred_const | gt_const, 0.0, score)
    return np.where(identical, 1.0, score)


def mean_e(pred, gt, thresholds=THRESHOLDS):
    """Mean E-measure over thresholds ``t > 0``."""
    keep = _positive_thresholds(thresholds)
    return float(np.mean(e_curve(pred, gt, thresholds)[keep]))


def adaptive_e(pred, gt):
    return e_measure((np.asarray(pred) >= adaptive_threshold(pred)).astype(np.uint8), gt)


def evaluate_pair(pred, gt):
    """Return ``(mae, mean_f, mean_e, curve)`` for one prediction."""
    pred = as_gray(pred)
    gt = as_mask(gt)
    check_same_shape(pred, gt)
    curve = pr_curve(pred, gt)
    return mae(pred, gt), mean_f(curve), mean_e(pred, gt), curve


def _png_names(directory):
    return {f for f in os.listdir(directory) if f.lower().endswith(".png")}


def load_pairs(pred_dir, gt_dir):
    """Load same-named PNG pairs as ``(names, preds, masks)``.

    Raises ``NoPairs`` when the directories share no PNG name and
    ``DimensionMismatch`` naming every pair whose sizes differ.
    """
    names = sorted(_png_names(pred_dir) & _png_names(gt_dir))
    if not names:
        raise NoPairs(f"no matching PNG names in {pred_dir} and {gt_dir}")
    preds = [load_gray(os.path.join(pred_dir, n)) for n in names]
    masks = [load_mask(os.path.join(gt_dir, n)) for n in names]
    bad = [f"{n} {p.shape} vs {g.shape}" for n, p, g in zip(names, preds, masks)
           if p.shape != g.shape]
    if bad:
        raise DimensionMismatch("size mismatch in pairs: " + "; ".join(bad))
    return names, preds, masks


def evaluate_dataset(pred_dir, gt_dir, jobs=1):
    """Evaluate every same-named PNG pair of two directories.

    Returns a :class:`MetricReport` whose ``curve`` is the pointwise mean
    of the per-image curves.
    """
    names, preds, masks = load_pairs(pred_dir, gt_dir)
    pairs = list(zip(preds, masks))

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(lambda pg: evaluate_pair(*pg), pairs))
    else:
        results = [evaluate_pair(p, g) for p, g in pairs]

    curves = [r[3] for r in results]
    curve = CurvePoints(
        THRESHOLDS.copy(),
        np.mean([c.precision for c in curves], axis=0),
        np.mean([c.recall for c in curves], axis=0),
        np.mean([c.f_measure for c in curves], axis=0),
    )
    return MetricReport(names, [r[0] for r in results], [r[1] for r in results],
                        [r[2] for r in results], curve)


def write_report(report, path, fmt="csv"):
    """Per-image rows plus a final ``mean`` row, as CSV or JSON."""
    agg = report.aggregate()
    if fmt == "csv":
        with atomic_open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["name", "mae", "mF", "E"])
            for row in zip(report.names, report.mae, report.mean_f, report.e_measure):
                w.writerow([row[0]] + [repr(float(v)) for v in row[1:]])
            w.writerow(["mean", repr(agg["mae"]), repr(agg["mean_f"]), repr(agg["e_measure"])])
    elif fmt == "json":
        doc = {
            "images": [
                {"name": n, "mae": float(m), "mF": float(f), "E": float(e)}
                for n, m, f, e in zip(report.names, report.mae, report.mean_f,
                                      report.e_measure)
            ],
            "mean": {"mae": agg["mae"], "mF": agg["mean_f"], "E": agg["e_measure"]},
        }
        with atomic_open(path, "w") as fh:
            json.dump(doc, fh, indent=2)
            fh.write("\n")
    else:
        raise ValueError(f"unknown report format {fmt!r}")


def write_curve(curve, path):
    with atomic_open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "precision", "recall", "F"])
        for row in zip(curve.thresholds, curve.precision, curve.recall, curve.f_measure):
            w.writerow([repr(float(v)) for v in row])
