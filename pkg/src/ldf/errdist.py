"""Prediction error as a function of distance to the ground-truth contour."""
import csv
from dataclasses import dataclass

import numpy as np

from ._files import atomic_open
from .distance import distance_to_edge
from .image import as_gray, as_mask, check_same_shape
from .metrics import mae


@dataclass
class ErrorDistanceHistogram:
    """Absolute error summed per bin of normalised distance to the edge.

    Bin ``i`` covers ``[i/B, (i+1)/B)``; the last bin is closed.
    """

    error_sum: np.ndarray
    count: np.ndarray

    @property
    def bins(self):
        return len(self.count)

    @property
    def edges(self):
        return np.arange(self.bins + 1) / self.bins

    @property
    def mean_error(self):
        """Mean error per bin; NaN marks empty bins."""
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(self.count > 0, self.error_sum / self.count, np.nan)


@dataclass
class EdgeBandReport:
    mae_global: float
    mae_edge: float
    band_radius: float


def error_distance_hist(pred, gt, bins=20):
    """Bin every pixel's ``|pred - gt|`` by its distance to the nearest edge.

    Distances are divided by the per-image maximum. Raises ``NoEdge`` for a
    constant ``gt``.
    """
    if bins < 1:
        raise ValueError("bins must be >= 1")
    check_same_shape(pred, gt)
    pred = as_gray(pred)
    gt = as_mask(gt)
    dist = distance_to_edge(gt)
    top = dist.max()
    norm = dist / top if top > 0 else dist
    idx = np.minimum((norm * bins).astype(np.int64), bins - 1)
    err = np.abs(pred - gt)
    return ErrorDistanceHistogram(
        np.bincount(idx.ravel(), weights=err.ravel(), minlength=bins),
        np.bincount(idx.ravel(), minlength=bins),
    )


def aggregate_hists(histograms):
    """Pixel-weighted union of histograms sharing a bin count."""
    histograms = list(histograms)
    if not histograms:
        raise ValueError("nothing to aggregate")
    n = histograms[0].bins
    if any(h.bins != n for h in histograms):
        raise ValueError("histograms have different bin counts")
    return ErrorDistanceHistogram(
        np.sum([h.error_sum for h in histograms], axis=0),
        np.sum([h.count for h in histograms], axis=0),
    )


def mae_edge_split(pred, gt, band_radius=2):
    """MAE over the whole image and over pixels within ``band_radius`` of the edge."""
    check_same_shape(pred, gt)
    pred = as_gray(pred)
    gt = as_mask(gt)
    band = distance_to_edge(gt) <= band_radius
    err = np.abs(pred - gt)
    return EdgeBandReport(mae(pred, gt), float(err[band].mean()), band_radius)


def write_hist(hist, path):
    edges = hist.edges
    with atomic_open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["bin_lo", "bin_hi", "count", "mean_error"])
        for i, m in enumerate(hist.mean_error):
            w.writerow([repr(float(edges[i])), repr(float(edges[i + 1])),
                        int(hist.count[i]), "" if np.isnan(m) else repr(float(m))])


def write_edge_band(rows, path):
    """``rows`` is an iterable of ``(name, EdgeBandReport)``."""
    with atomic_open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["image", "mae_global", "mae_edge"])
        for name, rep in rows:
            w.writerow([name, repr(rep.mae_global), repr(rep.mae_edge)])
