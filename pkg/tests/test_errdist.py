import numpy as np
import pytest
from scipy.ndimage import gaussian_filter

from conftest import disk
from ldf.distance import NoEdge, distance_to_edge
from ldf.errdist import (EdgeBandReport, ErrorDistanceHistogram, aggregate_hists,
                         error_distance_hist, mae_edge_split, write_edge_band, write_hist)
from ldf.metrics import mae


def blurred_disk(side=128, r=30, sigma=2.0):
    gt = disk(side, side // 2, side // 2, r)
    return np.clip(gaussian_filter(gt.astype(float), sigma), 0, 1), gt


def test_perfect_and_inverted():
    gt = disk(32, 16, 16, 9)
    h = error_distance_hist(gt.astype(float), gt)
    assert np.all(h.mean_error[h.count > 0] == 0)
    inv = error_distance_hist(1.0 - gt, gt)
    assert np.all(inv.mean_error[inv.count > 0] == 1)
    assert h.count.sum() == gt.size


def test_empty_bins_are_nan():
    h = ErrorDistanceHistogram(np.array([1.0, 0.0]), np.array([2, 0]))
    assert h.mean_error[0] == 0.5 and np.isnan(h.mean_error[1])


def test_binning_matches_direct_assignment(rng):
    gt = disk(40, 18, 22, 11)
    pred = rng.random(gt.shape)
    bins = 7
    h = error_distance_hist(pred, gt, bins)
    d = distance_to_edge(gt)
    d = d / d.max()
    err = np.abs(pred - gt)
    for i in range(bins):
        lo, hi = i / bins, (i + 1) / bins
        sel = (d >= lo) & ((d < hi) if i < bins - 1 else (d <= hi))
        assert h.count[i] == sel.sum()
        assert h.error_sum[i] == pytest.approx(err[sel].sum(), rel=1e-12)


def test_blurred_disk_error_shape():
    pred, gt = blurred_disk()
    means = error_distance_hist(pred, gt).mean_error
    tail = means[2:][~np.isnan(means[2:])]
    assert np.all(np.diff(tail) <= 0)
    rep = mae_edge_split(pred, gt)
    assert rep.mae_edge > rep.mae_global


def test_edge_split_cases(rng):
    gt = disk(30, 15, 15, 8)
    rep = mae_edge_split(gt.astype(float), gt)
    assert (rep.mae_global, rep.mae_edge) == (0, 0)
    pred = rng.random(gt.shape)
    assert mae_edge_split(pred, gt).mae_global == mae(pred, gt)
    band = distance_to_edge(gt) <= 3
    assert mae_edge_split(pred, gt, 3).mae_edge == pytest.approx(
        np.abs(pred - gt)[band].mean(), rel=1e-14)


def test_constant_gt_raises():
    with pytest.raises(NoEdge):
        error_distance_hist(np.zeros((4, 4)), np.ones((4, 4), np.uint8))
    with pytest.raises(NoEdge):
        mae_edge_split(np.zeros((4, 4)), np.zeros((4, 4), np.uint8))


def test_aggregate(rng):
    gt1, gt2 = disk(20, 10, 10, 5), disk(24, 8, 12, 6)
    p1, p2 = rng.random(gt1.shape), rng.random(gt2.shape)
    h1, h2 = error_distance_hist(p1, gt1, 5), error_distance_hist(p2, gt2, 5)
    assert np.array_equal(aggregate_hists([h1]).error_sum, h1.error_sum)
    twice = aggregate_hists([h1, h1])
    assert np.array_equal(twice.count, 2 * h1.count)
    assert np.allclose(twice.mean_error, h1.mean_error, equal_nan=True)
    both = aggregate_hists([h1, h2])
    # pixel-weighted: equals the direct pooled computation
    pooled_sum = h1.error_sum + h2.error_sum
    pooled_count = h1.count + h2.count
    assert np.allclose(both.mean_error, pooled_sum / pooled_count)
    with pytest.raises(ValueError):
        aggregate_hists([h1, error_distance_hist(p1, gt1, 4)])


def test_aggregate_disjoint_bins():
    a = ErrorDistanceHistogram(np.array([1.0, 0.0]), np.array([4, 0]))
    b = ErrorDistanceHistogram(np.array([0.0, 3.0]), np.array([0, 6]))
    assert aggregate_hists([a, b]).mean_error.tolist() == [0.25, 0.5]


def test_csv_writers(tmp_path):
    h = ErrorDistanceHistogram(np.array([1.0, 0.0]), np.array([4, 0]))
    write_hist(h, tmp_path / "h.csv")
    lines = (tmp_path / "h.csv").read_text().splitlines()
    assert lines == ["bin_lo,bin_hi,count,mean_error", "0.0,0.5,4,0.25", "0.5,1.0,0,"]
    write_edge_band([("a.png", EdgeBandReport(0.1, 0.4, 2))], tmp_path / "e.csv")
    assert (tmp_path / "e.csv").read_text().splitlines()[1] == "a.png,0.1,0.4"
