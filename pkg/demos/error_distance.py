"""
Where do the errors live?
=========================

Blur a mask to fake a prediction and bucket the absolute error by how far
each pixel is from the object outline. Errors pile up next to the edge.
"""

import numpy as np

from ldf.errdist import error_distance_hist, mae_edge_split

yy, xx = np.mgrid[0:96, 0:96]
gt = ((yy - 48) ** 2 + (xx - 48) ** 2 <= 30 ** 2).astype(np.uint8)

# cheap separable box blur, applied twice
kernel = np.ones(5) / 5
pred = gt.astype(float)
for _ in range(2):
    pred = np.apply_along_axis(lambda r: np.convolve(r, kernel, "same"), 0, pred)
    pred = np.apply_along_axis(lambda r: np.convolve(r, kernel, "same"), 1, pred)

hist = error_distance_hist(pred, gt, bins=10)
for lo, hi, n, e in zip(hist.edges[:-1], hist.edges[1:], hist.count, hist.mean_error):
    print(f"[{lo:.1f}, {hi:.1f})  {n:5d} px  mean error {e:.4f}")

rep = mae_edge_split(pred, gt)
print(f"MAE everywhere {rep.mae_global:.4f}, within {rep.band_radius} px of the edge {rep.mae_edge:.4f}")
