"""
Scoring a saliency map
======================

Compare a soft prediction with a binary ground truth using mean absolute
error, the F-measure swept over 256 thresholds and the E-measure.
"""

import numpy as np

from ldf.metrics import adaptive_f, e_measure, mae, mean_e, mean_f, pr_curve

rng = np.random.default_rng(0)
yy, xx = np.mgrid[0:64, 0:64]
gt = ((yy - 30) ** 2 + (xx - 34) ** 2 <= 300).astype(np.uint8)

# a prediction that is mostly right but noisy and a little too large
pred = np.clip(0.8 * ((yy - 30) ** 2 + (xx - 34) ** 2 <= 360) + 0.15 * rng.random(gt.shape), 0, 1)

print("MAE        ", round(mae(pred, gt), 4))
curve = pr_curve(pred, gt)
print("mean F     ", round(mean_f(curve), 4))
print("max F      ", round(float(curve.f_measure.max()), 4))
print("adaptive F ", round(adaptive_f(pred, gt), 4))
print("mean E     ", round(mean_e(pred, gt), 4))

# a few points along the precision/recall sweep
for k in (0, 64, 128, 192, 255):
    print(f"t={curve.thresholds[k]:.3f}  P={curve.precision[k]:.3f}  R={curve.recall[k]:.3f}")

# the perfect prediction scores 0 / 1 / 1
print(mae(gt, gt), mean_f(pr_curve(gt, gt)), e_measure(gt, gt))
