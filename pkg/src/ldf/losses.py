"""Saliency training losses with analytic gradients.

All losses take probability maps. Inputs may carry leading batch axes; the
last two axes are the image plane. With ``reduction="sum"`` the value is the
plain sum used in the loss definitions; ``"mean"`` rescales for training.
"""
from dataclasses import dataclass, field

import numpy as np

from .image import check_same_shape

EPS = 1e-7


@dataclass
class LossValueGrad:
    value: float
    grad: np.ndarray


@dataclass
class LossBreakdown:
    """Per-iteration loss terms and their weighted total."""

    per_iteration: list
    weights: list
    total: float
    grads: list = field(default_factory=list, repr=False)


def _check_reduction(reduction):
    if reduction not in ("sum", "mean"):
        raise ValueError(f"unknown reduction {reduction!r}")


def bce(pred, target, reduction="sum"):
    """Binary cross-entropy; ``target`` may be continuous in [0, 1]."""
    _check_reduction(reduction)
    check_same_shape(pred, target)
    g = np.asarray(target, dtype=np.float64)
    p = np.clip(np.asarray(pred, dtype=np.float64), EPS, 1.0 - EPS)
    value = -np.sum(g * np.log(p) + (1.0 - g) * np.log1p(-p))
    grad = (p - g) / (p * (1.0 - p))
    if reduction == "mean":
        value /= p.size
        grad = grad / p.size
    return LossValueGrad(float(value), grad)


def iou_loss(pred, target, reduction="sum"):
    """Soft IoU loss ``1 - sum(g*p) / sum(g + p - g*p)`` per image.

    ``target`` must be binary. When both maps of an image are empty the
    loss is 0 with zero gradient. ``reduction`` decides how per-image values
    over leading batch axes are combined.
    """
    _check_reduction(reduction)
    check_same_shape(pred, target)
    g = np.asarray(target)
    if not np.all((g == 0) | (g == 1)):
        raise ValueError("IoU loss requires a binary target")
    g = g.astype(np.float64)
    p = np.asarray(pred, dtype=np.float64)
    if p.ndim < 2:
        raise ValueError("IoU loss expects at least a 2-D map")
    inter = np.sum(g * p, axis=(-2, -1), keepdims=True)
    union = np.sum(g + p - g * p, axis=(-2, -1), keepdims=True)
    empty = union == 0
    safe = np.where(empty, 1.0, union)
    per_image = np.where(empty, 0.0, 1.0 - inter / safe)
    grad = np.where(empty, 0.0, -(g * safe - inter * (1.0 - g)) / safe**2)
    value = per_image.sum()
    if reduction == "mean":
        n = per_image.size
        value /= n
        grad = grad / n
    return LossValueGrad(float(value), grad)


def iteration_loss(body_pred, detail_pred, sal_pred, labels, mask,
                   reduction="sum"):
    """Loss of one refinement pass: BCE on body and detail, IoU on saliency.

    ``labels`` is anything with ``body`` and ``detail`` target arrays, such
    as :class:`ldf.decouple.DecoupledLabels`. Returns ``(value, (body_loss, detail_loss, segm_loss), grads)`` where
    ``grads`` holds the gradient for each of the three predictions.
    """
    check_same_shape(body_pred, detail_pred, sal_pred, labels.body,
                     labels.detail, mask)
    lb = bce(body_pred, labels.body, reduction)
    ld = bce(detail_pred, labels.detail, reduction)
    ls = iou_loss(sal_pred, mask, reduction)
    terms = (lb.value, ld.value, ls.value)
    return lb.value + ld.value + ls.value, terms, (lb.grad, ld.grad, ls.grad)


def total_loss(iterations, labels, mask, weights=None, reduction="sum"):
    """Weighted sum of per-pass losses.

    ``iterations`` is a sequence of ``(body_pred, detail_pred, sal_pred)``.
    Weights default to 1 for every pass. The gradients stored on the result
    are already scaled by the pass weight.
    """
    iterations = list(iterations)
    if weights is None:
        weights = [1.0] * len(iterations)
    weights = [float(a) for a in weights]
    if not iterations or len(weights) != len(iterations):
        raise ValueError(
            f"need one weight per pass: {len(weights)} weights, "
            f"{len(iterations)} passes")
    per_iteration = []
    grads = []
    total = 0.0
    for alpha, (body, detail, sal) in zip(weights, iterations):
        value, terms, g = iteration_loss(body, detail, sal, labels, mask,
                                         reduction)
        per_iteration.append(terms)
        grads.append(tuple(alpha * gi for gi in g))
        total += alpha * value
    return LossBreakdown(per_iteration, weights, total, grads)
