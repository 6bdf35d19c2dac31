"""Split a binary saliency mask into body and detail labels.

The body label is the mask weighted by its min-max normalised distance
transform; the detail label is the remainder, so the two always sum back to
the mask.
"""
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .distance import EmptyBackground, edt
from .image import as_mask, load_mask, save_gray

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class DecoupledLabels:
    body: np.ndarray
    detail: np.ndarray


def normalize_field(field):
    """Linearly map a field onto [0, 1]; a constant field maps to zeros."""
    field = np.asarray(field, dtype=np.float64)
    lo = field.min()
    hi = field.max()
    if hi == lo:
        return np.zeros_like(field)
    return (field - lo) / (hi - lo)


def decouple(mask):
    """Body/detail decomposition of a binary mask.

    An all-foreground mask has no background to measure from; it yields
    ``body = mask`` and ``detail = 0``.
    """
    mask = as_mask(mask)
    fg = mask.astype(np.float64)
    try:
        norm = normalize_field(edt(mask))
    except EmptyBackground:
        return DecoupledLabels(body=fg.copy(), detail=np.zeros_like(fg))
    return DecoupledLabels(body=fg * norm, detail=fg * (1.0 - norm))


def decouple_dataset(gt_dir, out_dir, jobs=1):
    """Decouple every PNG mask in ``gt_dir``.

    Writes ``<name>.body.png`` and ``<name>.detail.png`` (16-bit) into
    ``out_dir`` and returns the number of masks processed. Unreadable files
    are logged and skipped.
    """
    names = sorted(f for f in os.listdir(gt_dir) if f.lower().endswith(".png"))
    if not names:
        raise FileNotFoundError(f"no masks found in {gt_dir}")
    os.makedirs(out_dir, exist_ok=True)
    if not os.access(out_dir, os.W_OK):
        raise PermissionError(f"cannot write to {out_dir}")

    def work(name):
        try:
            mask = load_mask(os.path.join(gt_dir, name))
        except Exception as exc:  # corrupt or unsupported files are skipped
            log.warning("skipping %s: %s", name, exc)
            return False
        labels = decouple(mask)
        stem = os.path.splitext(name)[0]
        save_gray(labels.body, os.path.join(out_dir, stem + ".body.png"), 16)
        save_gray(labels.detail, os.path.join(out_dir, stem + ".detail.png"), 16)
        return True

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            done = list(pool.map(work, names))
    else:
        done = [work(n) for n in names]
    return sum(done)
