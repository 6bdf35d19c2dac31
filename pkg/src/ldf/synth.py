"""Random ellipse/rectangle scenes for toy training."""
import os

import numpy as np

from .image import save_gray


def _shape_mask(rng, side):
    yy, xx = np.mgrid[0:side, 0:side] + 0.5
    cy, cx = rng.uniform(0.2 * side, 0.8 * side, 2)
    ry, rx = rng.uniform(0.1 * side, 0.3 * side, 2)
    if rng.random() < 0.5:
        return ((yy - cy) / ry) ** 2 + ((xx - cx) / rx) ** 2 <= 1.0
    return (np.abs(yy - cy) <= ry) & (np.abs(xx - cx) <= rx)


def synth_generate(n, side, seed=0):
    """Generate ``n`` image/mask pairs of size ``side x side``.

    Each mask is the union of 1-3 filled ellipses or rectangles and always
    has both foreground and background. The image has foreground intensity
    0.7 +/- 0.2 over background 0.3 +/- 0.2, plus Gaussian noise of sigma
    0.1, clipped to [0, 1]. Returns ``(images, masks)`` arrays of shape
    ``(n, side, side)``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if side < 16 or side % 16:
        raise ValueError("side must be a positive multiple of 16")
    rng = np.random.default_rng(seed)
    images = np.empty((n, side, side))
    masks = np.empty((n, side, side), dtype=np.uint8)
    for i in range(n):
        while True:
            mask = np.zeros((side, side), dtype=bool)
            for _ in range(rng.integers(1, 4)):
                mask |= _shape_mask(rng, side)
            if mask.any() and not mask.all():
                break
        fg = rng.uniform(0.5, 0.9)
        bg = rng.uniform(0.1, 0.5)
        img = np.where(mask, fg, bg) + rng.normal(0.0, 0.1, (side, side))
        images[i] = np.clip(img, 0.0, 1.0)
        masks[i] = mask
    return images, masks


def write_dataset(images, masks, out_dir):
    """Write ``images/NNNN.png`` and ``masks/NNNN.png`` (8-bit)."""
    img_dir = os.path.join(out_dir, "images")
    mask_dir = os.path.join(out_dir, "masks")
    os.makedirs(img_dir, exist_ok=True)
    os.makedirs(mask_dir, exist_ok=True)
    for i, (img, mask) in enumerate(zip(images, masks)):
        name = f"{i:04d}.png"
        save_gray(img, os.path.join(img_dir, name), 8)
        save_gray(mask, os.path.join(mask_dir, name), 8)
    return len(images)
