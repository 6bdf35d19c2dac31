"""Grayscale map I/O and binarization.

Maps are plain 2-D ``float64`` arrays with values in [0, 1]; masks are 2-D
``uint8`` arrays holding only 0 and 1.
"""
import os

import numpy as np
from PIL import Image

from ._files import atomic_open

GT_THRESHOLD = 128 / 255

# Rec.601 luma weights
_LUMA = np.array([0.299, 0.587, 0.114])


class DimensionMismatch(ValueError):
    pass


def check_same_shape(*arrays):
    shapes = {np.shape(a) for a in arrays}
    if len(shapes) != 1:
        raise DimensionMismatch(f"shape mismatch: {sorted(shapes)}")


def as_gray(data):
    """Validate and convert to a float64 gray map."""
    arr = np.asarray(data, dtype=np.float64)
    if arr.ndim != 2 or arr.size == 0:
        raise ValueError(f"expected a non-empty 2-D map, got shape {arr.shape}")
    if not np.all((arr >= 0.0) & (arr <= 1.0)):
        raise ValueError("gray map values must lie in [0, 1]")
    return arr


def as_mask(data):
    """Validate and convert to a {0,1} uint8 mask."""
    arr = np.asarray(data)
    if arr.ndim != 2 or arr.size == 0:
        raise ValueError(f"expected a non-empty 2-D mask, got shape {arr.shape}")
    if not np.all((arr == 0) | (arr == 1)):
        raise ValueError("mask values must be exactly 0 or 1")
    return arr.astype(np.uint8)


def load_gray(path):
    """Read a PNG as a gray map in [0, 1].

    8-bit data is divided by 255, 16-bit data by 65535. RGB(A) and palette
    images are converted to luma first.
    """
    if not os.path.exists(path):
        raise FileNotFoundError(path)
    with Image.open(path) as img:
        if img.format != "PNG":
            raise ValueError(f"{path}: not a PNG ({img.format})")
        mode = img.mode
        if mode == "P":
            img = img.convert("RGBA" if "transparency" in img.info else "RGB")
            mode = img.mode
        if mode in ("I;16", "I;16B", "I;16L", "I"):
            arr = np.asarray(img, dtype=np.float64) / 65535.0
        elif mode in ("L", "LA"):
            arr = np.asarray(img.getchannel(0), dtype=np.float64) / 255.0
        elif mode == "1":
            arr = np.asarray(img, dtype=np.float64)
        elif mode in ("RGB", "RGBA"):
            rgb = np.asarray(img.convert("RGB"), dtype=np.float64)
            arr = (rgb @ _LUMA) / 255.0
        else:
            raise ValueError(f"{path}: unsupported PNG mode {mode!r}")
    if arr.size == 0:
        raise ValueError(f"{path}: zero-sized image")
    return np.clip(arr, 0.0, 1.0)


def quantize(data, depth=16):
    if depth not in (8, 16):
        raise ValueError("depth must be 8 or 16")
    top = (1 << depth) - 1
    # round half up
    q = np.floor(as_gray(data) * top + 0.5)
    return q.astype(np.uint8 if depth == 8 else np.uint16)


def save_gray(data, path, depth=16):
    """Write a gray map as a single-channel PNG of the given bit depth.

    The file is written to a temporary name and renamed into place.
    """
    img = Image.fromarray(quantize(data, depth))
    with atomic_open(path, "wb") as fh:
        img.save(fh, format="PNG")


def binarize(data, threshold=GT_THRESHOLD):
    if not 0.0 <= threshold <= 1.0:
        raise ValueError("threshold must lie in [0, 1]")
    return (as_gray(data) >= threshold).astype(np.uint8)


def load_mask(path, threshold=GT_THRESHOLD):
    return binarize(load_gray(path), threshold)
