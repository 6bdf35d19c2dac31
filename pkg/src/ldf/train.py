"""SGD training, gradient checking and checkpoints for the toy network."""
import csv
import json
import logging
import os
import struct
from dataclasses import asdict, dataclass

import numpy as np

from ._files import atomic_open
from .decouple import DecoupledLabels, decouple
from .distance import edge_pixels
from .errdist import mae_edge_split
from .image import load_gray, load_mask
from .losses import total_loss
from .model import ToyFinModel, backward, forward, predict
from .synth import synth_generate

log = logging.getLogger(__name__)

MODES = ("body+detail", "body+edge", "sal+detail", "sal+edge", "sal-only")


class TrainingDiverged(RuntimeError):
    pass


@dataclass
class TrainConfig:
    steps: int = 2000
    batch_size: int = 8
    lr: float = 0.05
    momentum: float = 0.9
    weight_decay: float = 5e-4
    seed: int = 0
    mode: str = "body+detail"
    n_interactions: int = 1
    n_train: int = 64
    side: int = 32
    widths: tuple = (8, 16, 32, 32)
    squeeze: int = 8

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown supervision mode {self.mode!r}; choose from {MODES}")
        for name in ("steps", "batch_size", "n_train", "side", "squeeze"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if self.lr <= 0 or not 0 <= self.momentum < 1 or self.weight_decay < 0:
            raise ValueError("invalid optimiser settings")
        if self.n_interactions < 0:
            raise ValueError("n_interactions must be >= 0")
        self.widths = tuple(int(w) for w in self.widths)


def supervision_targets(masks, mode):
    """Body and detail targets for each mask under a supervision mode.

    ``body`` is the body label, or the mask itself in ``sal`` modes.
    ``detail`` is the detail label, the 1-pixel 4-connected boundary in
    ``edge`` modes, or the mask in ``sal-only``.
    """
    if mode not in MODES:
        raise ValueError(f"unknown supervision mode {mode!r}")
    body, detail = [], []
    for m in masks:
        fg = m.astype(np.float64)
        labels = decouple(m)
        if mode == "sal-only":
            body.append(fg)
            detail.append(fg)
            continue
        body.append(labels.body if mode.startswith("body") else fg)
        if mode.endswith("detail"):
            detail.append(labels.detail)
        else:
            detail.append(edge_pixels(m).astype(np.float64))
    return np.stack(body), np.stack(detail)


def loss_and_grads(model, images, body, detail, masks, reduction="mean"):
    """Summed loss over all passes and its parameter gradients."""
    x = images[:, None]
    labels = DecoupledLabels(body[:, None], detail[:, None])
    out = forward(model, x)
    breakdown = total_loss(out.passes, labels, masks[:, None], reduction=reduction)
    grads = backward(out, breakdown.grads)
    return breakdown, grads


def train(config, images=None, masks=None):
    """Train a fresh model; returns ``(model, log_rows)``.

    Without ``images``/``masks`` a synthetic set of ``config.n_train``
    scenes is generated from ``config.seed``. Each log row is
    ``(step, pass, body_loss, detail_loss, segm_loss, total)``, with
    ``pass = 0`` holding the totals of the step.
    """
    if images is None:
        images, masks = synth_generate(config.n_train, config.side, config.seed)
    images = np.asarray(images, dtype=np.float64)
    masks = np.asarray(masks, dtype=np.uint8)
    if len(images) == 0:
        raise ValueError("empty training set")
    body, detail = supervision_targets(masks, config.mode)
    model = ToyFinModel(config.widths, config.squeeze, config.n_interactions,
                        seed=config.seed)
    velocity = {k: np.zeros_like(v) for k, v in model.params.items()}
    rng = np.random.default_rng(config.seed + 1)
    n = len(images)
    order = np.empty(0, dtype=np.int64)
    rows = []
    for step in range(1, config.steps + 1):
        if len(order) < config.batch_size:
            order = np.concatenate([order, rng.permutation(n)])
        idx, order = order[:config.batch_size], order[config.batch_size:]
        breakdown, grads = loss_and_grads(model, images[idx], body[idx],
                                          detail[idx], masks[idx])
        if not np.isfinite(breakdown.total):
            raise TrainingDiverged(f"non-finite loss at step {step}")
        for k, w in model.params.items():
            g = grads[k] + config.weight_decay * w
            v = velocity[k]
            v *= config.momentum
            v += g
            w -= config.lr * v
        for j, terms in enumerate(breakdown.per_iteration, 1):
            rows.append((step, j, *terms, sum(terms)))
        sums = np.sum(breakdown.per_iteration, axis=0)
        rows.append((step, 0, *sums, breakdown.total))
    return model, rows


def step_totals(rows):
    return np.array([r[5] for r in rows if r[1] == 0])


def epoch_means(rows, steps_per_epoch):
    totals = step_totals(rows)
    full = len(totals) // steps_per_epoch * steps_per_epoch
    return totals[:full].reshape(-1, steps_per_epoch).mean(axis=1)


def evaluate_model(model, images, masks, band_radius=2):
    """Mean saliency MAE and mean edge-band MAE of the final pass."""
    sal = predict(model, np.asarray(images, dtype=np.float64)[:, None])[2][:, 0]
    reports = [mae_edge_split(s, m, band_radius) for s, m in zip(sal, masks)]
    return (float(np.mean([r.mae_global for r in reports])),
            float(np.mean([r.mae_edge for r in reports])))


def grad_check(model, images, body, detail, masks, n_params=100, h=1e-5,
               reduction="sum", seed=0, floor=None):
    """Largest relative error between analytic and central-difference gradients.

    ``n_params`` parameter entries are sampled at random. The relative
    error is ``|a - n| / max(|a|, |n|, floor)``. The floor defaults to 1e-3
    of the RMS of the full analytic gradient, so entries that are tiny next
    to the gradient scale are judged against difference-quotient round-off
    rather than their own magnitude.
    """
    _, grads = loss_and_grads(model, images, body, detail, masks, reduction)
    keys = sorted(model.params)
    if floor is None:
        flat_grad = np.concatenate([grads[k].ravel() for k in keys])
        floor = 1e-3 * float(np.sqrt(np.mean(flat_grad ** 2)))
    sizes = np.array([model.params[k].size for k in keys])
    rng = np.random.default_rng(seed)
    picks = rng.choice(sizes.sum(), size=min(n_params, sizes.sum()), replace=False)
    offsets = np.concatenate([[0], np.cumsum(sizes)])
    worst = 0.0
    for flat in picks:
        ki = np.searchsorted(offsets, flat, side="right") - 1
        key = keys[ki]
        w = model.params[key].reshape(-1)
        j = flat - offsets[ki]
        orig = w[j]
        w[j] = orig + h
        plus = loss_and_grads(model, images, body, detail, masks, reduction)[0].total
        w[j] = orig - h
        minus = loss_and_grads(model, images, body, detail, masks, reduction)[0].total
        w[j] = orig
        numeric = (plus - minus) / (2 * h)
        analytic = grads[key].reshape(-1)[j]
        err = abs(analytic - numeric) / max(abs(analytic), abs(numeric), floor)
        worst = max(worst, err)
    return worst


def micro_model(n_interactions=1, seed=0):
    """A small variant (under 1e4 parameters) for gradient checks."""
    return ToyFinModel(widths=(4, 4, 8, 8), squeeze=4,
                       n_interactions=n_interactions, seed=seed)


def gradcheck_default(n_interactions=1, mode="body+detail", reduction="sum",
                      seed=0, n_params=100):
    """Gradient check of the micro model on two synthetic 16x16 scenes."""
    images, masks = synth_generate(2, 16, seed)
    body, detail = supervision_targets(masks, mode)
    model = micro_model(n_interactions, seed)
    return grad_check(model, images, body, detail, masks, n_params=n_params,
                      reduction=reduction, seed=seed)


# -- checkpoints -----------------------------------------------------------

MAGIC = b"LDFT"
FORMAT_VERSION = 1


def save_checkpoint(model, path):
    """Binary layout (little-endian): magic, u32 version, u32 header length,
    UTF-8 JSON header, then for each parameter in header order: u32 ndim,
    i64 dims, f64 data.
    """
    names = sorted(model.params)
    header = json.dumps({
        "widths": list(model.widths),
        "squeeze": model.squeeze,
        "n_interactions": model.n_interactions,
        "params": names,
    }, sort_keys=True).encode()
    with atomic_open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<II", FORMAT_VERSION, len(header)))
        fh.write(header)
        for name in names:
            arr = np.ascontiguousarray(model.params[name], dtype="<f8")
            fh.write(struct.pack("<I", arr.ndim))
            fh.write(struct.pack(f"<{arr.ndim}q", *arr.shape))
            fh.write(arr.tobytes())


def load_checkpoint(path):
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:4] != MAGIC:
        raise ValueError(f"{path}: not a checkpoint (bad magic)")
    version, hlen = struct.unpack_from("<II", data, 4)
    if version != FORMAT_VERSION:
        raise ValueError(f"{path}: unsupported checkpoint version {version}")
    pos = 12
    header = json.loads(data[pos:pos + hlen])
    pos += hlen
    model = ToyFinModel(header["widths"], header["squeeze"], header["n_interactions"])
    for name in header["params"]:
        (ndim,) = struct.unpack_from("<I", data, pos)
        pos += 4
        shape = struct.unpack_from(f"<{ndim}q", data, pos)
        pos += 8 * ndim
        count = int(np.prod(shape))
        arr = np.frombuffer(data, dtype="<f8", count=count, offset=pos).reshape(shape)
        pos += 8 * count
        if model.params[name].shape != arr.shape:
            raise ValueError(f"{path}: shape mismatch for {name}")
        model.params[name] = arr.astype(np.float64)
    return model


def write_log(rows, path):
    with atomic_open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["step", "pass", "body_loss", "detail_loss", "segm_loss", "total"])
        for row in rows:
            w.writerow([row[0], row[1]] + [repr(float(v)) for v in row[2:]])


def load_image_dir(data_dir):
    """Read ``images/*.png`` and same-named ``masks/*.png`` from ``data_dir``."""
    img_dir = os.path.join(data_dir, "images")
    mask_dir = os.path.join(data_dir, "masks")
    names = sorted(f for f in os.listdir(img_dir) if f.lower().endswith(".png")
                   and os.path.exists(os.path.join(mask_dir, f)))
    if not names:
        raise FileNotFoundError(f"no image/mask pairs under {data_dir}")
    images = np.stack([load_gray(os.path.join(img_dir, f)) for f in names])
    masks = np.stack([load_mask(os.path.join(mask_dir, f)) for f in names])
    return images, masks


def config_dict(config):
    d = asdict(config)
    d["widths"] = list(config.widths)
    return d
