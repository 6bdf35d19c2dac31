"""Exact Euclidean distance transforms on the pixel grid.

``edt`` uses the separable lower-envelope-of-parabolas method: a column pass
followed by a row pass over squared distances, each linear in the line
length. ``edt_bruteforce`` is the literal minimum over background pixels and
serves as a test oracle. Both return ``sqrt`` of integer squared distances,
so on the same mask they agree bit for bit.
"""
import numpy as np

from .image import as_mask


class EmptyBackground(ValueError):
    """The mask has no background pixel, so the distance is undefined."""


class NoEdge(ValueError):
    """The mask is constant and has no foreground/background boundary."""


def _envelope_1d(f):
    """Squared distance transform of one line of sampled values ``f``.

    Returns ``d[q] = min_p (q - p)**2 + f[p]``. Values of ``f`` must be finite.
    """
    n = len(f)
    d = np.empty(n)
    v = [0] * n  # parabola apexes on the envelope
    z = [0.0] * (n + 1)  # boundaries between envelope pieces
    k = 0
    z[0] = -np.inf
    z[1] = np.inf
    for q in range(1, n):
        fq = f[q] + q * q
        while True:
            p = v[k]
            s = (fq - (f[p] + p * p)) / (2 * q - 2 * p)
            if s <= z[k]:
                k -= 1
            else:
                break
        k += 1
        v[k] = q
        z[k] = s
        z[k + 1] = np.inf
    k = 0
    for q in range(n):
        while z[k + 1] < q:
            k += 1
        p = v[k]
        d[q] = (q - p) * (q - p) + f[p]
    return d


def squared_edt(seeds):
    """Integer-valued squared distance from every pixel to the nearest seed.

    ``seeds`` is a boolean array; at least one entry must be true.
    """
    seeds = np.asarray(seeds, dtype=bool)
    if not seeds.any():
        raise EmptyBackground("no seed pixels")
    h, w = seeds.shape
    # stands in for +inf; exceeds every reachable squared distance
    big = float((h + w) ** 2 + 1)
    f = np.where(seeds, 0.0, big)
    cols = np.empty_like(f)
    for x in range(w):
        cols[:, x] = _envelope_1d(f[:, x].tolist())
    out = np.empty_like(f)
    for y in range(h):
        out[y] = _envelope_1d(cols[y].tolist())
    return out


def edt(mask):
    """Distance from each foreground pixel to the nearest background pixel.

    Background pixels get 0. Raises ``EmptyBackground`` for an all-ones mask.
    """
    mask = as_mask(mask)
    background = mask == 0
    if not background.any():
        raise EmptyBackground("mask has no background pixels")
    return np.sqrt(squared_edt(background))


def squared_edt_bruteforce(seeds):
    seeds = np.asarray(seeds, dtype=bool)
    if not seeds.any():
        raise EmptyBackground("no seed pixels")
    qy, qx = np.nonzero(seeds)
    out = np.zeros(seeds.shape)
    h, w = seeds.shape
    for py in range(h):
        for px in range(w):
            if seeds[py, px]:
                continue
            out[py, px] = np.min((px - qx) ** 2 + (py - qy) ** 2)
    return out


def edt_bruteforce(mask):
    """Reference transform: explicit minimum over all background pixels."""
    mask = as_mask(mask)
    background = mask == 0
    if not background.any():
        raise EmptyBackground("mask has no background pixels")
    return np.sqrt(squared_edt_bruteforce(background))


def edge_pixels(mask):
    """Foreground pixels with at least one background 4-neighbour.

    Neighbours outside the image are ignored, so the image frame does not
    create edges.
    """
    fg = as_mask(mask).astype(bool)
    bg = ~fg
    touches = np.zeros_like(fg)
    touches[1:, :] |= bg[:-1, :]
    touches[:-1, :] |= bg[1:, :]
    touches[:, 1:] |= bg[:, :-1]
    touches[:, :-1] |= bg[:, 1:]
    return fg & touches


def distance_to_edge(mask):
    """Euclidean distance from every pixel to the nearest edge pixel."""
    edges = edge_pixels(mask)
    if not edges.any():
        raise NoEdge("mask is constant; it has no edge pixels")
    return np.sqrt(squared_edt(edges))
