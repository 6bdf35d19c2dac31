"""Minimal numpy building blocks for the toy network.

Each primitive comes as a forward/backward pair. The public ``conv2d`` and
``upsample_bilinear_x2`` take ``(N, C, H, W)`` arrays and ``(O, C, k, k)``
weights; the network itself runs channels-last through the ``*_nhwc``
variants, which avoid per-call transposes.

:class:`Tape` records primitives applied to :class:`Node` objects and replays
their backward functions in reverse.
"""
import numpy as np
from numpy.lib.stride_tricks import sliding_window_view


def _check_conv(cin, w, stride):
    if w.ndim != 4:
        raise ValueError("conv weights must be 4-D")
    k = w.shape[2]
    if w.shape[3] != k or k not in (1, 3):
        raise ValueError("only 1x1 and 3x3 kernels are supported")
    if w.shape[1] != cin:
        raise ValueError(f"channel mismatch: input {cin}, weights {w.shape[1]}")
    if stride not in (1, 2):
        raise ValueError("stride must be 1 or 2")
    return k


def _pad1(x):
    n, h, w, c = x.shape
    xp = np.zeros((n, h + 2, w + 2, c))
    xp[:, 1:-1, 1:-1] = x
    return xp


def conv2d_nhwc(x, w, b, stride=1):
    """Cross-correlation of ``(N, H, W, C)`` input with ``(k, k, C, O)`` weights.

    3x3 kernels are zero-padded by 1, 1x1 kernels are not padded.
    """
    k = w.shape[0]
    n, h, wd, c = x.shape
    if k == 1:
        xs = x[:, ::stride, ::stride]
        cols = xs.reshape(-1, c)
        out = cols @ w.reshape(c, -1) + b
        return out.reshape(*xs.shape[:3], -1), (x.shape, cols, w, stride)
    win = sliding_window_view(_pad1(x), (k, k), axis=(1, 2))[:, ::stride, ::stride]
    ho, wo = win.shape[1:3]
    # window axes (N, Ho, Wo, C, k, k) -> rows ordered (k, k, C)
    cols = win.transpose(0, 1, 2, 4, 5, 3).reshape(n * ho * wo, k * k * c)
    out = cols @ w.reshape(k * k * c, -1) + b
    return out.reshape(n, ho, wo, -1), (x.shape, cols, w, stride)


def conv2d_nhwc_backward(dout, cache):
    """Gradients ``(dx, dw, db)`` of :func:`conv2d_nhwc`."""
    xshape, cols, w, stride = cache
    n, h, wd, c = xshape
    k = w.shape[0]
    o = w.shape[3]
    ho, wo = dout.shape[1:3]
    dflat = dout.reshape(-1, o)
    dw = (dflat.T @ cols).T.reshape(w.shape)
    db = dflat.sum(axis=0)
    if k == 1:
        dxs = (dflat @ w.reshape(c, o).T).reshape(n, ho, wo, c)
        if stride == 1:
            return dxs, dw, db
        dx = np.zeros(xshape)
        dx[:, ::stride, ::stride] = dxs
        return dx, dw, db
    if stride == 1:
        # full correlation with the flipped, transposed kernel
        wt = np.ascontiguousarray(w[::-1, ::-1].transpose(0, 1, 3, 2))
        dx, _ = conv2d_nhwc(dout, wt, 0.0, 1)
        return dx, dw, db
    dcols = (dflat @ w.reshape(-1, o).T).reshape(n, ho, wo, k, k, c)
    dxp = np.zeros((n, h + 2, wd + 2, c))
    for i in range(k):
        for j in range(k):
            dxp[:, i:i + stride * ho:stride, j:j + stride * wo:stride] += dcols[:, :, :, i, j]
    return dxp[:, 1:-1, 1:-1], dw, db


def to_nhwc_weights(w):
    """``(O, C, k, k)`` -> ``(k, k, C, O)``."""
    return np.ascontiguousarray(np.asarray(w, dtype=np.float64).transpose(2, 3, 1, 0))


def conv2d(x, w, b, stride=1):
    """Zero-padded cross-correlation on ``(N, C, H, W)`` input.

    ``w`` has shape ``(O, C, k, k)`` with ``k`` in {1, 3}; 3x3 kernels pad
    by 1. Returns ``(out, cache)``; pass ``cache`` to
    :func:`conv2d_backward`.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 4:
        raise ValueError("conv2d expects a 4-D (N, C, H, W) input")
    _check_conv(x.shape[1], np.asarray(w), stride)
    out, cache = conv2d_nhwc(x.transpose(0, 2, 3, 1), to_nhwc_weights(w),
                             np.asarray(b, dtype=np.float64), stride)
    return np.ascontiguousarray(out.transpose(0, 3, 1, 2)), cache


def conv2d_backward(dout, cache):
    """Gradients ``(dx, dw, db)`` of :func:`conv2d`, in its layouts."""
    dx, dw, db = conv2d_nhwc_backward(
        np.ascontiguousarray(np.asarray(dout).transpose(0, 2, 3, 1)), cache)
    return (np.ascontiguousarray(dx.transpose(0, 3, 1, 2)),
            np.ascontiguousarray(dw.transpose(3, 2, 0, 1)), db)


def _upsample_matrix(n):
    """Linear map of a length-``n`` signal to ``2n`` samples (half-pixel centres)."""
    m = np.zeros((2 * n, n))
    for i in range(n):
        m[2 * i, i] += 0.75
        m[2 * i, max(i - 1, 0)] += 0.25
        m[2 * i + 1, i] += 0.75
        m[2 * i + 1, min(i + 1, n - 1)] += 0.25
    return m


_UP_CACHE = {}


def _up(n):
    if n not in _UP_CACHE:
        _UP_CACHE[n] = _upsample_matrix(n)
    return _UP_CACHE[n]


def upsample_bilinear_x2(x):
    """Bilinear x2 upsampling of ``(N, C, H, W)`` without corner alignment."""
    x = np.asarray(x, dtype=np.float64)
    return _up(x.shape[2]) @ x @ _up(x.shape[3]).T


def upsample_bilinear_x2_backward(dout):
    """Adjoint of :func:`upsample_bilinear_x2`."""
    return _up(dout.shape[2] // 2).T @ dout @ _up(dout.shape[3] // 2)


def upsample_nhwc(x):
    n, h, w, c = x.shape
    y = (_up(h) @ x.reshape(n, h, w * c)).reshape(n, 2 * h, w, c)
    return _up(w) @ y


def upsample_nhwc_backward(dout):
    n, h2, w2, c = dout.shape
    y = _up(w2 // 2).T @ dout
    return (_up(h2 // 2).T @ y.reshape(n, h2, -1)).reshape(n, h2 // 2, w2 // 2, c)


def sigmoid(x):
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def silu(x):
    return x * sigmoid(x)


def silu_backward(dout, x):
    s = sigmoid(x)
    return dout * s * (1.0 + x * (1.0 - s))


class Node:
    __slots__ = ("value", "grad")

    def __init__(self, value):
        self.value = value
        self.grad = None

    def accumulate(self, g):
        if self.grad is None:
            self.grad = np.array(g, dtype=np.float64, copy=True)
        else:
            self.grad += g


class Tape:
    """Records differentiable channels-last operations for one forward pass.

    Convolution weight nodes hold ``(k, k, C, O)`` arrays.
    """

    def __init__(self):
        self._backward = []

    def conv(self, x, w, b, stride=1):
        out, cache = conv2d_nhwc(x.value, w.value, b.value, stride)
        node = Node(out)

        def back():
            dx, dw, db = conv2d_nhwc_backward(node.grad, cache)
            x.accumulate(dx)
            w.accumulate(dw)
            b.accumulate(db)

        self._backward.append((node, back))
        return node

    def add(self, a, b):
        node = Node(a.value + b.value)

        def back():
            a.accumulate(node.grad)
            b.accumulate(node.grad)

        self._backward.append((node, back))
        return node

    def silu(self, x):
        node = Node(silu(x.value))

        def back():
            x.accumulate(silu_backward(node.grad, x.value))

        self._backward.append((node, back))
        return node

    def sigmoid(self, x):
        s = sigmoid(x.value)
        node = Node(s)

        def back():
            x.accumulate(node.grad * s * (1.0 - s))

        self._backward.append((node, back))
        return node

    def upsample(self, x):
        node = Node(upsample_nhwc(x.value))

        def back():
            x.accumulate(upsample_nhwc_backward(node.grad))

        self._backward.append((node, back))
        return node

    def concat(self, a, b):
        ca = a.value.shape[-1]
        node = Node(np.concatenate([a.value, b.value], axis=-1))

        def back():
            a.accumulate(node.grad[..., :ca])
            b.accumulate(node.grad[..., ca:])

        self._backward.append((node, back))
        return node

    def backward(self):
        """Propagate gradients already seeded on output nodes."""
        for node, back in reversed(self._backward):
            if node.grad is not None:
                back()
