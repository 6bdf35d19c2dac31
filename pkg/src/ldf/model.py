"""Toy two-branch feature interaction network.

A four-stage stride-2 encoder feeds per-level body and detail squeeze
convolutions. Each branch has its own top-down decoder. The saliency head
reads the concatenated finest decoder features. On refinement passes an
interaction encoder re-encodes that concatenation into one feature per
level, adapts it separately for each branch with a 3x3 conv, and adds it to
the squeezed features before both decoders run again. The interaction
encoder is shared by all refinement passes.
"""
from dataclasses import dataclass

import numpy as np

from .nn import Node, Tape, to_nhwc_weights

LEVELS = 4


@dataclass
class ForwardOutputs:
    """One ``(body, detail, sal)`` triple of ``(N, 1, S, S)`` probability
    maps per pass, plus what :func:`backward` needs."""

    passes: list
    tape: Tape = None
    params: dict = None
    nodes: list = None


class ToyFinModel:
    def __init__(self, widths=(8, 16, 32, 32), squeeze=8, n_interactions=1, seed=0):
        if len(widths) != LEVELS:
            raise ValueError(f"need {LEVELS} encoder widths")
        if n_interactions < 0:
            raise ValueError("n_interactions must be >= 0")
        self.widths = tuple(int(w) for w in widths)
        self.squeeze = int(squeeze)
        self.n_interactions = int(n_interactions)
        self.params = {}
        rng = np.random.default_rng(seed)
        for name, shape in self.param_shapes():
            out, cin, k, _ = shape
            bound = np.sqrt(1.0 / (cin * k * k))
            self.params[name + ".w"] = rng.uniform(-bound, bound, shape)
            self.params[name + ".b"] = rng.uniform(-bound, bound, out)

    def param_shapes(self):
        s = self.squeeze
        shapes = []
        cin = 1
        for i, c in enumerate(self.widths, 1):
            shapes.append((f"enc{i}", (c, cin, 3, 3)))
            cin = c
        for branch in ("body", "detail"):
            for i, c in enumerate(self.widths, 1):
                shapes.append((f"{branch}.squeeze{i}", (s, c, 3, 3)))
            for i in range(1, LEVELS + 1):
                shapes.append((f"{branch}.dec{i}", (s, s, 3, 3)))
            shapes.append((f"{branch}.head", (1, s, 1, 1)))
        shapes.append(("sal.conv", (s, 2 * s, 3, 3)))
        shapes.append(("sal.head", (1, s, 1, 1)))
        shapes.append(("inter1", (s, 2 * s, 3, 3)))
        for i in range(2, LEVELS + 1):
            shapes.append((f"inter{i}", (s, s, 3, 3)))
        for branch in ("body", "detail"):
            for i in range(1, LEVELS + 1):
                shapes.append((f"{branch}.adapt{i}", (s, s, 3, 3)))
        return shapes

    def n_parameters(self):
        return sum(p.size for p in self.params.values())

    def copy(self):
        other = ToyFinModel.__new__(ToyFinModel)
        other.widths = self.widths
        other.squeeze = self.squeeze
        other.n_interactions = self.n_interactions
        other.params = {k: v.copy() for k, v in self.params.items()}
        return other


def _decode(t, p, branch, feats):
    d = t.silu(t.conv(feats[-1], *p[f"{branch}.dec{LEVELS}"]))
    for i in range(LEVELS - 1, 0, -1):
        x = t.add(feats[i - 1], t.upsample(d))
        d = t.silu(t.conv(x, *p[f"{branch}.dec{i}"]))
    return d


def _heads(t, p, db, dd):
    body = t.upsample(t.conv(db, *p["body.head"]))
    detail = t.upsample(t.conv(dd, *p["detail.head"]))
    s = t.silu(t.conv(t.concat(db, dd), *p["sal.conv"]))
    sal = t.upsample(t.conv(s, *p["sal.head"]))
    return body, detail, sal


def forward(model, images):
    """Run all passes on ``images`` of shape ``(N, 1, S, S)``, ``S % 16 == 0``.

    The returned outputs keep the tape so gradients can be pulled back with
    :func:`backward`.
    """
    images = np.asarray(images, dtype=np.float64)
    if images.ndim != 4 or images.shape[1] != 1:
        raise ValueError(f"expected (N, 1, S, S) input, got {images.shape}")
    side = images.shape[2]
    if images.shape[3] != side or side % 16 or side == 0:
        raise ValueError("input must be square with side divisible by 16")

    t = Tape()
    nodes = {k: Node(to_nhwc_weights(v) if k.endswith(".w") else v)
             for k, v in model.params.items()}
    p = {}
    for k in nodes:
        name = k[:-2]
        p.setdefault(name, (nodes[name + ".w"], nodes[name + ".b"]))

    x = Node(images.transpose(0, 2, 3, 1))
    enc = []
    for i in range(1, LEVELS + 1):
        x = t.silu(t.conv(x, *p[f"enc{i}"], stride=2))
        enc.append(x)
    base = {
        branch: [t.silu(t.conv(f, *p[f"{branch}.squeeze{i}"]))
                 for i, f in enumerate(enc, 1)]
        for branch in ("body", "detail")
    }

    passes, out_nodes = [], []
    db = _decode(t, p, "body", base["body"])
    dd = _decode(t, p, "detail", base["detail"])
    for k in range(model.n_interactions + 1):
        if k > 0:
            y = t.silu(t.conv(t.concat(db, dd), *p["inter1"]))
            inter = [y]
            for i in range(2, LEVELS + 1):
                y = t.silu(t.conv(y, *p[f"inter{i}"], stride=2))
                inter.append(y)
            fused = {
                branch: [t.add(b, t.conv(f, *p[f"{branch}.adapt{i}"]))
                         for i, (b, f) in enumerate(zip(base[branch], inter), 1)]
                for branch in ("body", "detail")
            }
            db = _decode(t, p, "body", fused["body"])
            dd = _decode(t, p, "detail", fused["detail"])
        probs = tuple(t.sigmoid(h) for h in _heads(t, p, db, dd))
        out_nodes.append(probs)
        # single channel: NHWC and NCHW share the same memory order
        passes.append(tuple(n.value.reshape(images.shape) for n in probs))
    return ForwardOutputs(passes=passes, tape=t, params=nodes, nodes=out_nodes)


def backward(outputs, grads):
    """Parameter gradients given d(loss)/d(probability) for every output.

    ``grads`` mirrors ``outputs.passes``: one ``(body, detail, sal)`` triple
    per pass.
    """
    for nodes, gs in zip(outputs.nodes, grads):
        for node, g in zip(nodes, gs):
            node.accumulate(np.reshape(g, node.value.shape))
    outputs.tape.backward()
    grads = {}
    for k, n in outputs.params.items():
        g = n.grad if n.grad is not None else np.zeros_like(n.value)
        grads[k] = g.transpose(3, 2, 0, 1) if k.endswith(".w") else g
    return grads


def predict(model, images):
    """Probability maps from the final pass, as numpy arrays."""
    return forward(model, images).passes[-1]
