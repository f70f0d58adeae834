"""Plain fully connected networks with hand-written reverse mode.

Hidden layers are rectified; the head is either linear or tanh. Parameters
are float64 throughout, which keeps finite-difference checks tight and
training runs bit-reproducible across platforms with the same BLAS.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class Mlp:
    sizes: list                    # layer widths, input first
    weights: list = field(default_factory=list)   # per layer, (n_in, n_out)
    biases: list = field(default_factory=list)
    output_activation: str = "identity"           # "identity" or "tanh"


def init_mlp(sizes, output_activation: str, rng: np.random.Generator,
             final_scale: float = 1.0) -> Mlp:
    """Uniform fan-in initialization; the last layer can be shrunk so that
    a fresh tanh policy starts near zero action."""
    if output_activation not in ("identity", "tanh"):
        raise ValueError(f"unknown output activation {output_activation!r}")
    net = Mlp(sizes=list(sizes), output_activation=output_activation)
    for i, (n_in, n_out) in enumerate(zip(sizes[:-1], sizes[1:])):
        bound = 1.0 / np.sqrt(n_in)
        w = rng.uniform(-bound, bound, size=(n_in, n_out))
        b = rng.uniform(-bound, bound, size=n_out)
        if i == len(sizes) - 2:
            w *= final_scale
            b *= final_scale
        net.weights.append(w)
        net.biases.append(b)
    return net


def clone_mlp(net: Mlp) -> Mlp:
    return Mlp(sizes=list(net.sizes),
               weights=[w.copy() for w in net.weights],
               biases=[b.copy() for b in net.biases],
               output_activation=net.output_activation)


def _check_input(net: Mlp, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != net.sizes[0]:
        raise ValueError(
            f"input width {x.shape[-1]} does not match net input "
            f"{net.sizes[0]}")
    return x


def forward(net: Mlp, x: np.ndarray) -> np.ndarray:
    """Deterministic forward pass; accepts (d,) or (B, d)."""
    x = _check_input(net, x)
    one = x.ndim == 1
    h = x[None, :] if one else x
    last = len(net.weights) - 1
    for i, (w, b) in enumerate(zip(net.weights, net.biases)):
        h = h @ w + b
        if i < last:
            h = np.maximum(h, 0.0)
        elif net.output_activation == "tanh":
            h = np.tanh(h)
    return h[0] if one else h


def forward_cache(net: Mlp, x: np.ndarray):
    """Forward pass that keeps every layer input for the backward sweep."""
    x = _check_input(net, x)
    h = np.atleast_2d(x)
    acts = [h]
    last = len(net.weights) - 1
    for i, (w, b) in enumerate(zip(net.weights, net.biases)):
        h = h @ w + b
        if i < last:
            h = np.maximum(h, 0.0)
        elif net.output_activation == "tanh":
            h = np.tanh(h)
        acts.append(h)
    return acts[-1], acts


def backward(net: Mlp, acts, upstream: np.ndarray):
    """Reverse-mode gradients from cached activations.

    upstream is d(loss)/d(output), shape matching the output. Returns
    (weight grads, bias grads, input grad); gradients are summed over the
    batch axis, the input grad keeps it.
    """
    g = np.atleast_2d(np.asarray(upstream, dtype=float))
    if g.shape != acts[-1].shape:
        raise ValueError(
            f"upstream gradient shape {g.shape} does not match output "
            f"{acts[-1].shape}")
    if net.output_activation == "tanh":
        g = g * (1.0 - acts[-1] ** 2)
    d_w = [None] * len(net.weights)
    d_b = [None] * len(net.weights)
    for i in range(len(net.weights) - 1, -1, -1):
        d_w[i] = acts[i].T @ g
        d_b[i] = g.sum(axis=0)
        g = g @ net.weights[i].T
        if i > 0:
            g = g * (acts[i] > 0.0)
    return d_w, d_b, g


def polyak_blend(target: Mlp, online: Mlp, tau: float) -> Mlp:
    """target <- tau*online + (1 - tau)*target, elementwise, in place."""
    if target.sizes != online.sizes \
            or target.output_activation != online.output_activation:
        raise ValueError("polyak blend requires identical architectures")
    for tw, ow in zip(target.weights, online.weights):
        tw *= 1.0 - tau
        tw += tau * ow
    for tb, ob in zip(target.biases, online.biases):
        tb *= 1.0 - tau
        tb += tau * ob
    return target
