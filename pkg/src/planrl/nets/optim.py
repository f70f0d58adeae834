"""Adaptive-moment gradient steps with bias correction."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .mlp import Mlp


@dataclass
class AdamState:
    lr: float
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m_w: list = field(default_factory=list)
    v_w: list = field(default_factory=list)
    m_b: list = field(default_factory=list)
    v_b: list = field(default_factory=list)


def adam_init(net: Mlp, lr: float) -> AdamState:
    st = AdamState(lr=lr)
    for w, b in zip(net.weights, net.biases):
        st.m_w.append(np.zeros_like(w))
        st.v_w.append(np.zeros_like(w))
        st.m_b.append(np.zeros_like(b))
        st.v_b.append(np.zeros_like(b))
    return st


def _update(p, g, m, v, st: AdamState, c1: float, c2: float) -> None:
    m *= st.beta1
    m += (1.0 - st.beta1) * g
    v *= st.beta2
    v += (1.0 - st.beta2) * g * g
    p -= st.lr * (m / c1) / (np.sqrt(v / c2) + st.eps)


def adam_step(net: Mlp, d_w, d_b, st: AdamState) -> Mlp:
    """One optimizer step; mutates net and st, returns net.

    Non-finite gradients abort rather than poisoning the moments.
    """
    for g in (*d_w, *d_b):
        if not np.isfinite(g).all():
            raise ValueError("non-finite gradient passed to adam_step")
    st.step += 1
    c1 = 1.0 - st.beta1 ** st.step
    c2 = 1.0 - st.beta2 ** st.step
    for i, (w, b) in enumerate(zip(net.weights, net.biases)):
        _update(w, d_w[i], st.m_w[i], st.v_w[i], st, c1, c2)
        _update(b, d_b[i], st.m_b[i], st.v_b[i], st, c1, c2)
    return net
