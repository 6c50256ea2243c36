"""Adam with bias correction, functional style: steps return fresh state."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .cells import CellParams


@dataclass
class AdamState:
    m: dict[str, np.ndarray]
    v: dict[str, np.ndarray]
    step: int = 0
    lr: float = 0.05
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    def __post_init__(self) -> None:
        if self.step < 0:
            raise ValueError("step must be >= 0")


def adam_init(params: CellParams, lr: float = 0.05, beta1: float = 0.9,
              beta2: float = 0.999, eps: float = 1e-8) -> AdamState:
    zeros = lambda: {k: np.zeros_like(a) for k, a in params.arrays.items()}
    return AdamState(m=zeros(), v=zeros(), step=0,
                     lr=lr, beta1=beta1, beta2=beta2, eps=eps)


def adam_step(params: CellParams, grads: dict[str, np.ndarray],
              state: AdamState) -> tuple[CellParams, AdamState]:
    if set(grads) != set(params.arrays):
        raise ValueError("gradient keys do not match parameter keys")
    t = state.step + 1
    b1c = 1.0 - state.beta1 ** t
    b2c = 1.0 - state.beta2 ** t
    new_arrays = {}
    new_m = {}
    new_v = {}
    for k, p in params.arrays.items():
        g = grads[k]
        if g.shape != p.shape:
            raise ValueError(f"gradient {k} has shape {g.shape}, expected {p.shape}")
        m = state.beta1 * state.m[k] + (1.0 - state.beta1) * g
        v = state.beta2 * state.v[k] + (1.0 - state.beta2) * (g * g)
        new_m[k] = m
        new_v[k] = v
        new_arrays[k] = p - state.lr * (m / b1c) / (np.sqrt(v / b2c) + state.eps)
    new_params = CellParams(params.kind, params.b, new_arrays)
    new_state = AdamState(m=new_m, v=new_v, step=t, lr=state.lr,
                          beta1=state.beta1, beta2=state.beta2, eps=state.eps)
    return new_params, new_state
