"""Minimal recurrent cells trained by backpropagation through time.

GRU and LSTM cells of width b, a per-step linear decoder, answer-position
cross-entropy, analytic BPTT gradients, and Adam. Hot loops run in a
compiled extension when available and in numpy otherwise; the active
backend is reported by kernel_backend().
"""

from ._dispatch import KERNEL_BACKEND
from .cells import (
    CELL_KINDS,
    CellParams,
    SequenceBatch,
    forward,
    init_params,
    loss_and_grads,
    param_names,
    params_from_json,
    params_to_json,
)
from .optim import AdamState, adam_init, adam_step

__all__ = [
    "AdamState",
    "CELL_KINDS",
    "CellParams",
    "SequenceBatch",
    "adam_init",
    "adam_step",
    "forward",
    "init_params",
    "kernel_backend",
    "loss_and_grads",
    "param_names",
    "params_from_json",
    "params_to_json",
]


def kernel_backend() -> str:
    """'cython' when the compiled kernels are in use, else 'python'."""
    return KERNEL_BACKEND
