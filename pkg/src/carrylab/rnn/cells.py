"""Recurrent cells of width b with a linear decoder.

The GRU uses the original formulation (reset gate applied inside the
hidden-to-candidate product):

    z_t = logistic(W_z x_t + U_z h_{t-1} + b_z)
    r_t = logistic(W_r x_t + U_r h_{t-1} + b_r)
    hhat_t = tanh(W_h x_t + U_h (r_t * h_{t-1}) + b_h)
    h_t = (1 - z_t) * h_{t-1} + z_t * hhat_t

The LSTM is the standard forget/input/output-gate cell. Both feed a linear
decoder logits_t = W h_t + b at every step, h_0 = 0, all double precision.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import NumericError
from ..modnum import Base, as_base
from ._dispatch import kernels

GRU_PARAM_NAMES = ("wz", "uz", "bz", "wr", "ur", "br", "wh", "uh", "bh",
                   "dec_w", "dec_b")
LSTM_PARAM_NAMES = ("wi", "ui", "bi", "wf", "uf", "bf", "wo", "uo", "bo",
                    "wg", "ug", "bg", "dec_w", "dec_b")
CELL_KINDS = ("gru", "lstm")


def param_names(kind: str) -> tuple[str, ...]:
    if kind == "gru":
        return GRU_PARAM_NAMES
    if kind == "lstm":
        return LSTM_PARAM_NAMES
    raise ValueError(f"unknown cell kind {kind!r}")


def _param_shape(name: str, b: int) -> tuple[int, ...]:
    if name == "dec_b" or (name[0] == "b" and name != "dec_b"):
        return (b,)
    return (b, b)


@dataclass
class CellParams:
    """All weights of one cell + decoder, keyed by canonical names."""

    kind: str
    b: int
    arrays: dict[str, np.ndarray]

    def __post_init__(self) -> None:
        names = param_names(self.kind)
        if set(self.arrays) != set(names):
            raise ValueError(
                f"expected parameters {sorted(names)}, got {sorted(self.arrays)}")
        for name in names:
            a = np.ascontiguousarray(self.arrays[name], dtype=np.float64)
            want = _param_shape(name, self.b)
            if a.shape != want:
                raise ValueError(f"{name} has shape {a.shape}, expected {want}")
            if not np.isfinite(a).all():
                raise ValueError(f"{name} contains non-finite values")
            self.arrays[name] = a

    def copy(self) -> "CellParams":
        return CellParams(self.kind, self.b,
                          {k: v.copy() for k, v in self.arrays.items()})

    def count(self) -> int:
        return sum(v.size for v in self.arrays.values())


def init_params(kind: str, base: Base | int, seed: int) -> CellParams:
    """Draw every weight uniform in [-1/sqrt(b), +1/sqrt(b)], seeded."""
    b = as_base(base).b
    rng = np.random.default_rng(seed)
    scale = 1.0 / np.sqrt(b)
    arrays = {name: rng.uniform(-scale, scale, _param_shape(name, b))
              for name in param_names(kind)}
    return CellParams(kind, b, arrays)


@dataclass
class SequenceBatch:
    """A batch of token sequences with targets at marked answer positions.

    tokens is (batch, time, b); targets is (batch, len(answer_positions))
    holding the digit expected at each marked step, in position order.
    """

    tokens: np.ndarray
    answer_positions: tuple[int, ...]
    targets: np.ndarray

    def __post_init__(self) -> None:
        self.tokens = np.ascontiguousarray(self.tokens, dtype=np.float64)
        self.targets = np.ascontiguousarray(self.targets, dtype=np.int64)
        if self.tokens.ndim != 3:
            raise ValueError("tokens must be (batch, time, width)")
        B, T, _ = self.tokens.shape
        self.answer_positions = tuple(int(p) for p in self.answer_positions)
        if any(not 0 <= p < T for p in self.answer_positions):
            raise ValueError("answer position out of sequence range")
        if self.targets.shape != (B, len(self.answer_positions)):
            raise ValueError("need exactly one target per answer position")


def _run_forward(params: CellParams, batch: SequenceBatch):
    if batch.tokens.shape[2] != params.b:
        raise ValueError(
            f"token width {batch.tokens.shape[2]} != cell width {params.b}")
    x = np.ascontiguousarray(batch.tokens.transpose(1, 0, 2))
    fwd = kernels.gru_forward if params.kind == "gru" else kernels.lstm_forward
    logits, cache = fwd(params.arrays, x)
    h = cache["hs"][1:]
    if not np.isfinite(h).all():
        bad = np.flatnonzero(~np.isfinite(h).all(axis=(1, 2)))
        step = int(bad[0])
        raise NumericError(f"non-finite hidden state at step {step}", step=step)
    return x, logits, cache


def forward(params: CellParams, batch: SequenceBatch):
    """Hidden states and logits per step, each (batch, time, b)."""
    _, logits, cache = _run_forward(params, batch)
    hidden = np.ascontiguousarray(cache["hs"][1:].transpose(1, 0, 2))
    return hidden, np.ascontiguousarray(logits.transpose(1, 0, 2))


def loss_and_grads(params: CellParams, batch: SequenceBatch):
    """Mean answer-position cross-entropy and its full BPTT gradient."""
    x, logits, cache = _run_forward(params, batch)
    B = batch.tokens.shape[0]
    ans = np.asarray(batch.answer_positions, dtype=np.intp)

    sel = logits[ans]                        # (A, B, b)
    shifted = sel - sel.max(axis=2, keepdims=True)
    expo = np.exp(shifted)
    probs = expo / expo.sum(axis=2, keepdims=True)
    tgt = batch.targets.T                    # (A, B)
    a_idx = np.arange(len(ans)).reshape(-1, 1)
    b_idx = np.arange(B).reshape(1, -1)
    logp = shifted - np.log(expo.sum(axis=2, keepdims=True))
    loss = float(-logp[a_idx, b_idx, tgt].mean())

    dsel = probs.copy()
    dsel[a_idx, b_idx, tgt] -= 1.0
    dsel /= len(ans) * B
    dlogits = np.zeros_like(logits)
    dlogits[ans] = dsel

    bwd = kernels.gru_backward if params.kind == "gru" else kernels.lstm_backward
    grads = bwd(params.arrays, x, cache, dlogits)
    return loss, grads


def params_to_json(params: CellParams) -> dict:
    """Flat JSON-ready record: kind, width, shapes, row-major values."""
    return {
        "kind": params.kind,
        "b": params.b,
        "arrays": {
            name: {"shape": list(a.shape), "data": a.ravel().tolist()}
            for name, a in params.arrays.items()
        },
    }


def params_from_json(record: dict) -> CellParams:
    arrays = {
        name: np.array(entry["data"], dtype=np.float64).reshape(entry["shape"])
        for name, entry in record["arrays"].items()
    }
    return CellParams(record["kind"], int(record["b"]), arrays)
