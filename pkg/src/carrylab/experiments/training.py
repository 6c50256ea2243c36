"""The training protocol: epochs over all k-digit pairs, periodic evaluation.

One epoch visits every ordered pair of train_digits-digit numbers once, in
an order shuffled per epoch from the run's master seed, in batches of 32.
Every eval_interval epochs the run records train loss and exact-match
accuracy at each configured eval length; lengths beyond the train length
use a fixed seeded sample shared by all runs. A finished run carries a
generalization sweep over k = 3..10.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import time
from dataclasses import dataclass, field

import numpy as np

from ..carry import CarryTable, table_by_id
from ..errors import ConfigError, NumericError
from ..rnn import (
    CellParams,
    SequenceBatch,
    adam_init,
    adam_step,
    forward,
    init_params,
    loss_and_grads,
)
from ..rnn.cells import CELL_KINDS
from .data import all_pairs, answer_positions, build_dataset, eval_pairs
from .embeddings import Semantic, Symbolic, semantic_scheme

GENERALIZATION_KS = tuple(range(3, 11))
_EVAL_CHUNK = 2048

EMBEDDING_NAMES = ("symbolic", "semantic")


@dataclass(frozen=True)
class TrainConfig:
    base: int
    carry_id: int
    embedding: str = "symbolic"
    embedding_unit: int = 1
    cell: str = "gru"
    train_digits: int = 3
    epochs: int = 2500
    batch_size: int = 32
    lr: float = 0.05
    eval_interval: int = 10
    eval_lengths: tuple[int, ...] = (3, 6)
    eval_sample: int = 1000
    seed: int = 0

    def __post_init__(self) -> None:
        if self.embedding not in EMBEDDING_NAMES:
            raise ConfigError(f"unknown embedding {self.embedding!r}")
        if self.cell not in CELL_KINDS:
            raise ConfigError(f"unknown cell kind {self.cell!r}")
        for name in ("train_digits", "epochs", "batch_size", "eval_interval",
                     "eval_sample"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be positive")
        if self.lr <= 0:
            raise ConfigError("lr must be positive")
        object.__setattr__(self, "eval_lengths",
                           tuple(int(k) for k in self.eval_lengths))
        if any(k < 1 for k in self.eval_lengths):
            raise ConfigError("eval lengths must be positive")


def config_seed(config: TrainConfig) -> int:
    """Master seed: stable hash of the full config (which includes seed)."""
    payload = json.dumps(dataclasses.asdict(config), sort_keys=True)
    digest = hashlib.sha256(payload.encode()).digest()
    return int.from_bytes(digest[:8], "little") & (2 ** 63 - 1)


def scheme_from_config(config: TrainConfig) -> Symbolic | Semantic:
    if config.embedding == "symbolic":
        return Symbolic()
    return semantic_scheme(config.base, config.embedding_unit)


@dataclass(frozen=True)
class EvalAccuracy:
    exact: float
    per_digit: float


@dataclass(frozen=True)
class EvalRow:
    epoch: int
    train_loss: float
    train_acc: float
    test_acc: dict[int, float]


@dataclass(frozen=True)
class GeneralizationRow:
    k: int
    exact: float
    per_digit: float


@dataclass
class RunRecord:
    config: TrainConfig
    run_seed: int
    status: str  # "ok" | "aborted"
    rows: tuple[EvalRow, ...]
    generalization: tuple[GeneralizationRow, ...]
    max_test_acc: dict[int, float]
    abort: dict | None = None
    wall_seconds: float = field(default=0.0, compare=False)
    params: CellParams | None = field(default=None, compare=False, repr=False)


def _predict(params: CellParams, batch: SequenceBatch) -> np.ndarray:
    _, logits = forward(params, batch)
    return logits[:, np.asarray(batch.answer_positions), :].argmax(axis=2)


def evaluate(params: CellParams, F: CarryTable, scheme, k: int,
             sample: tuple[np.ndarray, np.ndarray]) -> EvalAccuracy:
    """Exact-match accuracy over the sample, per-digit as auxiliary."""
    ns, ms = sample
    exact = 0
    digits_right = 0
    for s in range(0, len(ns), _EVAL_CHUNK):
        batch = build_dataset(F, k, scheme, ns[s:s + _EVAL_CHUNK],
                              ms[s:s + _EVAL_CHUNK])
        pred = _predict(params, batch)
        hits = pred == batch.targets
        exact += int(hits.all(axis=1).sum())
        digits_right += int(hits.sum())
    return EvalAccuracy(exact / len(ns), digits_right / (len(ns) * k))


def _mean_loss(params: CellParams, tokens: np.ndarray, positions,
               targets: np.ndarray) -> float:
    """Answer-position cross-entropy over a dataset, chunked."""
    total = 0.0
    for s in range(0, len(tokens), _EVAL_CHUNK):
        batch = SequenceBatch(tokens[s:s + _EVAL_CHUNK], positions,
                              targets[s:s + _EVAL_CHUNK])
        _, logits = forward(params, batch)
        sel = logits[:, np.asarray(positions), :]
        shifted = sel - sel.max(axis=2, keepdims=True)
        logp = shifted - np.log(np.exp(shifted).sum(axis=2, keepdims=True))
        tg = batch.targets
        rows = np.arange(tg.shape[0]).reshape(-1, 1)
        cols = np.arange(tg.shape[1]).reshape(1, -1)
        total += float(-logp[rows, cols, tg].sum()) / tg.shape[1]
    return total / len(tokens)


def train_run(config: TrainConfig) -> RunRecord:
    F = table_by_id(config.base, config.carry_id)
    scheme = scheme_from_config(config)
    run_seed = config_seed(config)
    rng = np.random.default_rng(run_seed)
    t0 = time.monotonic()

    params = init_params(config.cell, config.base, int(rng.integers(2 ** 63)))
    state = adam_init(params, lr=config.lr)

    k = config.train_digits
    train = build_dataset(F, k, scheme, *all_pairs(config.base, k))
    positions = answer_positions(k)
    P = len(train.tokens)

    eval_sets = {}
    for length in config.eval_lengths:
        if length == k:
            eval_sets[length] = all_pairs(config.base, k)
        else:
            eval_sets[length] = eval_pairs(config.base, length,
                                           config.eval_sample)

    def eval_row(epoch: int, train_loss: float) -> EvalRow:
        accs = {length: evaluate(params, F, scheme, length, eval_sets[length])
                for length in config.eval_lengths}
        train_acc = (accs[k].exact if k in accs
                     else evaluate(params, F, scheme, k,
                                   all_pairs(config.base, k)).exact)
        return EvalRow(epoch, train_loss,
                       train_acc, {m: a.exact for m, a in accs.items()})

    rows = [eval_row(0, _mean_loss(params, train.tokens, positions,
                                   train.targets))]
    status = "ok"
    abort = None
    for epoch in range(1, config.epochs + 1):
        perm = rng.permutation(P)
        epoch_loss = 0.0
        try:
            for s in range(0, P, config.batch_size):
                idx = perm[s:s + config.batch_size]
                batch = SequenceBatch(train.tokens[idx], positions,
                                      train.targets[idx])
                loss, grads = loss_and_grads(params, batch)
                if not np.isfinite(loss):
                    raise NumericError(f"non-finite loss in epoch {epoch}")
                epoch_loss += loss * len(idx)
                params, state = adam_step(params, grads, state)
        except NumericError as exc:
            status = "aborted"
            abort = {"epoch": epoch, "step": exc.step, "message": str(exc)}
            break
        if epoch % config.eval_interval == 0:
            rows.append(eval_row(epoch, epoch_loss / P))

    generalization = ()
    if status == "ok":
        gen = []
        for gk in GENERALIZATION_KS:
            sample = (all_pairs(config.base, gk) if gk == k
                      else eval_pairs(config.base, gk, config.eval_sample))
            acc = evaluate(params, F, scheme, gk, sample)
            gen.append(GeneralizationRow(gk, acc.exact, acc.per_digit))
        generalization = tuple(gen)

    max_test = {length: max(r.test_acc[length] for r in rows)
                for length in config.eval_lengths}
    return RunRecord(
        config=config,
        run_seed=run_seed,
        status=status,
        rows=tuple(rows),
        generalization=generalization,
        max_test_acc=max_test,
        abort=abort,
        wall_seconds=time.monotonic() - t0,
        params=params,
    )
