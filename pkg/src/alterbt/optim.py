"""Adam with an inverse-square-root warmup schedule, and the minibatch loop."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .text import ParallelCorpus


@dataclass(frozen=True)
class AdamState:
    m: np.ndarray
    v: np.ndarray
    step: int = 0
    beta1: float = 0.9
    beta2: float = 0.98
    eps: float = 1e-9

    @classmethod
    def fresh(cls, n: int, **hyper) -> "AdamState":
        return cls(np.zeros(n), np.zeros(n), 0, **hyper)


def adam_step(state: AdamState, params: np.ndarray, grad: np.ndarray, lr: float):
    """One bias-corrected Adam update. Returns ``(new_state, new_params)``."""
    if not (params.shape == grad.shape == state.m.shape):
        raise ValueError("params, grad and optimizer state must have equal length")
    if lr <= 0:
        raise ValueError("lr must be positive")
    if not np.all(np.isfinite(grad)):
        raise FloatingPointError("non-finite gradient")
    b1, b2 = state.beta1, state.beta2
    t = state.step + 1
    m = b1 * state.m + (1.0 - b1) * grad
    v = b2 * state.v + (1.0 - b2) * (grad * grad)
    m_hat = m / (1.0 - b1**t)
    v_hat = v / (1.0 - b2**t)
    new_params = params - lr * m_hat / (np.sqrt(v_hat) + state.eps)
    return replace(state, m=m, v=v, step=t), new_params


@dataclass(frozen=True)
class LrSchedule:
    peak_lr: float = 7e-4
    warmup: int = 200

    def __call__(self, step: int) -> float:
        return lr_at(self, step)


def lr_at(schedule: LrSchedule, step: int) -> float:
    if step < 1:
        raise ValueError("step must be >= 1")
    w = schedule.warmup
    return schedule.peak_lr * min(step / w, math.sqrt(w / step))


@dataclass
class StepLog:
    records: list[dict] = field(default_factory=list)

    def append(self, step: int, loss: float, lr: float, **extra) -> None:
        self.records.append({"step": step, "loss": loss, "lr": lr, **extra})

    def __len__(self) -> int:
        return len(self.records)


class BatchStream:
    """Endless minibatches from a corpus, reshuffled each epoch with seed ``(seed, epoch)``."""

    def __init__(self, corpus: ParallelCorpus, batch_size: int, seed: int):
        if batch_size < 1:
            raise ValueError("batch_size must be positive")
        self.corpus = corpus
        self.batch_size = min(batch_size, len(corpus))
        self.seed = seed
        self.epoch = 0
        self._order = self._shuffle()
        self._pos = 0

    def _shuffle(self) -> np.ndarray:
        return np.random.default_rng([self.seed % 2**64, self.epoch]).permutation(len(self.corpus))

    def next(self) -> list:
        if self._pos + self.batch_size > len(self._order):
            self.epoch += 1
            self._order = self._shuffle()
            self._pos = 0
        idx = self._order[self._pos:self._pos + self.batch_size]
        self._pos += self.batch_size
        pairs = self.corpus.pairs
        return [pairs[i] for i in idx]


def train_steps(model, params, state, schedule, corpus=None, batch_size=32, num_steps=0,
                seed=0, stream: BatchStream | None = None, log: StepLog | None = None,
                global_step: int = 0, phase: str | None = None):
    """Run ``num_steps`` Adam updates on minibatches of ``corpus``.

    Pass a ``stream`` to continue an existing batch order across calls.
    Returns ``(params, state, log)``.
    """
    if stream is None:
        if corpus is None:
            raise ValueError("need a corpus or a batch stream")
        stream = BatchStream(corpus, batch_size, seed)
    log = StepLog() if log is None else log
    for i in range(num_steps):
        loss, grad = model.loss_and_grad(params, stream.next())
        lr = lr_at(schedule, state.step + 1)
        state, params = adam_step(state, params, grad, lr)
        extra = {"phase": phase} if phase is not None else {}
        log.append(global_step + i + 1, loss, lr, **extra)
    return params, state, log
