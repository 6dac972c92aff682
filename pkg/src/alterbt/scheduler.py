"""Alternated S-Step / A-Step training and the single-phase baselines.

An S phase trains on synthetic + authentic pairs, an A phase on authentic
pairs only. Each phase runs until its dev BLEU has not exceeded the
within-phase best for ``patience`` steps, and hands its best-scoring
parameters to the next phase.
"""

from __future__ import annotations

import logging
import time
from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import Callable

import numpy as np

from .bleu import corpus_bleu
from .checkpoint import Checkpoint, make_meta
from .model import TranslationModel
from .optim import AdamState, BatchStream, LrSchedule, StepLog, train_steps
from .text import TAG, ParallelCorpus

log = logging.getLogger(__name__)

MODES = ("base", "bt", "bt-tagged", "alter", "alter-tagged")


class Phase(str, Enum):
    S = "S"
    A = "A"


@dataclass
class TrainConfig:
    batch_size: int = 32
    peak_lr: float = 1e-2
    warmup: int = 200
    eval_interval: int = 50
    patience: int = 500
    max_steps: int = 5000
    max_cycles: int = 8
    max_phases: int | None = None
    outer_delta: float = 0.1
    reset_optimizer_on_phase: bool = True
    seed: int = 0
    beam_size: int = 1
    decode_max_steps: int | None = None

    def to_dict(self) -> dict:
        return asdict(self)


class ConvergenceMonitor:
    """Patience rule on dev BLEU: a phase has converged once no evaluation
    has exceeded the phase's best score for ``patience`` steps."""

    def __init__(self, eval_interval: int, patience: int):
        if eval_interval < 1 or patience < 0:
            raise ValueError("need eval_interval >= 1 and patience >= 0")
        self.eval_interval = eval_interval
        self.patience = patience
        self.best = -np.inf
        self.steps_since_best = 0

    def update(self, bleu: float) -> bool:
        """Record one evaluation; returns True if it is a new best."""
        if bleu > self.best:
            self.best = bleu
            self.steps_since_best = 0
            return True
        self.steps_since_best += self.eval_interval
        return False

    @property
    def converged(self) -> bool:
        return self.best > -np.inf and self.steps_since_best >= self.patience


def evaluate_dev(model: TranslationModel, params: np.ndarray, dev: ParallelCorpus,
                 beam_size: int = 1, max_steps: int | None = None) -> float:
    """Corpus BLEU of decoded dev sources against their references."""
    srcs = dev.sources
    if beam_size == 1:
        hyps = model.greedy_decode_batch(params, srcs, max_steps)
    else:
        hyps = [model.beam_decode(params, s, beam_size, max_steps) for s in srcs]
    return corpus_bleu(hyps, dev.targets)


@dataclass
class PhaseRecord:
    phase: str
    cycle: int
    start_step: int
    end_step: int
    best_step: int
    best_bleu: float
    evaluations: int
    seconds: float
    converged: bool

    @property
    def label(self) -> str:
        """Name of the produced parameters, e.g. ``s1`` for the first S phase."""
        return f"{self.phase.lower()}{self.cycle + 1}"


@dataclass
class RunResult:
    mode: str
    final_params: np.ndarray
    final_bleu: float
    phases: list[PhaseRecord]
    phase_params: dict[str, np.ndarray]
    trajectory: list[Checkpoint]
    step_log: StepLog
    global_step: int

    @property
    def phase_trace(self) -> str:
        return "".join(p.phase for p in self.phases)

    def time_fractions(self) -> dict[str, float]:
        total = sum(p.seconds for p in self.phases) or 1.0
        return {ph: sum(p.seconds for p in self.phases if p.phase == ph) / total for ph in ("S", "A")}

    def summary(self) -> dict:
        return {
            "mode": self.mode,
            "final_bleu": self.final_bleu,
            "global_steps": self.global_step,
            "phase_trace": self.phase_trace,
            "phases": [dict(asdict(p), label=p.label) for p in self.phases],
            "time_fractions": self.time_fractions(),
        }


class Trainer:
    """Owns parameters, optimizer state and the global step of one run."""

    def __init__(self, model: TranslationModel, config: TrainConfig,
                 evaluator: Callable[[np.ndarray], float],
                 on_checkpoint: Callable[[Checkpoint], None] | None = None,
                 keep_params: bool = True):
        self.model = model
        self.config = config
        self.evaluator = evaluator
        self.on_checkpoint = on_checkpoint
        self.keep_params = keep_params
        self.schedule = LrSchedule(config.peak_lr, config.warmup)
        self.params = model.init_params()
        self.opt = AdamState.fresh(model.num_params)
        self.global_step = 0
        self.cycle = 0
        self.phases: list[PhaseRecord] = []
        self.phase_params: dict[str, np.ndarray] = {}
        self.trajectory: list[Checkpoint] = []
        self.step_log = StepLog()
        self.best_ever = -np.inf

    @property
    def budget_left(self) -> int:
        return self.config.max_steps - self.global_step

    def run_phase(self, phase: Phase, data: ParallelCorpus) -> np.ndarray:
        """Train from the current parameters until the phase converges.

        Returns (and installs as current) the best-scoring parameters seen
        during this phase, not the last ones.
        """
        cfg = self.config
        started = time.perf_counter()
        if cfg.reset_optimizer_on_phase:
            self.opt = AdamState.fresh(self.model.num_params)
        stream = BatchStream(data, cfg.batch_size, seed=_phase_seed(cfg.seed, len(self.phases)))
        monitor = ConvergenceMonitor(cfg.eval_interval, cfg.patience)
        start_step = self.global_step
        best_params, best_step, evals = self.params, self.global_step, 0
        while self.budget_left > 0 and not monitor.converged:
            n = min(cfg.eval_interval, self.budget_left)
            self.params, self.opt, _ = train_steps(
                self.model, self.params, self.opt, self.schedule, stream=stream, num_steps=n,
                log=self.step_log, global_step=self.global_step, phase=phase.value,
            )
            self.global_step += n
            bleu = float(self.evaluator(self.params))
            evals += 1
            self._record(phase, bleu)
            if monitor.update(bleu):
                best_params, best_step = self.params.copy(), self.global_step
        record = PhaseRecord(
            phase.value, self.cycle, start_step, self.global_step, best_step,
            float(monitor.best) if evals else float("nan"), evals,
            time.perf_counter() - started, monitor.converged,
        )
        self.phases.append(record)
        self.phase_params[record.label] = best_params
        if evals:
            self.best_ever = max(self.best_ever, monitor.best)
        log.info("phase %s cycle %d: steps %d-%d best %.2f at %d", phase.value, self.cycle,
                 start_step, self.global_step, record.best_bleu, best_step)
        self.params = best_params.copy()
        return best_params

    def _record(self, phase: Phase, bleu: float) -> None:
        meta = make_meta(self.global_step, self.cycle, phase.value, bleu, self.model.config.layout_hash())
        ckpt = Checkpoint(self.params.copy() if self.keep_params else np.empty(0), meta)
        if self.keep_params:
            self.trajectory.append(ckpt)
        if self.on_checkpoint is not None:
            self.on_checkpoint(Checkpoint(self.params, meta))


def _phase_seed(seed: int, phase_index: int) -> int:
    return int(np.random.SeedSequence([seed % 2**64, phase_index]).generate_state(1)[0])


def mixed_corpus(authentic: ParallelCorpus, synthetic: ParallelCorpus) -> ParallelCorpus:
    """D_s followed by D_a; the batch stream shuffles them uniformly."""
    return synthetic + authentic


def check_untagged(authentic: ParallelCorpus) -> None:
    for i, (src, _) in enumerate(authentic):
        if TAG in src:
            raise ValueError(f"authentic source {i} contains the synthetic-data tag")


def run_training(mode: str, model: TranslationModel, config: TrainConfig,
                 authentic: ParallelCorpus, synthetic: ParallelCorpus | None,
                 evaluator: Callable[[np.ndarray], float],
                 on_checkpoint: Callable[[Checkpoint], None] | None = None,
                 keep_params: bool = True) -> RunResult:
    """Train under one of the five modes and return the final parameters.

    ``base`` is a single A phase, ``bt``/``bt-tagged`` a single S phase, and
    ``alter``/``alter-tagged`` alternate S and A phases until a full cycle
    improves the best dev BLEU by no more than ``outer_delta``, the step
    budget runs out, or ``max_cycles`` cycles have run. The alternated result
    is the parameters of the last completed A phase (the S result if the
    budget ends before any A phase).
    """
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")
    if mode != "base" and synthetic is None:
        raise ValueError(f"mode {mode} needs a synthetic corpus")
    check_untagged(authentic)
    trainer = Trainer(model, config, evaluator, on_checkpoint, keep_params)
    init = trainer.params.copy()

    if mode == "base":
        final = trainer.run_phase(Phase.A, authentic)
    elif mode in ("bt", "bt-tagged"):
        final = trainer.run_phase(Phase.S, mixed_corpus(authentic, synthetic))
    else:
        mixed = mixed_corpus(authentic, synthetic)
        final = None
        max_phases = config.max_phases if config.max_phases is not None else 2 * config.max_cycles
        while trainer.cycle < config.max_cycles and trainer.budget_left > 0:
            before = trainer.best_ever
            trainer.run_phase(Phase.S, mixed)
            if len(trainer.phases) >= max_phases or trainer.budget_left <= 0:
                break
            final = trainer.run_phase(Phase.A, authentic)
            trainer.cycle += 1
            if len(trainer.phases) >= max_phases or trainer.best_ever - before <= config.outer_delta:
                break
        if final is None:
            # the budget ran out before any A phase: fall back to the S result
            final = trainer.phase_params[trainer.phases[-1].label] if trainer.phases else init

    final_bleu = _bleu_of(trainer, final, evaluator)
    return RunResult(mode, final, final_bleu, trainer.phases, trainer.phase_params,
                     trainer.trajectory, trainer.step_log, trainer.global_step)


def _bleu_of(trainer: Trainer, params: np.ndarray, evaluator) -> float:
    for rec in reversed(trainer.phases):
        if trainer.phase_params.get(rec.label) is params and not np.isnan(rec.best_bleu):
            return rec.best_bleu
    return float(evaluator(params))
