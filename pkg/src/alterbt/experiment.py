"""End-to-end desk experiments on the toy task: data, back-translation, training, sweeps."""

from __future__ import annotations

import csv
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import config as C
from .backtranslation import DecodeConfig, build_synthetic_corpus, synthesize, train_backward
from .model import TranslationModel
from .scheduler import RunResult, evaluate_dev, run_training
from .taskgen import TaskSpec, sample_dev, sample_monolingual, sample_parallel
from .text import MonolingualCorpus, ParallelCorpus, Sentence, Vocabulary

log = logging.getLogger(__name__)


def derived_seed(seed: int, purpose: str) -> int:
    tag = int.from_bytes(purpose.encode(), "little")
    return int(np.random.SeedSequence([seed % 2**64, tag]).generate_state(1, dtype=np.uint64)[0])


@dataclass
class ToyTask:
    spec: TaskSpec
    vocab: Vocabulary
    authentic: ParallelCorpus
    dev: ParallelCorpus
    backward_params: np.ndarray | None = None
    backward_bleu: float | None = None
    _mono: MonolingualCorpus | None = None
    _sources: list[Sentence] = field(default_factory=list)


def prepare_task(cfg: dict, seed: int) -> ToyTask:
    spec = C.task_spec(cfg, seed)
    data = cfg["data"]
    return ToyTask(spec, spec.vocabulary(), sample_parallel(data["n_authentic"], spec), sample_dev(data["n_dev"], spec))


def forward_model(cfg: dict, task: ToyTask, seed: int) -> TranslationModel:
    return TranslationModel(C.model_config(cfg, len(task.vocab), seed))


def fit_backward(cfg: dict, task: ToyTask, seed: int) -> None:
    """Train the target-to-source model on the first ``n_backward`` authentic pairs."""
    model = TranslationModel(C.model_config(cfg, len(task.vocab), derived_seed(seed, "backward")))
    tc = C.train_config(cfg, derived_seed(seed, "backward"))
    subset = task.authentic[: cfg["data"]["n_backward"]]
    task.backward_params, task.backward_bleu = train_backward(subset, task.dev, model, tc)
    log.info("seed %d: backward dev BLEU %.2f", seed, task.backward_bleu)


def synthetic_corpus(cfg: dict, task: ToyTask, size: int, tagged: bool, seed: int) -> ParallelCorpus:
    """Back-translated corpus of ``size`` pairs.

    Monolingual sampling and decoding are both prefix-stable, so the largest
    request is decoded once and smaller ones are slices of it.
    """
    if task.backward_params is None:
        fit_backward(cfg, task, seed)
    if task._mono is None or len(task._mono) < size:
        task._mono = sample_monolingual(size, task.spec)
        model = TranslationModel(C.model_config(cfg, len(task.vocab), derived_seed(seed, "backward")))
        task._sources = synthesize(model, task.backward_params, task._mono,
                                   DecodeConfig(max_steps=cfg["train"]["decode_max_steps"]))
    return build_synthetic_corpus(task._sources[:size], task._mono[:size], tagged)


def train_mode(cfg: dict, task: ToyTask, mode: str, synthetic: ParallelCorpus | None, seed: int,
               keep_params: bool = False, on_checkpoint=None) -> RunResult:
    model = forward_model(cfg, task, seed)
    tc = C.train_config(cfg, seed)
    evaluator = lambda p: evaluate_dev(model, p, task.dev, tc.beam_size, tc.decode_max_steps)
    return run_training(mode, model, tc, task.authentic, synthetic, evaluator,
                        on_checkpoint=on_checkpoint, keep_params=keep_params)


@dataclass
class SweepRow:
    ratio: int
    mode: str
    seed: int
    bleu: float
    steps: int
    phases: str
    seconds: float


def run_sweep(cfg: dict, ratios=None, modes=None, seeds=None, out_dir: str | Path | None = None) -> list[SweepRow]:
    """Final dev BLEU per (ratio, mode, seed); ratio is synthetic pairs per authentic pair."""
    sweep = cfg["sweep"]
    ratios = list(ratios or sweep["ratios"])
    modes = list(modes or sweep["modes"])
    seeds = list(seeds if seeds is not None else sweep["seeds"])
    rows: list[SweepRow] = []
    n_auth = cfg["data"]["n_authentic"]
    for seed in seeds:
        task = prepare_task(cfg, seed)
        for ratio in ratios:
            for mode in modes:
                synthetic = None
                if mode != "base":
                    synthetic = synthetic_corpus(cfg, task, ratio * n_auth, mode.endswith("tagged"), seed)
                started = time.perf_counter()
                result = train_mode(cfg, task, mode, synthetic, seed)
                row = SweepRow(ratio, mode, seed, result.final_bleu, result.global_step,
                               result.phase_trace, time.perf_counter() - started)
                log.info("ratio %d %-12s seed %d: BLEU %.2f (%s, %d steps, %.0fs)",
                         ratio, mode, seed, row.bleu, row.phases, row.steps, row.seconds)
                rows.append(row)
    if out_dir is not None:
        write_sweep(rows, out_dir)
    return rows


def mean_bleu(rows: list[SweepRow], ratio: int, mode: str) -> float:
    vals = [r.bleu for r in rows if r.ratio == ratio and r.mode == mode]
    return float(np.mean(vals)) if vals else float("nan")


def summary_table(rows: list[SweepRow]) -> str:
    ratios = sorted({r.ratio for r in rows})
    modes = list(dict.fromkeys(r.mode for r in rows))
    lines = ["ratio  " + "  ".join(f"{m:>12}" for m in modes)]
    for ratio in ratios:
        lines.append(f"{ratio:>5}  " + "  ".join(f"{mean_bleu(rows, ratio, m):12.2f}" for m in modes))
    return "\n".join(lines)


def write_sweep(rows: list[SweepRow], out_dir: str | Path) -> None:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "sweep.csv", "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["ratio", "mode", "seed", "final_dev_bleu", "steps", "phases", "seconds"])
        for r in rows:
            w.writerow([r.ratio, r.mode, r.seed, f"{r.bleu:.6f}", r.steps, r.phases, f"{r.seconds:.1f}"])
    (out_dir / "summary.txt").write_text(summary_table(rows) + "\n", encoding="utf-8")
