"""Synthetic corpus construction: backward model, decoding of monolingual text, pairing."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from .model import TranslationModel
from .scheduler import Phase, Trainer, TrainConfig, evaluate_dev
from .text import UNK, MonolingualCorpus, ParallelCorpus, Sentence, prepend_tag


@dataclass(frozen=True)
class DecodeConfig:
    beam_size: int = 1
    max_steps: int | None = None
    batch_size: int = 256


def train_backward(authentic: ParallelCorpus, dev: ParallelCorpus, model: TranslationModel,
                   config: TrainConfig) -> tuple[np.ndarray, float]:
    """Train a target-to-source model on the swapped authentic corpus.

    Early stopping uses the swapped dev set. Returns the best parameters
    and their dev BLEU (target to source).
    """
    swapped_dev = dev.swapped()
    trainer = Trainer(model, config, lambda p: evaluate_dev(model, p, swapped_dev, max_steps=config.decode_max_steps),
                      keep_params=False)
    params = trainer.run_phase(Phase.A, authentic.swapped())
    return params, trainer.phases[-1].best_bleu


def synthesize(model: TranslationModel, backward: np.ndarray, mono: MonolingualCorpus,
               decode: DecodeConfig = DecodeConfig()) -> list[Sentence]:
    """Decode every monolingual sentence, preserving order.

    Empty decodes become ``[UNK]`` so that no pair is dropped.
    """
    out: list[Sentence] = []
    sents = list(mono)
    if decode.beam_size == 1:
        for i in range(0, len(sents), decode.batch_size):
            out += model.greedy_decode_batch(backward, sents[i:i + decode.batch_size], decode.max_steps)
    else:
        out = [model.beam_decode(backward, s, decode.beam_size, decode.max_steps) for s in sents]
    return [h if h else [UNK] for h in out]


def build_synthetic_corpus(sources: list[Sentence], mono: MonolingualCorpus, tagged: bool) -> ParallelCorpus:
    if len(sources) != len(mono):
        raise ValueError(f"{len(sources)} synthetic sources for {len(mono)} monolingual sentences")
    if tagged:
        sources = [prepend_tag(s) for s in sources]
    return ParallelCorpus.from_pairs(zip(sources, mono.sentences))


def params_digest(params: np.ndarray) -> str:
    return hashlib.sha256(np.ascontiguousarray(params, dtype="<f8").tobytes()).hexdigest()
