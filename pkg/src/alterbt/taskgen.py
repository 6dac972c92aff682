"""Seeded toy translation task with a known ground-truth translator.

Source tokens ``s0..s{n-1}`` and target tokens ``t0..t{n-1}`` share one joint
vocabulary (reserved ids first, then sources, then targets), so a single
embedding table serves both directions. Every random draw comes from a
generator keyed by ``(seed, stream, index)``, which makes sampling
order-independent.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from functools import lru_cache

import numpy as np

from .text import RESERVED, MonolingualCorpus, ParallelCorpus, Sentence, Vocabulary

_DICT_STREAM = 0
_PAIR_STREAM = 1
MONO_SEED_OFFSET = 0x9E3779B97F4A7C15
DEV_START = 1_000_000


@dataclass(frozen=True)
class TaskSpec:
    seed: int = 0
    source_vocab_size: int = 60
    target_vocab_size: int = 60
    min_len: int = 3
    max_len: int = 12
    zipf_exponent: float = 1.1
    reorder_window: int = 2

    def __post_init__(self):
        if self.min_len < 1 or self.max_len < self.min_len:
            raise ValueError("need 1 <= min_len <= max_len")
        if self.source_vocab_size < 1 or self.target_vocab_size < 1:
            raise ValueError("vocabulary sizes must be positive")
        if self.source_vocab_size != self.target_vocab_size:
            raise ValueError("the ground-truth dictionary is a bijection; vocab sizes must match")
        if self.zipf_exponent <= 0:
            raise ValueError("zipf_exponent must be positive")
        if self.reorder_window < 0:
            raise ValueError("reorder_window must be non-negative")

    @property
    def source_ids(self) -> range:
        start = len(RESERVED)
        return range(start, start + self.source_vocab_size)

    @property
    def target_ids(self) -> range:
        start = len(RESERVED) + self.source_vocab_size
        return range(start, start + self.target_vocab_size)

    def vocabulary(self) -> Vocabulary:
        return task_vocabulary(self)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "TaskSpec":
        return cls(**d)


@dataclass(frozen=True)
class NoiseSpec:
    substitution_prob: float = 0.0
    deletion_prob: float = 0.0
    seed: int = 0

    def __post_init__(self):
        for p in (self.substitution_prob, self.deletion_prob):
            if not 0.0 <= p <= 1.0:
                raise ValueError("probabilities must lie in [0, 1]")
        if self.substitution_prob + self.deletion_prob > 1.0:
            raise ValueError("substitution_prob + deletion_prob must be <= 1")


def _rng(*key: int) -> np.random.Generator:
    return np.random.default_rng([k % 2**64 for k in key])


@lru_cache(maxsize=64)
def task_vocabulary(spec: TaskSpec) -> Vocabulary:
    src = [f"s{i}" for i in range(spec.source_vocab_size)]
    tgt = [f"t{i}" for i in range(spec.target_vocab_size)]
    return Vocabulary.from_tokens(src + tgt)


@lru_cache(maxsize=64)
def _dictionary(spec: TaskSpec) -> dict[int, int]:
    perm = _rng(spec.seed, _DICT_STREAM).permutation(spec.target_vocab_size)
    tgt0 = spec.target_ids.start
    return {s: tgt0 + int(p) for s, p in zip(spec.source_ids, perm)}


@lru_cache(maxsize=64)
def _zipf_probs(spec: TaskSpec) -> np.ndarray:
    ranks = np.arange(1, spec.source_vocab_size + 1, dtype=np.float64)
    w = ranks ** -spec.zipf_exponent
    return w / w.sum()


def inverse_dictionary(spec: TaskSpec) -> dict[int, int]:
    return {t: s for s, t in _dictionary(spec).items()}


def reorder(tokens: list[int], window: int) -> list[int]:
    """Reverse each disjoint full block of ``window`` positions whose first id is even.

    With ``window == 2`` this swaps pairs (2i, 2i+1). Windows 0 and 1 leave
    the order untouched.
    """
    out = list(tokens)
    if window < 2:
        return out
    for start in range(0, len(out) - window + 1, window):
        if out[start] % 2 == 0:
            out[start:start + window] = out[start:start + window][::-1]
    return out


def ground_truth_translate(src: Sentence, spec: TaskSpec) -> Sentence:
    table = _dictionary(spec)
    try:
        mapped = [table[t] for t in src]
    except KeyError as e:
        raise ValueError(f"token {e.args[0]} outside the task source vocabulary") from None
    return reorder(mapped, spec.reorder_window)


def _sample_source(rng: np.random.Generator, spec: TaskSpec) -> list[int]:
    n = int(rng.integers(spec.min_len, spec.max_len + 1))
    ranks = rng.choice(spec.source_vocab_size, size=n, p=_zipf_probs(spec))
    return [spec.source_ids.start + int(r) for r in ranks]


def sample_parallel(n: int, spec: TaskSpec, start: int = 0) -> ParallelCorpus:
    """Sample ``n`` pairs with indices ``start .. start+n-1`` of the pair stream."""
    if n < 1:
        raise ValueError("count must be positive")
    pairs = []
    for i in range(start, start + n):
        src = _sample_source(_rng(spec.seed, _PAIR_STREAM, i), spec)
        pairs.append((src, ground_truth_translate(src, spec)))
    return ParallelCorpus.from_pairs(pairs)


def sample_dev(n: int, spec: TaskSpec) -> ParallelCorpus:
    return sample_parallel(n, spec, start=DEV_START)


def sample_monolingual(m: int, spec: TaskSpec) -> MonolingualCorpus:
    if m < 1:
        raise ValueError("count must be positive")
    seed = spec.seed + MONO_SEED_OFFSET
    sents = []
    for i in range(m):
        src = _sample_source(_rng(seed, _PAIR_STREAM, i), spec)
        sents.append(ground_truth_translate(src, spec))
    return MonolingualCorpus.from_sentences(sents)


def corrupt_source(s: Sentence, noise: NoiseSpec, index: int, spec: TaskSpec) -> Sentence:
    """Substitute or delete source tokens at the rates given by ``noise``.

    At least one token always survives: if every token is deleted the first
    one is kept.
    """
    if not s:
        raise ValueError("empty sentence")
    rng = _rng(noise.seed, index)
    ids = spec.source_ids
    out = []
    for tok in s:
        u = rng.random()
        if u < noise.substitution_prob:
            out.append(int(rng.integers(ids.start, ids.stop)))
        elif u < noise.substitution_prob + noise.deletion_prob:
            continue
        else:
            out.append(int(tok))
    return out or [int(s[0])]
