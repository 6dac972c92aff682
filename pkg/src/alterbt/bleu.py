"""Corpus BLEU-4 with multi-bleu.perl semantics (no smoothing, single reference)."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

MAX_ORDER = 4


@dataclass
class NgramStats:
    matches: list[int] = field(default_factory=lambda: [0] * MAX_ORDER)
    totals: list[int] = field(default_factory=lambda: [0] * MAX_ORDER)
    hyp_len: int = 0
    ref_len: int = 0

    def __add__(self, other: "NgramStats") -> "NgramStats":
        return NgramStats(
            [a + b for a, b in zip(self.matches, other.matches)],
            [a + b for a, b in zip(self.totals, other.totals)],
            self.hyp_len + other.hyp_len,
            self.ref_len + other.ref_len,
        )

    def precisions(self) -> list[float]:
        return [m / t if t else 0.0 for m, t in zip(self.matches, self.totals)]


def _ngrams(tokens: Sequence, n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def sentence_stats(hyp: Sequence, ref: Sequence) -> NgramStats:
    if len(ref) == 0:
        raise ValueError("empty reference")
    hyp, ref = list(hyp), list(ref)
    stats = NgramStats(hyp_len=len(hyp), ref_len=len(ref))
    for n in range(1, MAX_ORDER + 1):
        h, r = _ngrams(hyp, n), _ngrams(ref, n)
        stats.matches[n - 1] = sum(min(c, r[g]) for g, c in h.items())
        stats.totals[n - 1] = max(0, len(hyp) - n + 1)
    return stats


def corpus_stats(hyps: Iterable[Sequence], refs: Iterable[Sequence]) -> NgramStats:
    hyps, refs = list(hyps), list(refs)
    if len(hyps) != len(refs):
        raise ValueError("hypothesis and reference counts differ")
    total = NgramStats()
    for h, r in zip(hyps, refs):
        total = total + sentence_stats(h, r)
    return total


def bleu_from_stats(stats: NgramStats) -> float:
    if stats.hyp_len == 0:
        return 0.0
    if any(t == 0 or m == 0 for m, t in zip(stats.matches, stats.totals)):
        return 0.0
    log_p = sum(math.log(m / t) for m, t in zip(stats.matches, stats.totals)) / MAX_ORDER
    bp = 1.0 if stats.hyp_len > stats.ref_len else math.exp(1.0 - stats.ref_len / stats.hyp_len)
    return 100.0 * bp * math.exp(log_p)


def corpus_bleu(hyps: Iterable[Sequence], refs: Iterable[Sequence]) -> float:
    return bleu_from_stats(corpus_stats(hyps, refs))


def format_report(stats: NgramStats) -> str:
    """One line in the layout printed by multi-bleu.perl."""
    score = bleu_from_stats(stats)
    prec = "/".join(f"{100 * p:.1f}" for p in stats.precisions())
    if stats.hyp_len == 0:
        bp, ratio = 0.0, 0.0
    else:
        ratio = stats.hyp_len / stats.ref_len
        bp = 1.0 if stats.hyp_len > stats.ref_len else math.exp(1.0 - stats.ref_len / stats.hyp_len)
    return (
        f"BLEU = {score:.2f}, {prec} (BP={bp:.3f}, ratio={ratio:.3f}, "
        f"hyp_len={stats.hyp_len}, ref_len={stats.ref_len})"
    )
