"""Whitespace tokenization, vocabularies and corpus loading."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

PAD, BOS, EOS, UNK, TAG = 0, 1, 2, 3, 4
RESERVED = ("<pad>", "<s>", "</s>", "<unk>", "<bt>")

Sentence = list[int]


class CorpusError(ValueError):
    pass


@dataclass(frozen=True)
class Vocabulary:
    tokens: tuple[str, ...]
    index: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if tuple(self.tokens[: len(RESERVED)]) != RESERVED:
            raise ValueError("reserved tokens must occupy ids 0-4")
        index = {tok: i for i, tok in enumerate(self.tokens)}
        if len(index) != len(self.tokens):
            raise ValueError("duplicate token in vocabulary")
        object.__setattr__(self, "index", index)

    def __len__(self) -> int:
        return len(self.tokens)

    def __contains__(self, token: str) -> bool:
        return token in self.index

    def id(self, token: str) -> int:
        return self.index.get(token, UNK)

    def token(self, i: int) -> str:
        if not 0 <= i < len(self.tokens):
            raise IndexError(f"unknown id {i}")
        return self.tokens[i]

    @classmethod
    def from_tokens(cls, tokens: Iterable[str]) -> "Vocabulary":
        return cls(RESERVED + tuple(tokens))

    def save(self, path: str | Path) -> None:
        Path(path).write_text("\n".join(self.tokens[len(RESERVED):]) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "Vocabulary":
        lines = Path(path).read_text(encoding="utf-8").splitlines()
        return cls.from_tokens(line for line in lines if line)


def build_vocab(corpora: Sequence[Sequence[str]], max_size: int) -> Vocabulary:
    """Build a vocabulary from one or more corpora of whitespace-tokenized lines.

    Tokens are ranked by their combined frequency (descending), ties broken
    lexicographically, and truncated so that the vocabulary including the
    five reserved entries holds at most ``max_size`` ids.
    """
    if max_size < len(RESERVED) + 1:
        raise ValueError("max_size must be at least 6")
    if not corpora or all(len(c) == 0 for c in corpora):
        raise CorpusError("empty input")
    counts: Counter[str] = Counter()
    for corpus in corpora:
        for line in corpus:
            counts.update(tok for tok in line.split() if tok not in RESERVED)
    if not counts:
        raise CorpusError("empty input")
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    keep = max_size - len(RESERVED)
    return Vocabulary.from_tokens(tok for tok, _ in ranked[:keep])


def encode(text: str, vocab: Vocabulary) -> Sentence:
    toks = text.split()
    if not toks:
        raise CorpusError("empty sentence")
    return [vocab.id(t) for t in toks]


def decode_ids(ids: Sequence[int], vocab: Vocabulary) -> str:
    out = []
    for i in ids:
        if not 0 <= i < len(vocab):
            raise CorpusError(f"unknown id {i}")
        out.append(vocab.tokens[i])
    return " ".join(out)


def prepend_tag(s: Sentence) -> Sentence:
    """Mark a synthetic source sentence with the reserved tag id."""
    if not s:
        raise CorpusError("empty sentence")
    return [TAG] + list(s)


@dataclass(frozen=True)
class ParallelCorpus:
    pairs: tuple[tuple[tuple[int, ...], tuple[int, ...]], ...]

    def __post_init__(self):
        if not self.pairs:
            raise CorpusError("empty corpus")

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[Sequence[int], Sequence[int]]]) -> "ParallelCorpus":
        return cls(tuple((tuple(s), tuple(t)) for s, t in pairs))

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)

    def __getitem__(self, i):
        if isinstance(i, slice):
            return ParallelCorpus(self.pairs[i])
        return self.pairs[i]

    @property
    def sources(self) -> list[tuple[int, ...]]:
        return [s for s, _ in self.pairs]

    @property
    def targets(self) -> list[tuple[int, ...]]:
        return [t for _, t in self.pairs]

    def swapped(self) -> "ParallelCorpus":
        return ParallelCorpus(tuple((t, s) for s, t in self.pairs))

    def __add__(self, other: "ParallelCorpus") -> "ParallelCorpus":
        return ParallelCorpus(self.pairs + other.pairs)

    def save(self, prefix: str | Path, vocab: Vocabulary, src_ext="src", tgt_ext="tgt") -> None:
        _write_lines(f"{prefix}.{src_ext}", (decode_ids(s, vocab) for s in self.sources))
        _write_lines(f"{prefix}.{tgt_ext}", (decode_ids(t, vocab) for t in self.targets))


@dataclass(frozen=True)
class MonolingualCorpus:
    sentences: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if not self.sentences:
            raise CorpusError("empty corpus")

    @classmethod
    def from_sentences(cls, sents: Iterable[Sequence[int]]) -> "MonolingualCorpus":
        return cls(tuple(tuple(s) for s in sents))

    def __len__(self) -> int:
        return len(self.sentences)

    def __iter__(self):
        return iter(self.sentences)

    def __getitem__(self, i):
        if isinstance(i, slice):
            return MonolingualCorpus(self.sentences[i])
        return self.sentences[i]

    def __add__(self, other: "MonolingualCorpus") -> "MonolingualCorpus":
        return MonolingualCorpus(self.sentences + other.sentences)

    def save(self, path: str | Path, vocab: Vocabulary) -> None:
        _write_lines(path, (decode_ids(s, vocab) for s in self.sentences))


def _write_lines(path, lines: Iterable[str]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for line in lines:
            f.write(line + "\n")


def read_lines(path: str | Path) -> list[str]:
    with open(path, encoding="utf-8") as f:
        lines = f.read().split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    return lines


def _encode_file(path, vocab: Vocabulary) -> list[Sentence]:
    out = []
    for lineno, line in enumerate(read_lines(path), start=1):
        if not line.strip():
            raise CorpusError(f"{path}: blank line {lineno}")
        out.append(encode(line, vocab))
    return out


def load_parallel(src_path, tgt_path, vocab: Vocabulary) -> ParallelCorpus:
    src_lines = read_lines(src_path)
    tgt_lines = read_lines(tgt_path)
    if len(src_lines) != len(tgt_lines):
        raise CorpusError(
            f"unaligned corpus: {src_path} has {len(src_lines)} lines, {tgt_path} has {len(tgt_lines)}"
        )
    return ParallelCorpus.from_pairs(zip(_encode_file(src_path, vocab), _encode_file(tgt_path, vocab)))


def load_monolingual(path, vocab: Vocabulary) -> MonolingualCorpus:
    return MonolingualCorpus.from_sentences(_encode_file(path, vocab))
