"""A one-block attention encoder-decoder with hand-written backpropagation.

All parameters live in one flat float64 vector; named tensors are views into
it, described by :class:`Layout`. The architecture is deliberately small:
single-head attention, one encoder block, one decoder block, no layer norm,
residual connections around every sublayer, sinusoidal positions, and an
output projection tied to the shared embedding table.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from .text import BOS, EOS, PAD, UNK


class SequenceTooLong(ValueError):
    pass


@dataclass(frozen=True)
class ModelConfig:
    vocab_size: int
    embed_dim: int = 32
    hidden_dim: int = 64
    max_len: int = 32
    label_smoothing: float = 0.1
    init_scale: float = 0.08
    seed: int = 0

    def __post_init__(self):
        if self.embed_dim % 2 or self.hidden_dim % 2:
            raise ValueError("embed_dim and hidden_dim must be even")
        if not 0.0 <= self.label_smoothing < 1.0:
            raise ValueError("label_smoothing must lie in [0, 1)")
        if self.vocab_size < 5:
            raise ValueError("vocab_size must cover the reserved ids")

    def layout_hash(self) -> str:
        """Hash of everything that determines the parameter layout."""
        key = json.dumps(
            {"V": self.vocab_size, "d": self.embed_dim, "h": self.hidden_dim}, sort_keys=True
        )
        return hashlib.sha256(key.encode()).hexdigest()[:16]

    def to_dict(self) -> dict:
        return asdict(self)


class Layout:
    """Maps tensor names to (offset, shape) inside the flat parameter vector."""

    def __init__(self, config: ModelConfig):
        V, d, h = config.vocab_size, config.embed_dim, config.hidden_dim
        attn = lambda p: [(f"{p}_q", (d, d)), (f"{p}_k", (d, d)), (f"{p}_v", (d, d))]
        ffn = lambda p: [(f"{p}_w1", (d, h)), (f"{p}_b1", (h,)), (f"{p}_w2", (h, d)), (f"{p}_b2", (d,))]
        shapes = (
            [("emb", (V, d))]
            + attn("enc_self") + ffn("enc")
            + attn("dec_self") + attn("dec_cross") + ffn("dec")
            + [("out_b", (V,))]
        )
        self.shapes = dict(shapes)
        self.slices: dict[str, slice] = {}
        offset = 0
        for name, shape in shapes:
            n = int(np.prod(shape))
            self.slices[name] = slice(offset, offset + n)
            offset += n
        self.size = offset

    def is_bias(self, name: str) -> bool:
        return name.endswith(("_b1", "_b2")) or name == "out_b"

    def unflatten(self, flat: np.ndarray) -> dict[str, np.ndarray]:
        if flat.shape != (self.size,):
            raise ValueError(f"expected {self.size} parameters, got {flat.shape}")
        return {name: flat[sl].reshape(self.shapes[name]) for name, sl in self.slices.items()}

    def flatten(self, tensors: dict[str, np.ndarray]) -> np.ndarray:
        flat = np.empty(self.size)
        for name, sl in self.slices.items():
            flat[sl] = np.asarray(tensors[name], dtype=np.float64).ravel()
        return flat


def positional_encoding(length: int, dim: int) -> np.ndarray:
    pos = np.arange(length)[:, None]
    freq = 10000.0 ** (-np.arange(0, dim, 2) / dim)
    pe = np.zeros((length, dim))
    pe[:, 0::2] = np.sin(pos * freq)
    pe[:, 1::2] = np.cos(pos * freq)
    return pe


def _softmax(scores: np.ndarray) -> np.ndarray:
    z = scores - scores.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def _log_softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=-1, keepdims=True)
    return z - np.log(np.exp(z).sum(axis=-1, keepdims=True))


def _softmax_backward(p: np.ndarray, dp: np.ndarray) -> np.ndarray:
    return p * (dp - (dp * p).sum(axis=-1, keepdims=True))


def _pad(seqs: Sequence[Sequence[int]], length: int) -> np.ndarray:
    out = np.full((len(seqs), length), PAD, dtype=np.int64)
    for i, s in enumerate(seqs):
        out[i, : len(s)] = s
    return out


class TranslationModel:
    """Forward pass, loss gradient and decoding for one :class:`ModelConfig`.

    The object is stateless apart from its config; parameters are always
    passed in, so one instance can be shared across threads.
    """

    def __init__(self, config: ModelConfig):
        self.config = config
        self.layout = Layout(config)
        self.scale = 1.0 / np.sqrt(config.embed_dim)
        self.pe = positional_encoding(config.max_len, config.embed_dim)

    @property
    def num_params(self) -> int:
        return self.layout.size

    def init_params(self) -> np.ndarray:
        rng = np.random.default_rng(self.config.seed)
        s = self.config.init_scale
        flat = np.zeros(self.layout.size)
        for name, sl in self.layout.slices.items():
            if not self.layout.is_bias(name):
                flat[sl] = rng.uniform(-s, s, size=sl.stop - sl.start)
        return flat

    # -- batching ---------------------------------------------------------

    def _check_len(self, src, tgt=None):
        if len(src) + 2 > self.config.max_len or (tgt is not None and len(tgt) + 2 > self.config.max_len):
            raise SequenceTooLong(f"sentence exceeds maxLen={self.config.max_len}")

    def _source_batch(self, srcs):
        for s in srcs:
            self._check_len(s)
        src = [list(s) + [EOS] for s in srcs]
        S = max(len(s) for s in src)
        ids = _pad(src, S)
        return ids, ids != PAD

    # -- forward ----------------------------------------------------------

    def _attend(self, q_in, kv_in, wq, wk, wv, key_mask):
        q, k, v = q_in @ wq, kv_in @ wk, kv_in @ wv
        scores = (q @ k.swapaxes(1, 2)) * self.scale
        scores = np.where(key_mask, scores, -np.inf)
        a = _softmax(scores)
        return a @ v, (q, k, v, a)

    def _ffn(self, x, w1, b1, w2, b2):
        pre = x @ w1 + b1
        r = np.maximum(pre, 0.0)
        return r @ w2 + b2, (pre, r)

    def encode(self, P, src_ids, src_mask):
        S = src_ids.shape[1]
        x0 = P["emb"][src_ids] + self.pe[:S]
        key_mask = src_mask[:, None, :]
        att, c_att = self._attend(x0, x0, P["enc_self_q"], P["enc_self_k"], P["enc_self_v"], key_mask)
        x1 = x0 + att
        ff, c_ff = self._ffn(x1, P["enc_w1"], P["enc_b1"], P["enc_w2"], P["enc_b2"])
        x2 = x1 + ff
        return x2, (x0, x1, c_att, c_ff, key_mask)

    def decode_states(self, P, tgt_in, memory, src_mask):
        T = tgt_in.shape[1]
        y0 = P["emb"][tgt_in] + self.pe[:T]
        causal = np.tril(np.ones((T, T), dtype=bool))[None]
        sa, c_sa = self._attend(y0, y0, P["dec_self_q"], P["dec_self_k"], P["dec_self_v"], causal)
        y1 = y0 + sa
        cross_mask = src_mask[:, None, :]
        ca, c_ca = self._attend(y1, memory, P["dec_cross_q"], P["dec_cross_k"], P["dec_cross_v"], cross_mask)
        y2 = y1 + ca
        ff, c_ff = self._ffn(y2, P["dec_w1"], P["dec_b1"], P["dec_w2"], P["dec_b2"])
        y3 = y2 + ff
        logits = y3 @ P["emb"].T + P["out_b"]
        return logits, (y0, y1, y2, y3, c_sa, c_ca, c_ff, causal, cross_mask)

    def _batch(self, P, batch):
        for s, t in batch:
            self._check_len(s, t)
        src_ids, src_mask = self._source_batch([s for s, _ in batch])
        tgt_in = [[BOS] + list(t) for _, t in batch]
        tgt_out = [list(t) + [EOS] for _, t in batch]
        T = max(len(t) for t in tgt_in)
        tgt_in_ids = _pad(tgt_in, T)
        tgt_out_ids = _pad(tgt_out, T)
        tgt_mask = np.zeros((len(batch), T), dtype=bool)
        for i, t in enumerate(tgt_out):
            tgt_mask[i, : len(t)] = True
        return src_ids, src_mask, tgt_in_ids, tgt_out_ids, tgt_mask

    def sentence_log_probs(self, params: np.ndarray, batch) -> np.ndarray:
        """log P(tgt | src) for each pair, summed over target tokens and EOS."""
        P = self.layout.unflatten(params)
        src_ids, src_mask, tgt_in, tgt_out, tgt_mask = self._batch(P, batch)
        memory, _ = self.encode(P, src_ids, src_mask)
        logits, _ = self.decode_states(P, tgt_in, memory, src_mask)
        logp = _log_softmax(logits)
        picked = np.take_along_axis(logp, tgt_out[..., None], axis=-1)[..., 0]
        return np.where(tgt_mask, picked, 0.0).sum(axis=1)

    def log_likelihood(self, params: np.ndarray, src, tgt) -> float:
        return float(self.sentence_log_probs(params, [(src, tgt)])[0])

    # -- loss and gradient -------------------------------------------------

    def loss_and_grad(self, params: np.ndarray, batch) -> tuple[float, np.ndarray]:
        """Mean label-smoothed negative sentence log-likelihood and its exact gradient."""
        if not batch:
            raise ValueError("empty batch")
        P = self.layout.unflatten(params)
        V = self.config.vocab_size
        eps = self.config.label_smoothing
        src_ids, src_mask, tgt_in, tgt_out, tgt_mask = self._batch(P, batch)
        B = len(batch)

        memory, enc_cache = self.encode(P, src_ids, src_mask)
        logits, dec_cache = self.decode_states(P, tgt_in, memory, src_mask)
        logp = _log_softmax(logits)

        # smoothed target q = (1 - eps) * onehot + eps / V; d(-sum q log p)/dlogits = p - q
        m = tgt_mask[..., None]
        picked = np.take_along_axis(logp, tgt_out[..., None], axis=-1)
        per_pos = (1.0 - eps) * picked + (eps / V) * logp.sum(axis=-1, keepdims=True)
        loss = -float(per_pos[m[..., 0]].sum()) / B

        dlogits = np.exp(logp) - eps / V
        np.put_along_axis(dlogits, tgt_out[..., None], np.take_along_axis(dlogits, tgt_out[..., None], axis=-1) - (1.0 - eps), axis=-1)
        dlogits *= m / B
        G = {name: np.zeros(shape) for name, shape in self.layout.shapes.items()}
        dmemory = self._decoder_backward(P, G, dlogits, tgt_in, memory, dec_cache)
        self._encoder_backward(P, G, dmemory, src_ids, enc_cache)
        return loss, self.layout.flatten(G)

    def _attend_backward(self, P, G, prefix, q_in, kv_in, cache, dout):
        q, k, v, a = cache
        da = dout @ v.swapaxes(1, 2)
        dv = a.swapaxes(1, 2) @ dout
        ds = _softmax_backward(a, da) * self.scale
        dq = ds @ k
        dk = ds.swapaxes(1, 2) @ q
        wq, wk, wv = P[f"{prefix}_q"], P[f"{prefix}_k"], P[f"{prefix}_v"]
        G[f"{prefix}_q"] += _outer_sum(q_in, dq)
        G[f"{prefix}_k"] += _outer_sum(kv_in, dk)
        G[f"{prefix}_v"] += _outer_sum(kv_in, dv)
        return dq @ wq.T, dk @ wk.T + dv @ wv.T

    def _ffn_backward(self, P, G, prefix, x, cache, dout):
        pre, r = cache
        G[f"{prefix}_w2"] += _outer_sum(r, dout)
        G[f"{prefix}_b2"] += dout.sum(axis=(0, 1))
        dpre = (dout @ P[f"{prefix}_w2"].T) * (pre > 0)
        G[f"{prefix}_w1"] += _outer_sum(x, dpre)
        G[f"{prefix}_b1"] += dpre.sum(axis=(0, 1))
        return dpre @ P[f"{prefix}_w1"].T

    def _decoder_backward(self, P, G, dlogits, tgt_in, memory, cache):
        y0, y1, y2, y3, c_sa, c_ca, c_ff, _, _ = cache
        G["out_b"] += dlogits.sum(axis=(0, 1))
        G["emb"] += _outer_sum(dlogits, y3)
        dy3 = dlogits @ P["emb"]
        dy2 = dy3 + self._ffn_backward(P, G, "dec", y2, c_ff, dy3)
        dq_in, dmemory = self._attend_backward(P, G, "dec_cross", y1, memory, c_ca, dy2)
        dy1 = dy2 + dq_in
        dq_in, dkv_in = self._attend_backward(P, G, "dec_self", y0, y0, c_sa, dy1)
        dy0 = dy1 + dq_in + dkv_in
        _scatter_rows(G["emb"], tgt_in, dy0)
        return dmemory

    def _encoder_backward(self, P, G, dx2, src_ids, cache):
        x0, x1, c_att, c_ff, _ = cache
        dx1 = dx2 + self._ffn_backward(P, G, "enc", x1, c_ff, dx2)
        dq_in, dkv_in = self._attend_backward(P, G, "enc_self", x0, x0, c_att, dx1)
        dx0 = dx1 + dq_in + dkv_in
        _scatter_rows(G["emb"], src_ids, dx0)

    # -- decoding -----------------------------------------------------------

    def _default_steps(self, max_steps):
        return self.config.max_len - 2 if max_steps is None else max_steps

    def greedy_decode_batch(self, params: np.ndarray, srcs, max_steps: int | None = None) -> list[list[int]]:
        """Argmax decoding of several sources at once (ties go to the lowest id)."""
        if not srcs:
            return []
        max_steps = self._default_steps(max_steps)
        P = self.layout.unflatten(params)
        src_ids, src_mask = self._source_batch(srcs)
        memory, _ = self.encode(P, src_ids, src_mask)
        B = len(srcs)
        prefix = np.full((B, 1), BOS, dtype=np.int64)
        done = np.zeros(B, dtype=bool)
        outputs: list[list[int]] = [[] for _ in range(B)]
        for _ in range(min(max_steps, self.config.max_len - 1)):
            logits, _ = self.decode_states(P, prefix, memory, src_mask)
            nxt = np.argmax(_log_softmax(logits[:, -1]), axis=-1)
            for i in np.flatnonzero(~done):
                if nxt[i] == EOS:
                    done[i] = True
                else:
                    outputs[i].append(int(nxt[i]))
            if done.all():
                break
            prefix = np.concatenate([prefix, nxt[:, None]], axis=1)
        return outputs

    def greedy_decode(self, params: np.ndarray, src, max_steps: int | None = None) -> list[int]:
        return self.greedy_decode_batch(params, [src], max_steps)[0]

    def step_log_probs(self, params: np.ndarray, src, prefixes: list[list[int]]) -> np.ndarray:
        """Next-token log-probabilities for each prefix (BOS excluded) of one source."""
        P = self.layout.unflatten(params)
        src_ids, src_mask = self._source_batch([src])
        memory, _ = self.encode(P, src_ids, src_mask)
        n = len(prefixes)
        ids = np.array([[BOS] + list(p) for p in prefixes], dtype=np.int64)
        logits, _ = self.decode_states(P, ids, np.repeat(memory, n, axis=0), np.repeat(src_mask, n, axis=0))
        return _log_softmax(logits[:, -1])

    def hypothesis_score(self, params: np.ndarray, src, hyp, finished: bool = True) -> float:
        """Sum of token log-probabilities of ``hyp``, plus EOS when ``finished``."""
        ll = self.log_likelihood(params, src, hyp)
        if finished:
            return ll
        return ll - float(self.step_log_probs(params, src, [list(hyp)])[0, EOS])

    def beam_search(self, params: np.ndarray, src, beam_size: int, max_steps: int | None = None):
        """Length-unnormalized beam search; returns ``(hyp, score, finished)``.

        For ``beam_size > 1`` the greedy hypothesis is entered as a candidate,
        so the result never scores below it.
        """
        if beam_size < 1:
            raise ValueError("beam_size must be >= 1")
        max_steps = min(self._default_steps(max_steps), self.config.max_len - 1)
        P = self.layout.unflatten(params)
        src_ids, src_mask = self._source_batch([src])
        memory, _ = self.encode(P, src_ids, src_mask)
        V = self.config.vocab_size

        beams: list[tuple[float, list[int]]] = [(0.0, [])]
        finished: list[tuple[float, list[int]]] = []
        for _ in range(max_steps):
            n = len(beams)
            ids = np.array([[BOS] + b for _, b in beams], dtype=np.int64)
            logits, _ = self.decode_states(P, ids, np.repeat(memory, n, axis=0), np.repeat(src_mask, n, axis=0))
            totals = np.array([s for s, _ in beams])[:, None] + _log_softmax(logits[:, -1])
            flat = totals.ravel()
            order = np.lexsort((np.arange(flat.size), -flat))[:beam_size]
            alive = []
            for idx in order:
                b, tok = divmod(int(idx), V)
                if tok == EOS:
                    finished.append((float(flat[idx]), beams[b][1]))
                else:
                    alive.append((float(flat[idx]), beams[b][1] + [tok]))
            beams = alive
            # scores only decrease, so no live beam can overtake the best finished one
            if not beams:
                break
            if finished and max(s for s, _ in finished) >= max(s for s, _ in beams):
                break

        candidates = [(s, h, True) for s, h in finished] + [(s, h, False) for s, h in beams]
        if beam_size > 1:
            greedy = self.greedy_decode(params, src, max_steps)
            done = len(greedy) < max_steps
            candidates.append((self.hypothesis_score(params, src, greedy, done), greedy, done))
        score, hyp, done = max(candidates, key=lambda c: c[0])
        return hyp, score, done

    def beam_decode(self, params: np.ndarray, src, beam_size: int, max_steps: int | None = None) -> list[int]:
        return self.beam_search(params, src, beam_size, max_steps)[0]


def _outer_sum(x: np.ndarray, dy: np.ndarray) -> np.ndarray:
    """Sum over batch and time of x_t^T dy_t."""
    return x.reshape(-1, x.shape[-1]).T @ dy.reshape(-1, dy.shape[-1])


def _scatter_rows(target: np.ndarray, ids: np.ndarray, rows: np.ndarray) -> None:
    np.add.at(target, ids.ravel(), rows.reshape(-1, rows.shape[-1]))


def replace_empty(hyps: list[list[int]]) -> list[list[int]]:
    return [h if h else [UNK] for h in hyps]
