"""Slow, independent reference implementations used as test oracles.

Each one is written from the definition with plain loops and shares no code
with the library beyond parameter unpacking.
"""

import math

import numpy as np


def brute_bleu(hyps, refs, max_order=4):
    """Corpus BLEU by explicit n-gram enumeration and greedy match removal."""
    matches = [0] * max_order
    totals = [0] * max_order
    hyp_len = ref_len = 0
    for hyp, ref in zip(hyps, refs):
        hyp_len += len(hyp)
        ref_len += len(ref)
        for n in range(1, max_order + 1):
            hyp_grams = [tuple(hyp[i:i + n]) for i in range(len(hyp) - n + 1)]
            pool = [tuple(ref[i:i + n]) for i in range(len(ref) - n + 1)]
            totals[n - 1] += len(hyp_grams)
            for g in hyp_grams:
                if g in pool:
                    pool.remove(g)
                    matches[n - 1] += 1
    if hyp_len == 0 or any(t == 0 for t in totals) or any(m == 0 for m in matches):
        return 0.0
    score = 1.0
    for m, t in zip(matches, totals):
        score *= (m / t) ** (1.0 / max_order)
    if hyp_len <= ref_len:
        score *= math.exp(1.0 - ref_len / hyp_len)
    return 100.0 * score


def scalar_adam(params, grads, lrs, beta1=0.9, beta2=0.98, eps=1e-9):
    """Adam applied coordinate by coordinate; ``grads`` and ``lrs`` are per step."""
    p = [float(x) for x in params]
    m = [0.0] * len(p)
    v = [0.0] * len(p)
    for t, (g, lr) in enumerate(zip(grads, lrs), start=1):
        for i in range(len(p)):
            m[i] = beta1 * m[i] + (1.0 - beta1) * g[i]
            v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i]
            mh = m[i] / (1.0 - beta1 ** t)
            vh = v[i] / (1.0 - beta2 ** t)
            p[i] = p[i] - lr * mh / (math.sqrt(vh) + eps)
    return p


def _sinusoid(pos, dim):
    out = [0.0] * dim
    for j in range(0, dim, 2):
        freq = 10000.0 ** (-j / dim)
        out[j] = math.sin(pos * freq)
        if j + 1 < dim:
            out[j + 1] = math.cos(pos * freq)
    return np.array(out)


def _attention(query, keys, wq, wk, wv, scale):
    q = query @ wq
    scores = np.array([(q @ (k @ wk)) * scale for k in keys])
    scores = scores - scores.max()
    w = np.exp(scores) / np.exp(scores).sum()
    out = np.zeros_like(q)
    for wi, k in zip(w, keys):
        out = out + wi * (k @ wv)
    return out


def _ffn(x, w1, b1, w2, b2):
    return np.maximum(x @ w1 + b1, 0.0) @ w2 + b2


def naive_log_likelihood(P, src, tgt, bos=1, eos=2):
    """log P(tgt | src) one position at a time, recomputing everything."""
    d = P["emb"].shape[1]
    scale = 1.0 / math.sqrt(d)
    s = list(src) + [eos]
    x0 = [P["emb"][t] + _sinusoid(i, d) for i, t in enumerate(s)]
    memory = []
    for i in range(len(s)):
        x1 = x0[i] + _attention(x0[i], x0, P["enc_self_q"], P["enc_self_k"], P["enc_self_v"], scale)
        memory.append(x1 + _ffn(x1, P["enc_w1"], P["enc_b1"], P["enc_w2"], P["enc_b2"]))
    inp = [bos] + list(tgt)
    out = list(tgt) + [eos]
    total = 0.0
    for i in range(len(inp)):
        y0 = [P["emb"][t] + _sinusoid(j, d) for j, t in enumerate(inp[: i + 1])]
        y1 = y0[i] + _attention(y0[i], y0, P["dec_self_q"], P["dec_self_k"], P["dec_self_v"], scale)
        y2 = y1 + _attention(y1, memory, P["dec_cross_q"], P["dec_cross_k"], P["dec_cross_v"], scale)
        y3 = y2 + _ffn(y2, P["dec_w1"], P["dec_b1"], P["dec_w2"], P["dec_b2"])
        logits = np.array([y3 @ P["emb"][v] + P["out_b"][v] for v in range(P["emb"].shape[0])])
        mx = logits.max()
        total += logits[out[i]] - mx - math.log(sum(math.exp(z - mx) for z in logits))
    return total


def point_segment_distance(p, a, b, gram):
    """Distance from p to segment ab in the metric ``gram`` by ternary search."""
    p, a, b = (np.asarray(z, dtype=float) for z in (p, a, b))

    def f(s):
        r = p - (a + s * (b - a))
        return float(r @ gram @ r)

    lo, hi = 0.0, 1.0
    for _ in range(200):
        m1, m2 = lo + (hi - lo) / 3, hi - (hi - lo) / 3
        if f(m1) <= f(m2):
            hi = m2
        else:
            lo = m1
    return math.sqrt(max(f((lo + hi) / 2), 0.0))
