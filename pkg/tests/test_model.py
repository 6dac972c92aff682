import math

import numpy as np
import pytest

from alterbt.model import Layout, ModelConfig, SequenceTooLong, TranslationModel
from alterbt.text import EOS
from conftest import random_pairs, tiny_model
from oracles import naive_log_likelihood


def fd_check(model, params, batch, coords, h=1e-5, floor=1e-6):
    """Max relative error between analytic and central-difference gradients."""
    _, grad = model.loss_and_grad(params, batch)
    worst = 0.0
    for i in coords:
        q = params.copy()
        q[i] += h
        up = model.loss_and_grad(q, batch)[0]
        q[i] -= 2 * h
        down = model.loss_and_grad(q, batch)[0]
        num = (up - down) / (2 * h)
        worst = max(worst, abs(num - grad[i]) / max(abs(num), abs(grad[i]), floor))
    return worst


def coords_per_tensor(layout, rng, per_tensor):
    return np.concatenate([
        rng.choice(np.arange(sl.start, sl.stop), size=min(per_tensor, sl.stop - sl.start), replace=False)
        for sl in layout.slices.values()
    ])


def test_layout_round_trip():
    m = tiny_model()
    p = np.random.default_rng(0).normal(size=m.num_params)
    assert np.array_equal(m.layout.flatten(m.layout.unflatten(p)), p)
    assert Layout(m.config).size == m.num_params
    assert tiny_model(seed=5).num_params == m.num_params


def test_layout_hash_ignores_seed_and_training_knobs():
    a = ModelConfig(vocab_size=12, seed=0)
    b = ModelConfig(vocab_size=12, seed=9, label_smoothing=0.0)
    assert a.layout_hash() == b.layout_hash()
    assert a.layout_hash() != ModelConfig(vocab_size=13).layout_hash()


def test_init_params():
    m = TranslationModel(ModelConfig(vocab_size=30))
    p = m.init_params()
    assert np.array_equal(p, m.init_params())
    P = m.layout.unflatten(p)
    for name, t in P.items():
        if m.layout.is_bias(name):
            assert np.all(t == 0.0)
        else:
            assert np.all(np.abs(t) <= 0.08) and np.any(t != 0.0)


def test_log_likelihood_matches_loop_oracle():
    rng = np.random.default_rng(11)
    m = tiny_model(seed=3, init_scale=0.4)
    p = m.init_params()
    p[m.layout.slices["out_b"]] = rng.normal(0, 0.2, 12)
    P = m.layout.unflatten(p)
    for src, tgt in random_pairs(rng, 20):
        ours = m.log_likelihood(p, src, tgt)
        assert ours <= 0.0
        assert ours == pytest.approx(naive_log_likelihood(P, src, tgt), abs=1e-12)


def test_uniform_logits():
    m = tiny_model()
    p = np.zeros(m.num_params)
    tgt = [5, 6, 7]
    assert m.log_likelihood(p, [8, 9], tgt) == pytest.approx(-(len(tgt) + 1) * math.log(12), abs=1e-12)


def test_padding_invariance():
    rng = np.random.default_rng(4)
    m = tiny_model(init_scale=0.3)
    p = m.init_params()
    batch = random_pairs(rng, 6, max_len=9)
    together = m.sentence_log_probs(p, batch)
    alone = np.array([m.log_likelihood(p, s, t) for s, t in batch])
    assert np.max(np.abs(together - alone)) < 1e-12


@pytest.mark.parametrize("smoothing", [0.0, 0.1])
def test_gradient_matches_finite_differences(smoothing):
    rng = np.random.default_rng(8)
    m = tiny_model(seed=2, init_scale=0.5, label_smoothing=smoothing)
    p = m.init_params()
    for name in ("enc_b1", "enc_b2", "dec_b1", "dec_b2", "out_b"):
        sl = m.layout.slices[name]
        p[sl] = rng.normal(0, 0.2, sl.stop - sl.start)
    batch = random_pairs(rng, 3)
    assert fd_check(m, p, batch, coords_per_tensor(m.layout, rng, 3)) < 1e-4


def test_duplicate_batch_and_sign():
    rng = np.random.default_rng(1)
    m = tiny_model(label_smoothing=0.0, init_scale=0.3)
    p = m.init_params()
    pair = random_pairs(rng, 1)[0]
    l1, g1 = m.loss_and_grad(p, [pair])
    l2, g2 = m.loss_and_grad(p, [pair, pair])
    assert l1 == pytest.approx(l2, abs=1e-12)
    assert np.max(np.abs(g1 - g2)) < 1e-12
    assert l1 >= 0.0
    assert l1 == pytest.approx(-m.log_likelihood(p, *pair), abs=1e-12)


def test_too_long():
    m = tiny_model(max_len=8)
    with pytest.raises(SequenceTooLong, match="exceeds maxLen"):
        m.log_likelihood(m.init_params(), [5] * 7, [6])
    with pytest.raises(SequenceTooLong):
        m.loss_and_grad(m.init_params(), [([5], [6] * 7)])


def test_softmax_rows_sum_to_one():
    m = tiny_model(init_scale=0.5)
    p = m.init_params()
    for prefixes in ([[]], [[8], [9]], [[8, 9, 10], [11, 5, 5]]):
        lp = m.step_log_probs(p, [5, 6, 7], prefixes)
        assert np.max(np.abs(np.exp(lp).sum(axis=-1) - 1.0)) < 1e-9


def test_greedy_decode_properties():
    rng = np.random.default_rng(3)
    m = tiny_model(init_scale=0.5)
    p = m.init_params()
    srcs = [s for s, _ in random_pairs(rng, 10)]
    batch = m.greedy_decode_batch(p, srcs, 6)
    for s, hyp in zip(srcs, batch):
        assert hyp == m.greedy_decode(p, s, 6) == m.greedy_decode(p, s, 6)
        assert len(hyp) <= 6 and EOS not in hyp


def test_beam_one_is_greedy_and_beam_scores_no_worse():
    rng = np.random.default_rng(6)
    m = tiny_model(init_scale=0.6)
    p = m.init_params()
    for src, _ in random_pairs(rng, 50):
        greedy = m.greedy_decode(p, src, 8)
        assert m.beam_decode(p, src, 1, 8) == greedy
    g_fin = lambda hyp: len(hyp) < 8
    for src, _ in random_pairs(rng, 15):
        greedy = m.greedy_decode(p, src, 8)
        hyp, score, finished = m.beam_search(p, src, 4, 8)
        assert score >= m.hypothesis_score(p, src, greedy, g_fin(greedy)) - 1e-12
        assert m.beam_search(p, src, 4, 8) == (hyp, score, finished)


def test_trained_model_reproduces_ground_truth(trained_forward, easy_task, easy_model):
    params, bleu = trained_forward
    assert bleu >= 99.0
    train, _ = easy_task
    pairs = list(train)[:100]
    hyps = easy_model.greedy_decode_batch(params, [s for s, _ in pairs], 8)
    exact = sum(list(h) == list(t) for h, (_, t) in zip(hyps, pairs))
    assert exact >= 95
