import numpy as np
import pytest

from alterbt.optim import AdamState, BatchStream, LrSchedule, adam_step, lr_at, train_steps
from alterbt.taskgen import TaskSpec, sample_parallel
from alterbt.model import ModelConfig, TranslationModel
from oracles import scalar_adam


def test_single_step_example():
    state = AdamState.fresh(1)
    state, p = adam_step(state, np.array([0.0]), np.array([1.0]), 0.1)
    assert abs(p[0] - (-0.1 / (1 + 1e-9))) < 1e-12
    assert state.step == 1


def test_zero_gradient_keeps_params():
    p = np.array([0.3, -1.0, 2.0])
    _, q = adam_step(AdamState.fresh(3), p, np.zeros(3), 0.5)
    assert np.array_equal(p, q)


def test_sign_symmetry():
    _, q = adam_step(AdamState.fresh(2), np.zeros(2), np.array([0.7, -0.7]), 0.01)
    assert q[0] == -q[1] and q[0] < 0


def test_scalar_loop_oracle():
    rng = np.random.default_rng(0)
    p0 = rng.normal(size=10)
    grads = rng.normal(size=(5, 10))
    lrs = [1e-3, 2e-3, 5e-4, 1e-2, 3e-3]
    state, p = AdamState.fresh(10), p0.copy()
    for g, lr in zip(grads, lrs):
        state, p = adam_step(state, p, g, lr)
    expected = scalar_adam(p0, grads, lrs)
    assert np.max(np.abs(p - np.array(expected))) <= 1e-15


def test_non_finite_gradient():
    with pytest.raises(FloatingPointError, match="non-finite gradient"):
        adam_step(AdamState.fresh(2), np.zeros(2), np.array([np.nan, 0.0]), 0.1)


def test_schedule():
    s = LrSchedule(peak_lr=1e-3, warmup=100)
    assert lr_at(s, 100) == pytest.approx(1e-3)
    assert lr_at(s, 50) == pytest.approx(5e-4)
    assert lr_at(s, 400) == pytest.approx(5e-4)
    with pytest.raises(ValueError):
        lr_at(s, 0)


def test_batch_stream_cycles_epochs():
    corpus = sample_parallel(10, TaskSpec(seed=0))
    stream = BatchStream(corpus, 4, seed=3)
    first_epoch = [tuple(p) for _ in range(2) for p in stream.next()]
    assert len(set(first_epoch)) == len(first_epoch)
    stream.next()
    assert stream.epoch == 1


def test_batch_stream_deterministic():
    corpus = sample_parallel(25, TaskSpec(seed=0))
    a, b = BatchStream(corpus, 7, 1), BatchStream(corpus, 7, 1)
    assert [a.next() for _ in range(9)] == [b.next() for _ in range(9)]


@pytest.fixture(scope="module")
def toy():
    spec = TaskSpec(seed=0, source_vocab_size=10, target_vocab_size=10, max_len=6)
    model = TranslationModel(ModelConfig(vocab_size=len(spec.vocabulary()), embed_dim=16, hidden_dim=32, seed=0))
    return model, sample_parallel(200, spec)


def test_train_steps_zero_and_determinism(toy):
    model, corpus = toy
    p0 = model.init_params()
    s0 = AdamState.fresh(model.num_params)
    p, s, log = train_steps(model, p0, s0, LrSchedule(1e-2, 20), corpus, 16, 0, seed=1)
    assert p is p0 and s is s0 and len(log) == 0
    a = train_steps(model, p0, s0, LrSchedule(1e-2, 20), corpus, 16, 5, seed=1)
    b = train_steps(model, p0, s0, LrSchedule(1e-2, 20), corpus, 16, 5, seed=1)
    assert np.array_equal(a[0], b[0]) and a[2].records == b[2].records
    assert [r["step"] for r in a[2].records] == [1, 2, 3, 4, 5]


def test_train_steps_reduce_loss(toy):
    model, corpus = toy
    p, s, log = train_steps(model, model.init_params(), AdamState.fresh(model.num_params),
                            LrSchedule(1e-2, 50), corpus, 16, 300, seed=0)
    losses = np.array([r["loss"] for r in log.records])
    assert losses[-30:].mean() < losses[:30].mean()
    assert np.all(np.isfinite(p))
