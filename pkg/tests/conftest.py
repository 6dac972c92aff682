import numpy as np
import pytest

from alterbt.model import ModelConfig, TranslationModel
from alterbt.scheduler import Phase, TrainConfig, Trainer, evaluate_dev
from alterbt.taskgen import TaskSpec, sample_dev, sample_parallel

# a reorder-free task small enough to learn perfectly in a few seconds
EASY_SPEC = TaskSpec(seed=1, source_vocab_size=8, target_vocab_size=8, min_len=2, max_len=5,
                     reorder_window=0, zipf_exponent=0.3)


def tiny_model(seed=0, **kw):
    cfg = dict(vocab_size=12, embed_dim=8, hidden_dim=16, max_len=16, seed=seed)
    cfg.update(kw)
    return TranslationModel(ModelConfig(**cfg))


def random_pairs(rng, n, lo=5, hi=12, max_len=6):
    return [
        (list(map(int, rng.integers(lo, hi, size=rng.integers(1, max_len)))),
         list(map(int, rng.integers(lo, hi, size=rng.integers(1, max_len)))))
        for _ in range(n)
    ]


def _fit(model, train, dev):
    tc = TrainConfig(batch_size=16, peak_lr=1e-2, warmup=50, eval_interval=100, patience=600,
                     max_steps=1500, decode_max_steps=8, seed=0)
    trainer = Trainer(model, tc, lambda p: evaluate_dev(model, p, dev, 1, 8), keep_params=False)
    params = trainer.run_phase(Phase.A, train)
    return params, trainer.phases[-1].best_bleu


@pytest.fixture(scope="session")
def easy_task():
    return sample_parallel(300, EASY_SPEC), sample_dev(50, EASY_SPEC)


@pytest.fixture(scope="session")
def easy_model():
    return TranslationModel(ModelConfig(vocab_size=len(EASY_SPEC.vocabulary()), embed_dim=16,
                                        hidden_dim=32, max_len=12, seed=0))


@pytest.fixture(scope="session")
def trained_forward(easy_task, easy_model):
    train, dev = easy_task
    return _fit(easy_model, train, dev)


@pytest.fixture(scope="session")
def trained_backward(easy_task, easy_model):
    train, dev = easy_task
    return _fit(easy_model, train.swapped(), dev.swapped())


# one pass/fail line per acceptance criterion, printed after the run

_criteria: dict[int, tuple[str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion covered by the test")


def pytest_runtest_logreport(report):
    marker = getattr(report, "criterion", None)
    if marker is None:
        return
    n, title = marker
    if report.when == "call" or report.outcome != "passed":
        prev = _criteria.get(n, (title, "PASS"))[1]
        status = "PASS" if report.outcome == "passed" and prev == "PASS" else "FAIL"
        _criteria[n] = (title, status)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    m = item.get_closest_marker("criterion")
    if m is not None:
        outcome.get_result().criterion = tuple(m.args)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_criteria):
        title, status = _criteria[n]
        terminalreporter.write_line(f"criterion {n:2d} {status}  {title}")
