"""Run configuration: one JSON document with full defaults, deep-merged with overrides."""

from __future__ import annotations

import copy
import json
from dataclasses import fields
from pathlib import Path

from .model import ModelConfig
from .scheduler import TrainConfig
from .taskgen import TaskSpec

DEFAULTS: dict = {
    "seed": 0,
    "task": {
        "source_vocab_size": 60,
        "target_vocab_size": 60,
        "min_len": 3,
        "max_len": 12,
        "zipf_exponent": 1.1,
        "reorder_window": 2,
    },
    "data": {"n_authentic": 2000, "n_dev": 200, "n_backward": 500, "n_mono": 2000},
    "model": {
        "embed_dim": 32,
        "hidden_dim": 64,
        "max_len": 32,
        "label_smoothing": 0.1,
        "init_scale": 0.08,
    },
    "train": {
        "batch_size": 32,
        "peak_lr": 1e-2,
        "warmup": 200,
        "eval_interval": 50,
        "patience": 500,
        "max_steps": 5000,
        "max_cycles": 8,
        "max_phases": None,
        "outer_delta": 0.1,
        "reset_optimizer_on_phase": True,
        "beam_size": 1,
        "decode_max_steps": 16,
    },
    "sweep": {"ratios": [1, 2, 4, 8], "modes": ["bt", "alter"], "seeds": [0, 1, 2]},
}


class ConfigError(ValueError):
    pass


def merge(base: dict, override: dict, path: str = "") -> dict:
    out = copy.deepcopy(base)
    for key, value in override.items():
        where = f"{path}.{key}" if path else key
        if key not in out:
            raise ConfigError(f"unknown config key {where!r}")
        if isinstance(out[key], dict):
            if not isinstance(value, dict):
                raise ConfigError(f"config key {where!r} must be an object")
            out[key] = merge(out[key], value, where)
        else:
            out[key] = value
    return out


def load_config(path: str | Path | None = None, overrides: dict | None = None) -> dict:
    cfg = copy.deepcopy(DEFAULTS)
    if path is not None:
        cfg = merge(cfg, json.loads(Path(path).read_text(encoding="utf-8")))
    if overrides:
        cfg = merge(cfg, overrides)
    return cfg


def task_spec(cfg: dict, seed: int | None = None) -> TaskSpec:
    return TaskSpec(seed=cfg["seed"] if seed is None else seed, **cfg["task"])


def model_config(cfg: dict, vocab_size: int, seed: int | None = None) -> ModelConfig:
    return ModelConfig(vocab_size=vocab_size, seed=cfg["seed"] if seed is None else seed, **cfg["model"])


def train_config(cfg: dict, seed: int | None = None) -> TrainConfig:
    known = {f.name for f in fields(TrainConfig)}
    extra = set(cfg["train"]) - known
    if extra:
        raise ConfigError(f"unknown train settings: {sorted(extra)}")
    return TrainConfig(seed=cfg["seed"] if seed is None else seed, **cfg["train"])
