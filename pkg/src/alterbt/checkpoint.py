"""Binary checkpoint files and the per-run trajectory store.

File layout::

    b"ALTCKPT1" | uint32 LE metadata length | UTF-8 JSON metadata | float64 LE params
"""

from __future__ import annotations

import json
import os
import struct
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

MAGIC = b"ALTCKPT1"
_HEADER = len(MAGIC) + 4


class CheckpointError(ValueError):
    pass


@dataclass
class Checkpoint:
    params: np.ndarray
    meta: dict = field(default_factory=dict)

    @property
    def step(self) -> int:
        return int(self.meta["global_step"])

    @property
    def phase(self) -> str:
        return self.meta["phase"]

    @property
    def dev_bleu(self) -> float:
        return float(self.meta["dev_bleu"])


def make_meta(global_step: int, cycle: int, phase: str, dev_bleu: float, config_hash: str) -> dict:
    if not 0.0 <= dev_bleu <= 100.0:
        raise CheckpointError(f"dev BLEU {dev_bleu} outside [0, 100]")
    return {
        "global_step": int(global_step),
        "cycle": int(cycle),
        "phase": phase,
        "dev_bleu": float(dev_bleu),
        "config_hash": config_hash,
        "created": _timestamp(),
    }


def _timestamp() -> float:
    # SOURCE_DATE_EPOCH pins the stamp so that repeated runs write identical files
    fixed = os.environ.get("SOURCE_DATE_EPOCH")
    return float(fixed) if fixed else time.time()


def filename(global_step: int, phase: str) -> str:
    return f"ckpt_{global_step}_{phase}.bin"


def to_bytes(ckpt: Checkpoint) -> bytes:
    meta = dict(ckpt.meta)
    meta["num_params"] = int(ckpt.params.size)
    blob = json.dumps(meta, sort_keys=True).encode("utf-8")
    params = np.ascontiguousarray(ckpt.params, dtype="<f8")
    return MAGIC + struct.pack("<I", len(blob)) + blob + params.tobytes()


def save(ckpt: Checkpoint, path: str | Path) -> None:
    """Write atomically: a temp file in the same directory, then rename."""
    path = Path(path)
    data = to_bytes(ckpt)
    try:
        fd, tmp = tempfile.mkstemp(prefix=".tmp_", dir=path.parent)
        with os.fdopen(fd, "wb") as f:
            f.write(data)
        os.replace(tmp, path)
    except OSError as e:
        raise OSError(f"cannot write checkpoint {path}: {e}") from e


def _read_header(f, path) -> dict:
    head = f.read(_HEADER)
    if len(head) < len(MAGIC) or head[: len(MAGIC)] != MAGIC:
        if len(head) == 0:
            raise CheckpointError(f"{path}: not a checkpoint (empty file)")
        raise CheckpointError(f"{path}: not a checkpoint")
    if len(head) < _HEADER:
        raise CheckpointError(f"{path}: corrupt checkpoint (truncated header)")
    (n,) = struct.unpack("<I", head[len(MAGIC):])
    blob = f.read(n)
    if len(blob) != n:
        raise CheckpointError(f"{path}: corrupt checkpoint (truncated metadata)")
    try:
        return json.loads(blob.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise CheckpointError(f"{path}: corrupt checkpoint (bad metadata)") from e


def load(path: str | Path) -> Checkpoint:
    path = Path(path)
    with open(path, "rb") as f:
        meta = _read_header(f, path)
        raw = f.read()
    count = meta.get("num_params")
    if raw and len(raw) % 8:
        raise CheckpointError(f"{path}: corrupt checkpoint (partial float)")
    if count is not None and len(raw) != 8 * count:
        raise CheckpointError(f"{path}: corrupt checkpoint (expected {count} params, found {len(raw) // 8})")
    params = np.frombuffer(raw, dtype="<f8").astype(np.float64)
    if not np.all(np.isfinite(params)):
        raise CheckpointError(f"{path}: non-finite parameters")
    return Checkpoint(params, meta)


@dataclass
class TrajectoryEntry:
    """Metadata of one stored checkpoint; parameters are read on demand."""

    path: Path
    meta: dict

    @property
    def step(self) -> int:
        return int(self.meta["global_step"])

    @property
    def phase(self) -> str:
        return self.meta["phase"]

    @property
    def dev_bleu(self) -> float:
        return float(self.meta["dev_bleu"])

    def load(self) -> Checkpoint:
        return load(self.path)


def list_trajectory(run_dir: str | Path) -> list[TrajectoryEntry]:
    run_dir = Path(run_dir)
    if not run_dir.is_dir():
        raise FileNotFoundError(f"no such run directory: {run_dir}")
    entries = []
    for path in run_dir.glob("ckpt_*.bin"):
        with open(path, "rb") as f:
            entries.append(TrajectoryEntry(path, _read_header(f, path)))
    entries.sort(key=lambda e: e.step)
    return entries


def check_same_layout(hashes) -> str:
    hashes = set(hashes)
    if len(hashes) != 1:
        raise CheckpointError(f"checkpoints come from different model configs: {sorted(hashes)}")
    return hashes.pop()
