import json
import struct

import numpy as np
import pytest

from alterbt import checkpoint as ck


def _ckpt(params, step=10, phase="S", bleu=12.5):
    return ck.Checkpoint(np.asarray(params, dtype=np.float64), ck.make_meta(step, 0, phase, bleu, "abc"))


def test_round_trip_special_values(tmp_path):
    params = np.array([0.0, -0.0, 5e-324, -5e-324, 2.2250738585072014e-308, 1e308, -1.5, np.pi])
    c = _ckpt(params)
    ck.save(c, tmp_path / "a.bin")
    back = ck.load(tmp_path / "a.bin")
    assert back.params.tobytes() == params.tobytes()
    assert np.signbit(back.params[1])
    assert back.meta == json.loads(json.dumps(dict(c.meta, num_params=params.size)))


def test_file_size(tmp_path):
    c = _ckpt(np.arange(7.0))
    ck.save(c, tmp_path / "a.bin")
    raw = (tmp_path / "a.bin").read_bytes()
    (n,) = struct.unpack("<I", raw[8:12])
    assert len(raw) == 12 + n + 8 * 7


def test_rejects_bad_files(tmp_path):
    good = tmp_path / "good.bin"
    ck.save(_ckpt(np.arange(5.0)), good)
    raw = good.read_bytes()
    cases = {
        "empty.bin": (b"", "not a checkpoint"),
        "magic.bin": (b"XXXXXXXX" + raw[8:], "not a checkpoint"),
        "trunc.bin": (raw[:-3], "corrupt checkpoint"),
        "short.bin": (raw[:-8], "corrupt checkpoint"),
        "header.bin": (raw[:10], "corrupt checkpoint"),
        "meta.bin": (raw[:12] + b"[" + raw[13:], "corrupt checkpoint"),
    }
    for name, (data, msg) in cases.items():
        (tmp_path / name).write_bytes(data)
        with pytest.raises(ck.CheckpointError, match=msg):
            ck.load(tmp_path / name)
    nan = ck.to_bytes(_ckpt(np.array([1.0, np.nan])))
    (tmp_path / "nan.bin").write_bytes(nan)
    with pytest.raises(ck.CheckpointError, match="non-finite parameters"):
        ck.load(tmp_path / "nan.bin")


def test_meta_validation():
    with pytest.raises(ck.CheckpointError):
        ck.make_meta(1, 0, "S", 100.5, "abc")


def test_pinned_timestamp(monkeypatch):
    monkeypatch.setenv("SOURCE_DATE_EPOCH", "1700000000")
    assert ck.make_meta(1, 0, "A", 1.0, "h")["created"] == 1700000000.0


def test_trajectory(tmp_path):
    with pytest.raises(FileNotFoundError):
        ck.list_trajectory(tmp_path / "missing")
    assert ck.list_trajectory(tmp_path) == []
    for step, phase in [(100, "A"), (50, "S"), (150, "A"), (1000, "S")]:
        ck.save(_ckpt(np.full(3, step / 7), step=step, phase=phase), tmp_path / ck.filename(step, phase))
    entries = ck.list_trajectory(tmp_path)
    assert [e.step for e in entries] == [50, 100, 150, 1000]
    assert [e.phase for e in entries] == ["S", "A", "A", "S"]
    assert np.array_equal(entries[1].load().params, np.full(3, 100 / 7))


def test_layout_check():
    assert ck.check_same_layout(["a", "a"]) == "a"
    with pytest.raises(ValueError):
        ck.check_same_layout(["a", "b"])


def test_no_temp_files_left(tmp_path):
    ck.save(_ckpt(np.zeros(4)), tmp_path / "x.bin")
    assert [p.name for p in tmp_path.iterdir()] == ["x.bin"]
