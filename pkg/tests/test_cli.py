import json

import pytest

from alterbt import checkpoint as ck
from alterbt.cli import main

SMALL = {
    "data": {"n_authentic": 120, "n_dev": 20, "n_mono": 60},
    "model": {"embed_dim": 16, "hidden_dim": 32},
    "train": {"max_steps": 60, "patience": 20, "eval_interval": 10, "warmup": 10, "batch_size": 16},
}


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    (d / "small.json").write_text(json.dumps(SMALL))
    assert main(["taskgen", "--config", str(d / "small.json"), "--out", str(d / "task")]) == 0
    return d


def args(d, *rest):
    return ["--config", str(d / "small.json"), *rest]


def test_taskgen_outputs(workdir):
    names = sorted(p.name for p in (workdir / "task").iterdir())
    assert names == ["dev.src", "dev.tgt", "mono.tgt", "task.json", "train.src", "train.tgt", "vocab.txt"]
    assert len((workdir / "task" / "train.src").read_text().splitlines()) == 120
    assert json.loads((workdir / "task" / "task.json").read_text())["reorder_window"] == 2


def test_bleu_identity(workdir, capsys):
    ref = str(workdir / "task" / "dev.tgt")
    assert main(["bleu", "--hyp", ref, "--ref", ref]) == 0
    assert capsys.readouterr().out.startswith("BLEU = 100.00")


def test_usage_errors(workdir, capsys):
    assert main(["train", "--nope"]) == 1
    assert main(["frobnicate"]) == 1
    t = workdir / "task"
    code = main(["train", *args(workdir, "--mode", "bt", "--authentic", str(t / "train"),
                                "--dev", str(t / "dev"), "--out", str(workdir / "x"))])
    assert code == 1
    assert "--synthetic" in capsys.readouterr().err


def test_runtime_error(workdir):
    assert main(["bleu", "--hyp", str(workdir / "missing.txt"), "--ref", str(workdir / "missing.txt")]) == 2


def test_pipeline(workdir):
    t = workdir / "task"
    base = ["--authentic", str(t / "train"), "--dev", str(t / "dev")]
    assert main(["train", *args(workdir, "--mode", "base", "--reverse", *base, "--out", str(workdir / "back"))]) == 0
    assert main(["backtranslate", *args(workdir, "--checkpoint", str(workdir / "back" / "final.bin"),
                                        "--mono", str(t / "mono.tgt"), "--vocab", str(t / "vocab.txt"),
                                        "--out", str(workdir / "syn" / "synthetic"))]) == 0
    manifest = json.loads((workdir / "syn" / "synthetic.manifest.json").read_text())
    assert manifest["tagged"] is False and manifest["pairs"] == 60
    assert len(manifest["checkpoint_sha256"]) == 64

    run = workdir / "alter"
    assert main(["train", *args(workdir, "--mode", "alter-tagged", *base, "--synthetic", str(workdir / "syn" / "synthetic"),
                                "--out", str(run))]) == 0
    cfg = json.loads((run / "config.json").read_text())
    assert cfg["mode"] == "alter-tagged" and cfg["config"]["train"]["max_steps"] == 60
    summary = json.loads((run / "summary.json").read_text())
    assert set(summary["time_fractions"]) == {"S", "A"}
    assert summary["phases"][0]["label"] == "s1"
    log = [json.loads(l) for l in (run / "train.log.jsonl").read_text().splitlines()]
    assert [r["step"] for r in log] == list(range(1, summary["global_steps"] + 1))
    traj = ck.list_trajectory(run)
    assert [e.step for e in traj] == list(range(10, summary["global_steps"] + 1, 10))
    phases = "".join(p["phase"] for p in summary["phases"])
    seen = "".join(e.phase for i, e in enumerate(traj) if i == 0 or e.phase != traj[i - 1].phase)
    assert seen == phases
    final = ck.load(run / "final.bin")
    assert final.meta["model"]["embed_dim"] == 16


def test_landscape_command(workdir):
    t = workdir / "task"
    run = workdir / "land_run"
    cfg = dict(SMALL, train=dict(SMALL["train"], max_steps=80, patience=10, outer_delta=-1.0))
    (workdir / "land.json").write_text(json.dumps(cfg))
    assert main(["train", "--config", str(workdir / "land.json"), "--mode", "alter", "--authentic", str(t / "train"),
                 "--synthetic", str(t / "train"), "--dev", str(t / "dev"), "--out", str(run)]) == 0
    out = workdir / "land_out.json"
    assert main(["landscape", "--run", str(run), "--cycle", "1", "--dev", str(t / "dev"), "--res", "7,7",
                 "--out", str(out), "--svg", str(workdir / "land.svg")]) == 0
    data = json.loads(out.read_text())
    ids = [p["id"] for p in data["points"]]
    assert ids[0] == "s1" and ids[-1] == "s2" and "a1" in ids
    anchors = {p["id"]: (p["x_hat"], p["y_hat"]) for p in data["points"]}
    assert anchors["s1"] == (0, 0) and anchors["a1"] == (1, 0) and anchors["s2"] == (0, 1)
    assert main(["landscape", "--run", str(run), "--cycle", "9", "--dev", str(t / "dev"), "--out", str(out)]) == 2
    assert main(["landscape", "--run", str(run), "--dev", str(t / "dev"), "--range", "1,2", "--out", str(out)]) == 1


def test_sweep_command(workdir, capsys):
    cfg = dict(SMALL, data=dict(SMALL["data"], n_backward=60), train=dict(SMALL["train"], max_steps=20))
    (workdir / "sweep.json").write_text(json.dumps(cfg))
    out = workdir / "sweep"
    assert main(["sweep", "--config", str(workdir / "sweep.json"), "--ratios", "1,2", "--seeds", "0",
                 "--out", str(out)]) == 0
    rows = (out / "sweep.csv").read_text().splitlines()
    assert rows[0].startswith("ratio,mode,seed,final_dev_bleu")
    assert len(rows) == 1 + 2 * 2
    assert "ratio" in capsys.readouterr().out
