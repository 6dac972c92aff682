"""Command-line entry point: ``alterbt <subcommand> ...``.

Exit codes: 0 success, 1 usage error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path

from . import checkpoint as ck
from . import config as C
from .backtranslation import DecodeConfig, build_synthetic_corpus, params_digest, synthesize
from .bleu import corpus_stats, format_report
from .experiment import run_sweep, summary_table
from .landscape import (
    DEFAULT_RANGE,
    DEFAULT_RESOLUTION,
    default_levels,
    eval_grid,
    export_landscape,
    extract_contours,
    make_plane,
    project_trajectory,
    render_svg,
)
from .model import ModelConfig, TranslationModel
from .scheduler import MODES, evaluate_dev, run_training
from .taskgen import sample_dev, sample_monolingual, sample_parallel
from .text import TAG, UNK, ParallelCorpus, Vocabulary, load_monolingual, load_parallel

log = logging.getLogger("alterbt")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _floats(text: str, n: int, name: str) -> tuple:
    try:
        vals = tuple(float(v) for v in text.split(","))
    except ValueError:
        raise UsageError(f"{name} must be {n} comma-separated numbers") from None
    if len(vals) != n:
        raise UsageError(f"{name} must be {n} comma-separated numbers")
    return vals


def _load_cfg(args, overrides: dict | None = None) -> dict:
    cfg = C.load_config(args.config, overrides)
    if args.seed is not None:
        cfg["seed"] = args.seed
    return cfg


def _vocab_for(prefix: str, explicit: str | None) -> Vocabulary:
    path = Path(explicit) if explicit else Path(prefix).parent / "vocab.txt"
    if not path.exists():
        raise UsageError(f"vocabulary file {path} not found (pass --vocab)")
    return Vocabulary.load(path)


def _parallel(prefix: str, vocab: Vocabulary) -> ParallelCorpus:
    return load_parallel(f"{prefix}.src", f"{prefix}.tgt", vocab)


def _write_json(path: Path, data) -> None:
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n", encoding="utf-8")


# taskgen

def cmd_taskgen(args) -> None:
    cfg = _load_cfg(args)
    spec = C.task_spec(cfg)
    data = cfg["data"]
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    vocab = spec.vocabulary()
    vocab.save(out / "vocab.txt")
    sample_parallel(data["n_authentic"], spec).save(out / "train", vocab)
    sample_dev(data["n_dev"], spec).save(out / "dev", vocab)
    sample_monolingual(data["n_mono"], spec).save(out / "mono.tgt", vocab)
    (out / "task.json").write_text(spec.to_json() + "\n", encoding="utf-8")
    print(f"wrote task to {out}")


# train

def _prepare_synthetic(synthetic: ParallelCorpus, mode: str) -> ParallelCorpus:
    """Tag or untag synthetic sources to match the training mode."""
    tagged = mode.endswith("tagged")
    pairs = []
    for src, tgt in synthetic:
        body = list(src[1:]) if src and src[0] == TAG else list(src)
        body = body or [UNK]
        pairs.append(([TAG] + body if tagged else body, tgt))
    return ParallelCorpus.from_pairs(pairs)


def cmd_train(args) -> None:
    if args.mode != "base" and not args.synthetic:
        raise UsageError(f"--synthetic is required for mode {args.mode}")
    cfg = _load_cfg(args)
    seed = cfg["seed"]
    vocab = _vocab_for(args.authentic, args.vocab)
    authentic = _parallel(args.authentic, vocab)
    dev = _parallel(args.dev, vocab)
    synthetic = _prepare_synthetic(_parallel(args.synthetic, vocab), args.mode) if args.synthetic else None
    if args.reverse:
        if synthetic is not None:
            raise UsageError("--reverse trains a backward model and takes no --synthetic")
        authentic, dev = authentic.swapped(), dev.swapped()

    model_cfg = C.model_config(cfg, len(vocab))
    model = TranslationModel(model_cfg)
    tc = C.train_config(cfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_json(out / "config.json", {
        "config": cfg,
        "mode": args.mode,
        "reverse": bool(args.reverse),
        "model": model_cfg.to_dict(),
        "inputs": {"authentic": args.authentic, "synthetic": args.synthetic, "dev": args.dev,
                   "vocab": str(args.vocab or Path(args.authentic).parent / "vocab.txt")},
    })
    for old in out.glob("ckpt_*.bin"):
        old.unlink()

    model_meta = model_cfg.to_dict()

    def on_checkpoint(c: ck.Checkpoint) -> None:
        meta = dict(c.meta, model=model_meta)
        ck.save(ck.Checkpoint(c.params, meta), out / ck.filename(meta["global_step"], meta["phase"]))

    evaluator = lambda p: evaluate_dev(model, p, dev, tc.beam_size, tc.decode_max_steps)
    result = run_training(args.mode, model, tc, authentic, synthetic, evaluator,
                          on_checkpoint=on_checkpoint, keep_params=False)

    with open(out / "train.log.jsonl", "w", encoding="utf-8") as f:
        for rec in result.step_log.records:
            f.write(json.dumps(rec, sort_keys=True) + "\n")
    for rec in result.phases:
        meta = ck.make_meta(rec.best_step, rec.cycle, rec.phase, rec.best_bleu, model_cfg.layout_hash())
        meta.update(model=model_meta, label=rec.label)
        ck.save(ck.Checkpoint(result.phase_params[rec.label], meta), out / f"phase_{rec.label}.bin")
    last = result.phases[-1] if result.phases else None
    final_meta = ck.make_meta(result.global_step, last.cycle if last else 0, last.phase if last else "A",
                              result.final_bleu, model_cfg.layout_hash())
    final_meta.update(model=model_meta, label="final", mode=args.mode)
    ck.save(ck.Checkpoint(result.final_params, final_meta), out / "final.bin")
    summary = result.summary()
    summary["seed"] = seed
    _write_json(out / "summary.json", summary)
    print(f"final dev BLEU {result.final_bleu:.2f} after {result.global_step} steps ({result.phase_trace})")


# backtranslate

def _model_from_meta(meta: dict) -> TranslationModel:
    if "model" not in meta:
        raise UsageError("checkpoint carries no model configuration")
    return TranslationModel(ModelConfig(**meta["model"]))


def cmd_backtranslate(args) -> None:
    cfg = _load_cfg(args)
    vocab = Vocabulary.load(args.vocab)
    ckpt = ck.load(args.checkpoint)
    model = _model_from_meta(ckpt.meta)
    if model.config.vocab_size != len(vocab):
        raise UsageError(f"checkpoint expects {model.config.vocab_size} tokens, vocabulary has {len(vocab)}")
    mono = load_monolingual(args.mono, vocab)
    if args.limit is not None:
        mono = mono[: args.limit]
    decode = DecodeConfig(beam_size=args.beam or cfg["train"]["beam_size"],
                          max_steps=cfg["train"]["decode_max_steps"])
    sources = synthesize(model, ckpt.params, mono, decode)
    corpus = build_synthetic_corpus(sources, mono, args.tagged)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    corpus.save(out, vocab)
    _write_json(Path(f"{out}.manifest.json"), {
        "checkpoint": str(args.checkpoint),
        "checkpoint_sha256": params_digest(ckpt.params),
        "decode": {"beam_size": decode.beam_size, "max_steps": decode.max_steps},
        "tagged": bool(args.tagged),
        "pairs": len(corpus),
    })
    print(f"wrote {len(corpus)} synthetic pairs to {out}.src / {out}.tgt")


# bleu

def cmd_bleu(args) -> None:
    hyps = [line.split() for line in _lines(args.hyp)]
    refs = [line.split() for line in _lines(args.ref)]
    if len(hyps) != len(refs):
        raise UsageError(f"{len(hyps)} hypotheses for {len(refs)} references")
    stats = corpus_stats(hyps, refs)
    print(format_report(stats))


def _lines(path: str) -> list[str]:
    return Path(path).read_text(encoding="utf-8").splitlines()


# landscape

def cmd_landscape(args) -> None:
    run = Path(args.run)
    t = args.cycle
    if t < 1:
        raise UsageError("--cycle counts from 1")
    xy_range = _floats(args.range, 4, "--range") if args.range else DEFAULT_RANGE
    res = tuple(int(v) for v in _floats(args.res, 2, "--res")) if args.res else DEFAULT_RESOLUTION
    anchors = [run / f"phase_{name}.bin" for name in (f"s{t}", f"a{t}", f"s{t + 1}")]
    missing = [p.name for p in anchors if not p.exists()]
    if missing:
        raise RuntimeError(f"run has no phase checkpoints {missing} (needs cycles {t} and {t + 1})")
    c_s, c_a, c_s2 = (ck.load(p) for p in anchors)
    ck.check_same_layout([c.meta["config_hash"] for c in (c_s, c_a, c_s2)])
    model = _model_from_meta(c_s.meta)
    run_cfg = json.loads((run / "config.json").read_text(encoding="utf-8"))
    vocab = _vocab_for(args.dev, args.vocab or run_cfg["inputs"]["vocab"])
    dev = _parallel(args.dev, vocab)
    if run_cfg.get("reverse"):
        dev = dev.swapped()
    max_steps = run_cfg["config"]["train"]["decode_max_steps"]

    plane = make_plane(c_s, c_a, c_s2)
    grid = eval_grid(plane, lambda p: evaluate_dev(model, p, dev, 1, max_steps), xy_range, res)
    if args.levels in (None, "auto"):
        levels = default_levels(grid)
    else:
        levels = sorted(_floats(args.levels, len(args.levels.split(",")), "--levels"))
    regions = extract_contours(grid, levels)

    lo, hi = c_s.meta["global_step"], c_s2.meta["global_step"]
    entries = [e for e in ck.list_trajectory(run) if lo <= e.step <= hi]
    by_step = {e.step: e for e in entries}
    for c in (c_s, c_a, c_s2):
        by_step.pop(c.meta["global_step"], None)
    trajectory = sorted([*by_step.values(), c_s, c_a, c_s2], key=lambda c: c.step)
    points = project_trajectory(plane, regions, trajectory)

    meta = {"run": str(run), "cycle": t, "anchors": [p.name for p in anchors],
            "anchor_bleu": [c.dev_bleu for c in (c_s, c_a, c_s2)]}
    export_landscape(grid, regions, points, args.out, plane, meta)
    if args.svg:
        render_svg(grid, regions, points, args.svg)
    print(f"landscape: {res[0]}x{res[1]} grid, {len(regions.regions)} regions, {len(points)} points -> {args.out}")


# sweep

def cmd_sweep(args) -> None:
    cfg = _load_cfg(args)
    seeds = [int(s) for s in args.seeds.split(",")] if args.seeds else None
    ratios = [int(r) for r in args.ratios.split(",")] if args.ratios else None
    modes = args.modes.split(",") if args.modes else None
    for m in modes or []:
        if m not in MODES:
            raise UsageError(f"unknown mode {m!r}")
    started = time.perf_counter()
    rows = run_sweep(cfg, ratios, modes, seeds, args.out)
    print(summary_table(rows))
    print(f"sweep finished in {time.perf_counter() - started:.0f}s; results in {args.out}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config; unspecified keys take defaults")
    common.add_argument("--seed", type=int, help="overrides the config seed")
    common.add_argument("-v", "--verbose", action="store_true")

    p = _Parser(prog="alterbt", description="Alternated training with synthetic and authentic data on a toy task.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("taskgen", parents=[common], help="write a toy task")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_taskgen)

    s = sub.add_parser("train", parents=[common], help="train a model")
    s.add_argument("--mode", choices=MODES, required=True)
    s.add_argument("--authentic", required=True, help="corpus prefix (.src/.tgt)")
    s.add_argument("--synthetic", help="synthetic corpus prefix; required unless --mode base")
    s.add_argument("--dev", required=True)
    s.add_argument("--vocab", help="defaults to vocab.txt next to the authentic corpus")
    s.add_argument("--reverse", action="store_true", help="train target-to-source (backward model)")
    s.add_argument("--out", required=True, help="run directory")
    s.set_defaults(func=cmd_train)

    s = sub.add_parser("backtranslate", parents=[common], help="decode monolingual text into synthetic pairs")
    s.add_argument("--checkpoint", required=True, help="backward model checkpoint")
    s.add_argument("--mono", required=True)
    s.add_argument("--vocab", required=True)
    s.add_argument("--out", required=True, help="output prefix")
    s.add_argument("--tagged", action="store_true")
    s.add_argument("--beam", type=int)
    s.add_argument("--limit", type=int, help="decode only the first N sentences")
    s.set_defaults(func=cmd_backtranslate)

    s = sub.add_parser("bleu", parents=[common], help="corpus BLEU of a hypothesis file")
    s.add_argument("--hyp", required=True)
    s.add_argument("--ref", required=True)
    s.set_defaults(func=cmd_bleu)

    s = sub.add_parser("landscape", parents=[common], help="BLEU landscape around cycle t of a run")
    s.add_argument("--run", required=True)
    s.add_argument("--cycle", type=int, default=1)
    s.add_argument("--dev", required=True)
    s.add_argument("--vocab")
    s.add_argument("--range", help="x0,x1,y0,y1")
    s.add_argument("--res", help="nx,ny")
    s.add_argument("--levels", default="auto", help="'auto' or comma-separated BLEU levels")
    s.add_argument("--out", required=True)
    s.add_argument("--svg")
    s.set_defaults(func=cmd_landscape)

    s = sub.add_parser("sweep", parents=[common], help="final dev BLEU across synthetic:authentic ratios")
    s.add_argument("--out", required=True)
    s.add_argument("--ratios", help="comma-separated, default 1,2,4,8")
    s.add_argument("--modes", help="comma-separated, default bt,alter")
    s.add_argument("--seeds", help="comma-separated, default 0,1,2")
    s.set_defaults(func=cmd_sweep)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(asctime)s %(name)s %(message)s")
    try:
        args.func(args)
    except (UsageError, C.ConfigError) as e:
        print(f"alterbt {args.command}: error: {e}", file=sys.stderr)
        return 1
    except Exception as e:  # noqa: BLE001
        print(f"alterbt {args.command}: {type(e).__name__}: {e}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
