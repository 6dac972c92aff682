"""BLEU on the plane through s1, a1 and s2 of an alternated run.

The plane is spanned by the two moves a1 - s1 and s2 - s1, so s1 sits at the
origin, a1 at (1, 0) and s2 at (0, 1). Every evaluated checkpoint between s1
and s2 is projected onto the plane and, when its projection falls in a region
whose BLEU disagrees with its own, pulled to the nearest point of a region
with the matching BLEU band.

Writes landscape.json and landscape.svg to the current directory.

    python3 demos/landscape.py
"""

from alterbt import config as C
from alterbt.experiment import prepare_task, synthetic_corpus
from alterbt.landscape import default_levels, eval_grid, export_landscape, extract_contours, make_plane, project_trajectory, render_svg
from alterbt.model import TranslationModel
from alterbt import checkpoint as ck
from alterbt.scheduler import evaluate_dev, run_training

cfg = C.load_config(overrides={
    "data": {"n_authentic": 400, "n_dev": 60, "n_backward": 300},
    "train": {"max_steps": 1500, "patience": 100, "eval_interval": 25, "outer_delta": -1.0},
})
seed = 2
task = prepare_task(cfg, seed)
synthetic = synthetic_corpus(cfg, task, 4 * len(task.authentic), tagged=False, seed=seed)
model = TranslationModel(C.model_config(cfg, len(task.vocab), seed))
tc = C.train_config(cfg, seed)
evaluate = lambda p: evaluate_dev(model, p, task.dev, 1, tc.decode_max_steps)
result = run_training("alter", model, tc, task.authentic, synthetic, evaluate)
print("phases:", result.phase_trace)

anchors = []
for label in ("s1", "a1", "s2"):
    rec = next(p for p in result.phases if p.label == label)
    meta = ck.make_meta(rec.best_step, rec.cycle, rec.phase, rec.best_bleu, model.config.layout_hash())
    anchors.append(ck.Checkpoint(result.phase_params[label], meta))
plane = make_plane(*anchors)
grid = eval_grid(plane, evaluate, resolution=(21, 21))
regions = extract_contours(grid, default_levels(grid))

lo, hi = anchors[0].step, anchors[2].step
trajectory = [c for c in result.trajectory if lo <= c.step <= hi]
points = project_trajectory(plane, regions, trajectory)

# coarse text rendering: one character per grid node, darker is higher BLEU
shades = " .:-=+*#%@"
top = max(grid.values.max(), 1e-9)
for row in grid.values[::-1]:
    print("".join(shades[min(int(v / top * (len(shades) - 1)), len(shades) - 1)] * 2 for v in row))
for c, p in zip(trajectory, points):
    mark = " snapped" if p.snapped else ""
    print(f"step {c.step:>5} {c.phase} bleu {c.dev_bleu:6.2f} at ({p.x:+.3f}, {p.y:+.3f}){mark}")

export_landscape(grid, regions, points, "landscape.json", plane, {"seed": seed})
render_svg(grid, regions, points, "landscape.svg")
print("wrote landscape.json and landscape.svg")
