"""Back-translation versus alternated training on a reduced toy setup.

Steps: train a backward (target-to-source) model on a slice of the authentic
data, decode monolingual target text into synthetic pairs, then train a
forward model two ways:

  bt     one pass over synthetic + authentic data
  alter  S phases (synthetic + authentic) alternating with A phases
         (authentic only) until a cycle stops helping

About a minute on a laptop CPU.

    python3 demos/alternated_training.py
"""

import logging

from alterbt import config as C
from alterbt.experiment import prepare_task, synthetic_corpus, train_mode

logging.basicConfig(level=logging.INFO, format="%(message)s")

cfg = C.load_config(overrides={
    "data": {"n_authentic": 600, "n_dev": 100, "n_backward": 300},
    "train": {"max_steps": 4000, "patience": 200},
})
seed = 1
task = prepare_task(cfg, seed)
ratio = 4
synthetic = synthetic_corpus(cfg, task, ratio * len(task.authentic), tagged=False, seed=seed)
print(f"backward model dev BLEU {task.backward_bleu:.2f}; {len(synthetic)} synthetic pairs")

for mode in ("bt", "alter"):
    result = train_mode(cfg, task, mode, synthetic, seed)
    print(f"\n{mode}: final dev BLEU {result.final_bleu:.2f} after {result.global_step} steps")
    for p in result.phases:
        print(f"  {p.label:>3}  steps {p.start_step:>5}-{p.end_step:<5} best {p.best_bleu:6.2f} at {p.best_step}")
    frac = result.time_fractions()
    print(f"  time in S {frac['S']:.0%}, in A {frac['A']:.0%}")
