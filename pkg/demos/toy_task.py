"""A walk through the toy translation task and the BLEU scorer.

The task maps source tokens s0..s59 to target tokens t0..t59 through a fixed
random dictionary, then locally reorders the result. Everything is a pure
function of the seed, so the same pairs come back on every run.

    python3 demos/toy_task.py
"""

from alterbt.bleu import corpus_bleu, corpus_stats, format_report
from alterbt.taskgen import NoiseSpec, TaskSpec, corrupt_source, ground_truth_translate, sample_monolingual, sample_parallel
from alterbt.text import decode_ids

spec = TaskSpec(seed=0)
vocab = spec.vocabulary()
print(f"joint vocabulary: {len(vocab)} entries ({vocab.tokens[:5]} reserved)")

pairs = sample_parallel(5, spec)
for src, tgt in pairs:
    print(decode_ids(src, vocab), " -> ", decode_ids(tgt, vocab))

# the translation is deterministic, so a perfect system gets BLEU 100
hyps = [ground_truth_translate(src, spec) for src, _ in sample_parallel(200, spec, start=10_000)]
refs = [tgt for _, tgt in sample_parallel(200, spec, start=10_000)]
print("oracle system:", format_report(corpus_stats(hyps, refs)))

# noisy sources stand in for what a weak backward model produces
noise = NoiseSpec(substitution_prob=0.2, deletion_prob=0.1, seed=1)
src, _ = pairs[0]
noisy = corrupt_source(src, noise, 0, spec)
print("clean source:", decode_ids(src, vocab))
print("noisy source:", decode_ids(noisy, vocab))

# target-side text only: this is what gets back-translated
mono = sample_monolingual(3, spec)
for sent in mono:
    print("mono:", decode_ids(sent, vocab))

print("one differing token in seven:", round(corpus_bleu(["a b c d e f g".split()], ["a b c d e f h".split()]), 2))
