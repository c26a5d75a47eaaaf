"""Building a graded acceptability test set and crowd work units.

Target sentences are sampled from corpus paragraphs, each paired with
its three preceding sentences as "real context" plus a random context
drawn from another document, and degraded at increasing levels by
word-level noise (drop / duplicate / swap / substitute).  The degraded
variants are then bundled into 10-sentence HITs: 2 originals + 8
degraded items whose sources are all distinct and foreign to the HIT.

    python3 demos/03_testset_and_hits.py
"""
from collections import Counter

from acceptability import (
    NoiseOp,
    apply_op,
    assign_random_contexts,
    build_hits,
    build_testset,
    degrade,
    load_corpus,
    source_key,
    toy_corpus_path,
    validate_hits,
)

# the four primitive noise operations on a toy sentence
sentence = ("the", "hungry", "fox", "waited", "near", "the", "barn")
print("original:       ", " ".join(sentence))
print("drop @3:        ", " ".join(apply_op(NoiseOp.DROP_WORD, sentence, 3)))
print("duplicate @2:   ",
      " ".join(apply_op(NoiseOp.DUPLICATE_WORD, sentence, 2)))
print("swap @0:        ",
      " ".join(apply_op(NoiseOp.SWAP_ADJACENT, sentence, 0)))
print("substitute @4:  ",
      " ".join(apply_op(NoiseOp.SUBSTITUTE_FROM_VOCAB, sentence, 4,
                        replacement="behind")))

# degrade() chains `level` randomly chosen operations; the chains are
# nested, so level k+1 is level k plus one more edit with the same seed
print()
for seed in (7, 8):
    print(f"seed {seed}:")
    for level in range(1, 5):
        print(f"  level {level}: {' '.join(degrade(sentence, level, seed))}")

# a full test set: 10 targets x 4 degradation levels (+ the originals)
corpus = load_corpus(toy_corpus_path())
testset = build_testset(corpus, n_targets=10, levels=[1, 2, 3, 4], seed=5)
testset = assign_random_contexts(testset, corpus, seed=6)
print(f"\ntest set: {len(testset)} sentences, levels "
      f"{Counter(s.degradation_level for s in testset)}")

family = [s for s in testset if source_key(s.id) == source_key(testset[0].id)]
print(f"\none family ({source_key(family[0].id)}):")
print("  real context:  ", " | ".join(" ".join(c)
                                      for c in family[0].real_context))
print("  random context:", " | ".join(" ".join(c)
                                      for c in family[0].random_context))
for s in family:
    print(f"  L{s.degradation_level} {s.id:<14} {' '.join(s.target)}")

# HITs: the work units a crowd worker would see.  Ten sentences each,
# exactly two originals, and the eight degraded items come from eight
# different source sentences, none of them this HIT's own originals --
# so a worker can't anchor a degraded item against its pristine twin.
hits = build_hits(testset, seed=9)
validate_hits(hits, testset)
print(f"\n{len(hits)} HITs built and validated; first HIT:")
by_id = {s.id: s for s in testset}
for sid in hits[0].sentence_ids:
    s = by_id[sid]
    tag = "ORIGINAL" if s.degradation_level == 0 else f"level {s.degradation_level}"
    print(f"  {tag:<9} {' '.join(s.target)}")
