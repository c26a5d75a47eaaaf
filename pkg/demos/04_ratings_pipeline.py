"""Cleaning crowdsourced acceptability ratings.

Simulates a 20-person crowd (two of them spammers who answer uniformly
at random) rating a degraded test set on the 1-4 scale, then runs the
four-stage pipeline:

    raw -> worker filter -> calibration -> outlier removal -> means

and checks that the cleaned means track the generative truth better
than the raw ones.

    python3 demos/04_ratings_pipeline.py
"""
import math
from collections import defaultdict

from acceptability import (
    AnnotatorPool,
    ExperimentType,
    build_testset,
    load_corpus,
    pearson,
    run_pipeline,
    simulate_ratings,
    toy_corpus_path,
    true_mean_by_sentence,
)

corpus = load_corpus(toy_corpus_path())
testset = build_testset(corpus, n_targets=30, levels=[1, 2, 3, 4], seed=1)
originals = {s.id for s in testset if s.degradation_level == 0}

pool = AnnotatorPool(n_annotators=20, n_spammers=2)
records = simulate_ratings(testset, seed=42, pool=pool)
print(f"{len(records)} raw ratings from {pool.n_annotators} annotators "
      f"({pool.n_spammers} spammers) over {len(testset)} sentences")

result = run_pipeline(records, originals)
audit = result.audit

print(f"\nworker filter: removed {len(audit.removed_workers)} of "
      f"{pool.n_annotators} workers")
for w in audit.removed_workers:
    print(f"  {w.worker_id}: only {w.fraction_ok:.0%} of their "
          f"original-sentence ratings were >= 3")
print(f"calibration: shifted {len(audit.adjustments)} workers "
      "toward the grand mean")
for a in audit.adjustments:
    print(f"  {a.worker_id}: mean {a.worker_mean:.2f} vs grand "
          f"{a.grand_mean:.2f}, shifted {a.delta:+.0f}")
print(f"outlier removal: dropped {len(audit.removed_ratings)} ratings "
      f"({len(audit.removed_ratings) / audit.n_raw:.1%} of raw); e.g.")
for r in audit.removed_ratings[:3]:
    print(f"  {r.worker_id} rated {r.sentence_id} as {r.rating:.0f} "
          f"(group mean {r.group_mean:.2f}, sd {r.group_sd:.2f})")
print(f"final: {audit.n_final} ratings -> {len(result.means)} mean ratings")

# do the cleaned means recover the generative truth?
truth = true_mean_by_sentence(testset)
ids = sorted(truth)
clean = {m.sentence_id: m.mean for m in result.means}

raw_by_sentence = defaultdict(list)
for rec in records:
    raw_by_sentence[rec.sentence_id].append(rec.rating)
raw = {sid: math.fsum(v) / len(v) for sid, v in raw_by_sentence.items()}

r_raw = pearson([truth[i] for i in ids], [raw[i] for i in ids])
r_clean = pearson([truth[i] for i in ids], [clean[i] for i in ids])
print(f"\ncorrelation with the true means: raw {r_raw:.4f} -> "
      f"cleaned {r_clean:.4f}")

# mean rating by degradation level, cleaned
by_level = defaultdict(list)
for s in testset:
    by_level[s.degradation_level].append(clean[s.id])
print("\nmean cleaned rating by degradation level "
      "(true means 4.00 3.25 2.50 1.75 1.00):")
for level in sorted(by_level):
    vals = by_level[level]
    print(f"  level {level}: {math.fsum(vals) / len(vals):.2f}")
