"""A complete acceptability study, end to end, through the CLI.

Generates a degraded test set from the bundled corpus, simulates three
rating crowds (no context / real context / random context), cleans and
aggregates each, trains the n-gram model, scores the test set, compares
model measures against human means, and runs the context-effect
analysis.  Every step is the same `acceptability <subcommand>` a shell
script would call; this demo invokes them in-process and prints the
command lines.

    python3 demos/06_full_study.py
"""
import json
import tempfile
from pathlib import Path

from acceptability import save_ratings, simulate_context_study
from acceptability.cli import main
from acceptability.core import load_testset

work = Path(tempfile.mkdtemp(prefix="study-"))
print(f"workspace: {work}\n")


def run(*args):
    print("$ acceptability " + " ".join(args))
    rc = main(list(args))
    assert rc == 0, f"exit code {rc}"
    print()


# 1. test set: 40 paragraphs x degradation levels 1-4 (+ originals)
run("build-testset", "--corpus", "toy", "--n-targets", "40",
    "--levels", "1,2,3,4", "--seed", "11", "--out", str(work / "ts"))

# 2. three simulated crowds rate it (stand-ins for collected data;
#    with real ratings you would skip straight to `aggregate`)
testset = load_testset(work / "ts" / "testset.jsonl")
records = simulate_context_study(testset, seed=99)
for cond in ("none", "real", "random"):
    save_ratings([r for r in records if r.experiment.value == cond],
                 work / f"ratings_{cond}.csv")
print(f"simulated {len(records)} ratings over three conditions\n")

# 3. clean + aggregate the no-context condition
run("aggregate", "--ratings", str(work / "ratings_none.csv"),
    "--testset", str(work / "ts" / "testset.jsonl"),
    "--out", str(work / "agg_none"))

# 4. train the language model on the same corpus
run("train-lm", "--corpus", "toy", "--order", "3",
    "--out", str(work / "lm"))

# 5. score every test sentence with it
run("score", "--model", str(work / "lm" / "model.json"),
    "--unigram", str(work / "lm" / "unigram.json"),
    "--testset", str(work / "ts" / "testset.jsonl"),
    "--context", "none", "--out", str(work / "scores"))

# 6. which measure best predicts the human means?
run("evaluate", "--scores", str(work / "scores" / "scores.csv"),
    "--mean-ratings", str(work / "agg_none" / "mean_ratings.csv"),
    "--out", str(work / "eval"))

# 7. the context-effect analysis over all three conditions
run("analyze-context",
    "--ratings-none", str(work / "ratings_none.csv"),
    "--ratings-real", str(work / "ratings_real.csv"),
    "--ratings-random", str(work / "ratings_random.csv"),
    "--testset", str(work / "ts" / "testset.jsonl"),
    "--trials", "300", "--seed", "12", "--out", str(work / "ctx"))

# pull the headline numbers back out of the artifacts
evaluation = json.loads((work / "eval" / "evaluation.json").read_text())
best = max(evaluation["pearson_r"]["none"].items(), key=lambda kv: kv[1])
print(f"best measure vs human means: {best[0]} (r = {best[1]:.3f})")

report = json.loads((work / "ctx" / "report.json").read_text())
reg = report["regression_on_no_context"]
print(f"context compression: slopes {reg['real']['slope']:.2f} (real) / "
      f"{reg['random']['slope']:.2f} (random), both < 1")
print(f"coherence boost: offset {reg['offset_real_minus_random']:+.3f} "
      f"(p = {reg['offset_p']:.1e}), "
      f"interaction p = {reg['slope_diff_p']:.2f}")
wil = report["wilcoxon_real_gt_random"]
print(f"real > random one-tailed wilcoxon: p = {wil['p_value']:.2e}")
ub = report["upper_bounds"]["none"]
print(f"agreement ceiling (no context): UB1 {ub['ub_one_vs_rest']['value']:.2f}, "
      f"UB2 {ub['ub_half_vs_half']['value']:.2f}")
