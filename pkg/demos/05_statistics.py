"""The statistics used to analyze rating studies.

Pearson correlation, the one-tailed Wilcoxon signed-rank test (exact
for small samples), OLS line fits with an offset-vs-interaction
comparison, and the two annotator-agreement upper bounds that say how
well ANY model could correlate with a crowd's mean ratings.

    python3 demos/05_statistics.py
"""
import numpy as np

from acceptability import (
    compare_regression_lines,
    fit_line,
    pearson,
    ub_half_vs_half,
    ub_one_vs_rest,
    wilcoxon_one_tailed,
)

rng = np.random.default_rng(0)

# --- Pearson ---------------------------------------------------------
x = rng.normal(0, 1, 40)
y = 0.8 * x + rng.normal(0, 0.5, 40)
print(f"pearson on correlated noise: {pearson(x.tolist(), y.tolist()):.4f}")
print(f"pearson on a perfect line:   {pearson([1, 2, 3], [2, 4, 6]):.4f}")

# --- Wilcoxon signed-rank, one-tailed --------------------------------
# Did condition A score higher than condition B on the same items?
# With <= 20 nonzero differences the p-value is exact (all 2^m sign
# flips enumerated); beyond that, a tie-corrected normal approximation.
a = [3.2, 3.6, 3.1, 3.8, 3.5, 3.3, 3.9, 3.4]
b = [3.0, 3.1, 3.2, 3.3, 3.1, 3.0, 3.5, 3.2]
res = wilcoxon_one_tailed(a, b)
print(f"\nwilcoxon A > B: W+ = {res.statistic}, p = {res.p_value:.4f} "
      f"({res.method}, {res.n_pairs} pairs)")
# the smallest possible exact p with 5 pairs is 1/32:
res5 = wilcoxon_one_tailed([1, 2, 3, 4, 5], [0, 0, 0, 0, 0])
print(f"five positive differences: p = {res5.p_value} (= 1/32)")

# --- regression lines: offset vs interaction -------------------------
# Two rating conditions measured over the same items.  A vertical
# offset means one condition is uniformly shifted; a slope difference
# (interaction) would mean the shift grows with the item's value.
items = rng.uniform(1, 4, 100)
cond1 = 0.8 * items + 0.4 + rng.normal(0, 0.15, 100)     # compressed
cond2 = cond1 + 0.25 + rng.normal(0, 0.05, 100)          # shifted up
f1 = fit_line(items.tolist(), cond1.tolist())
print(f"\ncondition 1 on items: slope {f1.slope:.3f} "
      f"(se {f1.slope_se:.3f}), intercept {f1.intercept:.3f}, r {f1.r:.3f}")
cmp = compare_regression_lines(items.tolist(), cond1.tolist(),
                               cond2.tolist())
print(f"condition 2 vs 1: offset {cmp.offset:+.3f} (p = {cmp.offset_p:.2e})"
      f", slope difference {cmp.slope_diff:+.3f} "
      f"(p = {cmp.slope_diff_p:.2f})")
print("=> a uniform boost, not an interaction")

# --- annotator agreement upper bounds --------------------------------
# UB1 correlates one random rating with the mean of the rest; UB2
# correlates the means of two random halves of the crowd.  Group means
# are less noisy than single raters, so UB2 >= UB1; a model that beats
# UB1 is doing better than a typical human rater.
n_sent, n_annot = 60, 8
true_means = rng.uniform(1, 4, n_sent)
ratings = np.clip(np.rint(true_means[:, None]
                          + rng.normal(0, 0.7, (n_sent, n_annot))), 1, 4)
pool = {f"s{i:03d}": ratings[i].tolist() for i in range(n_sent)}
ub1 = ub_one_vs_rest(pool, n_trials=1000, seed=3)
ub2 = ub_half_vs_half(pool, n_trials=1000, seed=4)
print(f"\nupper bounds over {n_sent} sentences x {n_annot} raters: "
      f"UB1 = {ub1.value:.3f}, UB2 = {ub2.value:.3f}")

# sanity edges: identical raters hit 1.0 exactly; independent raters
# carry no shared signal at all
perfect = {f"s{i}": [float(1 + i % 4)] * 6 for i in range(30)}
print(f"perfect-agreement crowd: UB1 = "
      f"{ub_one_vs_rest(perfect, n_trials=200, seed=5).value}")
noise = {f"s{i}": rng.integers(1, 5, 8).astype(float).tolist()
         for i in range(200)}
print(f"independent-random crowd: UB1 = "
      f"{ub_one_vs_rest(noise, n_trials=200, seed=6).value:+.4f}")
