"""Statistics for the analysis pipeline.

Everything here is self-contained: p-values come from our own
regularized incomplete beta (Lentz's continued fraction) and the normal
CDF from math.erfc, so results are reproducible bit-for-bit across
environments.  numpy is used for the least-squares solve and for seeded
random number generation only.

Conventions:

* ``pearson`` computes sxy / sqrt(sxx * syy) with compensated sums; on
  two identical vectors the result is exactly 1.0.
* ``wilcoxon_one_tailed(x, y)`` tests whether x tends to exceed y: the
  statistic is W+, the sum of ranks of positive differences (zero
  differences dropped, average ranks for ties).  With at most 20 usable
  pairs the p-value is exact — a subset-sum count over doubled ranks,
  identical to full enumeration of all 2^m sign assignments — otherwise
  a normal approximation with tie correction and a 0.5 continuity
  correction is used.
* the regression comparison fits the stacked model
  y = b0 + b1*x + b2*g + b3*(x*g) (g = 0 for the base group, 1 for the
  other), so b2 is the offset between the lines and b3 the slope
  difference; with the full interaction the stacked fit reproduces the
  two per-group fits exactly.
* the upper bounds draw one child seed per trial from a SeedSequence, so
  results are reproducible for a given seed and trial counts can be
  changed without reshuffling earlier trials.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .core import NumericalError, ValidationError

__all__ = [
    "pearson",
    "WilcoxonResult",
    "wilcoxon_one_tailed",
    "regularized_incomplete_beta",
    "normal_cdf",
    "student_t_two_sided_p",
    "LineFit",
    "fit_line",
    "RegressionComparison",
    "compare_regression_lines",
    "UpperBoundResult",
    "ub_one_vs_rest",
    "ub_half_vs_half",
]


def _check_vector(v: Sequence[float], name: str, min_len: int) -> list[float]:
    out = [float(e) for e in v]
    if len(out) < min_len:
        raise ValidationError(
            f"{name} needs at least {min_len} elements, got {len(out)}")
    for e in out:
        if not math.isfinite(e):
            raise ValidationError(f"{name} contains a non-finite value")
    return out


# ---------------------------------------------------------------------------
# correlation
# ---------------------------------------------------------------------------

def pearson(x: Sequence[float], y: Sequence[float]) -> float:
    """Sample Pearson correlation; exact 1.0 on identical vectors."""
    xs = _check_vector(x, "x", 3)
    ys = _check_vector(y, "y", 3)
    if len(xs) != len(ys):
        raise ValidationError(
            f"length mismatch: {len(xs)} vs {len(ys)} elements")
    n = len(xs)
    mx = math.fsum(xs) / n
    my = math.fsum(ys) / n
    dx = [e - mx for e in xs]
    dy = [e - my for e in ys]
    sxy = math.fsum(a * b for a, b in zip(dx, dy))
    sxx = math.fsum(a * a for a in dx)
    syy = math.fsum(b * b for b in dy)
    if sxx == 0.0 or syy == 0.0:
        raise ValidationError("undefined correlation (zero variance)")
    r = sxy / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))


# ---------------------------------------------------------------------------
# normal / beta / t distribution functions
# ---------------------------------------------------------------------------

def normal_cdf(z: float) -> float:
    return 0.5 * math.erfc(-z / math.sqrt(2.0))


_BETACF_MAX_ITER = 300
_BETACF_EPS = 1e-15
_BETACF_FPMIN = 1e-300


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta (modified Lentz)."""
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _BETACF_FPMIN:
        d = _BETACF_FPMIN
    d = 1.0 / d
    h = d
    for m in range(1, _BETACF_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _BETACF_FPMIN:
            d = _BETACF_FPMIN
        c = 1.0 + aa / c
        if abs(c) < _BETACF_FPMIN:
            c = _BETACF_FPMIN
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _BETACF_FPMIN:
            d = _BETACF_FPMIN
        c = 1.0 + aa / c
        if abs(c) < _BETACF_FPMIN:
            c = _BETACF_FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _BETACF_EPS:
            return h
    raise NumericalError(
        "continued fraction for the incomplete beta did not converge "
        f"(a={a}, b={b}, x={x})")


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    """I_x(a, b), the regularized incomplete beta function."""
    if not (math.isfinite(a) and a > 0) or not (math.isfinite(b) and b > 0):
        raise ValidationError(f"shape parameters must be positive, got a={a}, b={b}")
    if not (0.0 <= x <= 1.0):
        raise ValidationError(f"x must be in [0, 1], got {x}")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    ln_bt = (math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
             + a * math.log(x) + b * math.log1p(-x))
    bt = math.exp(ln_bt)
    if x < (a + 1.0) / (a + b + 2.0):
        return bt * _betacf(a, b, x) / a
    return 1.0 - bt * _betacf(b, a, 1.0 - x) / b


def student_t_two_sided_p(t: float, df: float) -> float:
    """Two-sided p-value for a t statistic: I_{df/(df+t^2)}(df/2, 1/2)."""
    if not (df > 0):
        raise ValidationError(f"degrees of freedom must be positive, got {df}")
    if math.isinf(t):
        return 0.0
    if not math.isfinite(t):
        raise ValidationError("t statistic is not finite")
    return regularized_incomplete_beta(df / 2.0, 0.5, df / (df + t * t))


# ---------------------------------------------------------------------------
# Wilcoxon signed-rank, one-tailed
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WilcoxonResult:
    statistic: float        # W+, sum of ranks of positive differences
    p_value: float          # P(W+ >= observed) under the null
    n_pairs: int            # pairs used after dropping zero differences
    method: str             # "exact" | "normal-approximation"


def _average_ranks(values: Sequence[float]) -> tuple[list[float], list[int]]:
    """Ranks (1-based, average for ties) and the tie-group sizes."""
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    tie_sizes = []
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        avg = (i + j + 2) / 2.0  # mean of 1-based positions i+1 .. j+1
        for k in range(i, j + 1):
            ranks[order[k]] = avg
        tie_sizes.append(j - i + 1)
        i = j + 1
    return ranks, tie_sizes


_EXACT_LIMIT = 20


def wilcoxon_one_tailed(x: Sequence[float], y: Sequence[float]) -> WilcoxonResult:
    """One-tailed Wilcoxon signed-rank test of whether x tends to exceed y."""
    xs = _check_vector(x, "x", 1)
    ys = _check_vector(y, "y", 1)
    if len(xs) != len(ys):
        raise ValidationError(
            f"length mismatch: {len(xs)} vs {len(ys)} elements")
    diffs = [a - b for a, b in zip(xs, ys) if a != b]
    m = len(diffs)
    if m < 5:
        raise ValidationError(
            f"wilcoxon needs at least 5 nonzero paired differences, got {m}")
    ranks, tie_sizes = _average_ranks([abs(d) for d in diffs])
    w_plus = math.fsum(r for d, r in zip(diffs, ranks) if d > 0)

    if m <= _EXACT_LIMIT:
        # average ranks are multiples of 1/2, so doubled ranks are integers
        # and the null distribution of 2*W+ is a subset-sum count —
        # identical to enumerating all 2^m sign assignments
        doubled = [int(round(2.0 * r)) for r in ranks]
        counts: dict[int, int] = {0: 1}
        for dr in doubled:
            nxt = dict(counts)
            for s, c in counts.items():
                nxt[s + dr] = nxt.get(s + dr, 0) + c
            counts = nxt
        threshold = int(round(2.0 * w_plus))
        tail = sum(c for s, c in counts.items() if s >= threshold)
        return WilcoxonResult(statistic=w_plus, p_value=tail / 2 ** m,
                              n_pairs=m, method="exact")

    mean = m * (m + 1) / 4.0
    var = m * (m + 1) * (2 * m + 1) / 24.0 \
        - sum(t ** 3 - t for t in tie_sizes) / 48.0
    if var <= 0.0:
        raise ValidationError("degenerate rank variance (all differences tied)")
    z = (w_plus - mean - 0.5) / math.sqrt(var)
    return WilcoxonResult(statistic=w_plus, p_value=normal_cdf(-z),
                          n_pairs=m, method="normal-approximation")


# ---------------------------------------------------------------------------
# regression lines
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LineFit:
    slope: float
    intercept: float
    slope_se: float
    intercept_se: float
    r: float                # Pearson correlation of x and y
    n: int


@dataclass(frozen=True)
class RegressionComparison:
    base: LineFit
    other: LineFit
    offset: float           # intercept difference (other - base)
    offset_se: float
    offset_t: float
    offset_p: float
    slope_diff: float       # slope difference (other - base)
    slope_diff_se: float
    slope_diff_t: float
    slope_diff_p: float
    df: int


def _ols(X: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray, int]:
    """Least squares with classical standard errors; (beta, se, df)."""
    n, k = X.shape
    beta, _, rank, _ = np.linalg.lstsq(X, y, rcond=None)
    if rank < k:
        raise ValidationError("rank-deficient design matrix "
                              "(a predictor is constant or collinear)")
    df = n - k
    if df < 1:
        raise ValidationError(f"not enough observations: {n} rows for {k} "
                              "coefficients")
    resid = y - X @ beta
    s2 = float(resid @ resid) / df
    cov = s2 * np.linalg.inv(X.T @ X)
    se = np.sqrt(np.maximum(np.diag(cov), 0.0))
    return beta, se, df


def _t_and_p(coef: float, se: float, df: int) -> tuple[float, float]:
    if se == 0.0:
        # perfect fit: a nonzero coefficient is infinitely significant
        if coef == 0.0:
            return 0.0, 1.0
        return math.copysign(math.inf, coef), 0.0
    t = coef / se
    return t, student_t_two_sided_p(t, df)


def fit_line(x: Sequence[float], y: Sequence[float]) -> LineFit:
    """Simple least-squares line y = intercept + slope * x."""
    xs = _check_vector(x, "x", 3)
    ys = _check_vector(y, "y", 3)
    if len(xs) != len(ys):
        raise ValidationError(
            f"length mismatch: {len(xs)} vs {len(ys)} elements")
    X = np.column_stack([np.ones(len(xs)), np.asarray(xs)])
    beta, se, _ = _ols(X, np.asarray(ys))
    return LineFit(slope=float(beta[1]), intercept=float(beta[0]),
                   slope_se=float(se[1]), intercept_se=float(se[0]),
                   r=pearson(xs, ys), n=len(xs))


def compare_regression_lines(x: Sequence[float], y_base: Sequence[float],
                             y_other: Sequence[float]) -> RegressionComparison:
    """Offset and slope difference between two lines over a shared predictor.

    Fits y = b0 + b1*x + b2*g + b3*(x*g) on the stacked data (g = 0 for
    y_base rows, 1 for y_other rows); b2 is the vertical offset between
    the lines and b3 the slope difference, with classical t-test
    p-values on df = 2n - 4.
    """
    xs = _check_vector(x, "x", 10)
    yb = _check_vector(y_base, "y_base", 10)
    yo = _check_vector(y_other, "y_other", 10)
    if not (len(xs) == len(yb) == len(yo)):
        raise ValidationError(
            f"length mismatch: {len(xs)} x values vs {len(yb)} base and "
            f"{len(yo)} other responses")
    n = len(xs)
    xv = np.asarray(xs)
    g = np.concatenate([np.zeros(n), np.ones(n)])
    xx = np.concatenate([xv, xv])
    yy = np.concatenate([np.asarray(yb), np.asarray(yo)])
    X = np.column_stack([np.ones(2 * n), xx, g, xx * g])
    beta, se, df = _ols(X, yy)
    off_t, off_p = _t_and_p(float(beta[2]), float(se[2]), df)
    sd_t, sd_p = _t_and_p(float(beta[3]), float(se[3]), df)
    return RegressionComparison(
        base=fit_line(xs, yb), other=fit_line(xs, yo),
        offset=float(beta[2]), offset_se=float(se[2]),
        offset_t=off_t, offset_p=off_p,
        slope_diff=float(beta[3]), slope_diff_se=float(se[3]),
        slope_diff_t=sd_t, slope_diff_p=sd_p,
        df=df,
    )


# ---------------------------------------------------------------------------
# annotator agreement upper bounds
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class UpperBoundResult:
    value: float                  # mean per-trial Pearson r
    n_trials: int
    n_sentences: int              # sentences entering the correlation
    excluded: tuple[str, ...]     # sentence ids with fewer than 2 ratings


def _ub_prepare(ratings_by_sentence: Mapping[str, Sequence[float]],
                n_trials: int) -> tuple[list[tuple[float, ...]], tuple[str, ...]]:
    if n_trials < 1:
        raise ValidationError(f"n_trials must be >= 1, got {n_trials}")
    kept, excluded = [], []
    for sid in sorted(ratings_by_sentence):
        rs = tuple(float(r) for r in ratings_by_sentence[sid])
        if len(rs) < 2:
            excluded.append(sid)
        else:
            kept.append(rs)
    if len(kept) < 3:
        raise ValidationError(
            "upper bounds need at least 3 sentences with 2 or more ratings, "
            f"got {len(kept)}")
    return kept, tuple(excluded)


def _trial_rngs(seed: int, n_trials: int) -> list[np.random.Generator]:
    children = np.random.SeedSequence(seed).spawn(n_trials)
    return [np.random.Generator(np.random.PCG64(c)) for c in children]


def ub_one_vs_rest(ratings_by_sentence: Mapping[str, Sequence[float]],
                   n_trials: int = 1000, seed: int = 0) -> UpperBoundResult:
    """Mean correlation of one random rating against the mean of the rest.

    Per trial, for every sentence one rating is drawn at random and
    correlated (across sentences) with the mean of that sentence's
    remaining ratings; the result is the mean r over trials.
    """
    kept, excluded = _ub_prepare(ratings_by_sentence, n_trials)
    totals = [math.fsum(rs) for rs in kept]
    trial_rs = []
    for rng in _trial_rngs(seed, n_trials):
        xs, ys = [], []
        for rs, total in zip(kept, totals):
            i = int(rng.integers(len(rs)))
            xs.append(rs[i])
            ys.append((total - rs[i]) / (len(rs) - 1))
        trial_rs.append(pearson(xs, ys))
    return UpperBoundResult(value=math.fsum(trial_rs) / n_trials,
                            n_trials=n_trials, n_sentences=len(kept),
                            excluded=excluded)


def ub_half_vs_half(ratings_by_sentence: Mapping[str, Sequence[float]],
                    n_trials: int = 1000, seed: int = 0) -> UpperBoundResult:
    """Mean correlation between mean ratings of two random halves.

    Per trial, each sentence's ratings are randomly split into halves of
    floor(n/2) and ceil(n/2); the two half-means are correlated across
    sentences and the result is the mean r over trials.
    """
    kept, excluded = _ub_prepare(ratings_by_sentence, n_trials)
    arrays = [np.asarray(rs) for rs in kept]
    trial_rs = []
    for rng in _trial_rngs(seed, n_trials):
        xs, ys = [], []
        for arr in arrays:
            perm = rng.permutation(len(arr))
            half = len(arr) // 2
            xs.append(math.fsum(arr[perm[:half]]) / half)
            ys.append(math.fsum(arr[perm[half:]]) / (len(arr) - half))
        trial_rs.append(pearson(xs, ys))
    return UpperBoundResult(value=math.fsum(trial_rs) / n_trials,
                            n_trials=n_trials, n_sentences=len(kept),
                            excluded=excluded)
