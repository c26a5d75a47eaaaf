"""Human-ratings pipeline: worker filter, calibration, outliers, means.

The pipeline is a fixed sequence of provenance stages::

    raw -> worker_filtered -> calibrated -> outlier_filtered -> (aggregate)

Each step checks the provenance of its input, so stages cannot be
skipped or reordered.  All three cleaning steps are single-pass:
statistics are computed once on the step's input and applied once
(removing an outlier does not trigger recomputation for the survivors).

* Worker filter: a worker is dropped (with all ratings) when the
  fraction of their ratings on ORIGINAL sentences at or above 3.0 falls
  below ``min_fraction`` (default 0.75).  Workers with no ratings on
  original sentences are retained and reported.
* Calibration: a worker whose mean rating is more than 1.0 above the
  grand mean (the mean of per-worker means) has 1.0 subtracted from all
  of their ratings; more than 1.0 below, 1.0 added.  Shifts preserve
  each worker's pairwise rating differences exactly.
* Outlier removal: within each (sentence, experiment) group a rating is
  removed when it lies more than 2 sample standard deviations (n-1
  denominator) from the group mean, both computed before any removal.
  Groups with fewer than 2 ratings are left untouched.

Every removal and adjustment lands in the audit, which serializes to
JSON for the pipeline's audit file.
"""
from __future__ import annotations

import enum
import json
import math
import os
from dataclasses import dataclass
from typing import Collection, Iterable, Mapping, Sequence

from .core import (
    ExperimentType,
    RatingRecord,
    ValidationError,
    atomic_write_text,
    repr_float,
)

DEFAULT_MIN_FRACTION = 0.75
DEFAULT_WORKER_THRESHOLD = 3.0
DEFAULT_OUTLIER_SD = 2.0


class Provenance(str, enum.Enum):
    RAW = "raw"
    WORKER_FILTERED = "worker_filtered"
    CALIBRATED = "calibrated"
    OUTLIER_FILTERED = "outlier_filtered"

    def __str__(self) -> str:  # pragma: no cover - cosmetic
        return self.value


@dataclass(frozen=True)
class RatingSet:
    """A batch of ratings tagged with how far through the pipeline it is."""

    records: tuple[RatingRecord, ...]
    provenance: Provenance = Provenance.RAW

    def __post_init__(self):
        object.__setattr__(self, "records", tuple(self.records))

    def __len__(self) -> int:
        return len(self.records)


def _require(rs: RatingSet, expected: Provenance, step: str) -> None:
    if rs.provenance is not expected:
        raise ValidationError(
            f"{step} expects {expected.value!r} ratings, got "
            f"{rs.provenance.value!r} (the pipeline order is raw -> "
            "worker_filtered -> calibrated -> outlier_filtered)")


# ---------------------------------------------------------------------------
# step audits
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WorkerRemoval:
    worker_id: str
    n_original_ratings: int
    fraction_ok: float


@dataclass(frozen=True)
class WorkerAdjustment:
    worker_id: str
    worker_mean: float
    grand_mean: float
    delta: float


@dataclass(frozen=True)
class RemovedRating:
    worker_id: str
    sentence_id: str
    experiment: ExperimentType
    rating: float
    group_mean: float
    group_sd: float


@dataclass(frozen=True)
class PipelineAudit:
    n_raw: int
    removed_workers: tuple[WorkerRemoval, ...]
    workers_without_originals: tuple[str, ...]
    adjustments: tuple[WorkerAdjustment, ...]
    removed_ratings: tuple[RemovedRating, ...]
    n_final: int
    warnings: tuple[str, ...]

    def to_json(self) -> dict:
        return {
            "n_raw": self.n_raw,
            "removed_workers": [
                {"worker_id": w.worker_id,
                 "n_original_ratings": w.n_original_ratings,
                 "fraction_ok": w.fraction_ok}
                for w in self.removed_workers],
            "workers_without_originals": list(self.workers_without_originals),
            "adjusted_workers": [
                {"worker_id": a.worker_id, "worker_mean": a.worker_mean,
                 "grand_mean": a.grand_mean, "delta": a.delta}
                for a in self.adjustments],
            "removed_ratings": [
                {"worker_id": r.worker_id, "sentence_id": r.sentence_id,
                 "experiment": r.experiment.value, "rating": r.rating,
                 "group_mean": r.group_mean, "group_sd": r.group_sd}
                for r in self.removed_ratings],
            "n_final": self.n_final,
            "warnings": list(self.warnings),
        }


# ---------------------------------------------------------------------------
# pipeline steps
# ---------------------------------------------------------------------------

def filter_workers(rs: RatingSet, original_ids: Collection[str],
                   min_fraction: float = DEFAULT_MIN_FRACTION,
                   threshold: float = DEFAULT_WORKER_THRESHOLD,
                   ) -> tuple[RatingSet, tuple[WorkerRemoval, ...], tuple[str, ...]]:
    """Drop workers who rate too many original sentences as unacceptable.

    Returns (filtered set, removals, workers retained for lack of any
    original-sentence ratings).
    """
    _require(rs, Provenance.RAW, "filter_workers")
    if not (0.0 <= min_fraction <= 1.0):
        raise ValidationError(
            f"min_fraction must be in [0, 1], got {min_fraction!r}")
    originals = set(original_ids)
    on_orig: dict[str, list[float]] = {}
    workers: dict[str, None] = {}
    for rec in rs.records:
        workers.setdefault(rec.worker_id)
        if rec.sentence_id in originals:
            on_orig.setdefault(rec.worker_id, []).append(rec.rating)
    removed: list[WorkerRemoval] = []
    without: list[str] = []
    drop: set[str] = set()
    for worker in sorted(workers):
        ratings = on_orig.get(worker)
        if not ratings:
            without.append(worker)
            continue
        frac = sum(1 for r in ratings if r >= threshold) / len(ratings)
        if frac < min_fraction:
            removed.append(WorkerRemoval(worker, len(ratings), frac))
            drop.add(worker)
    kept = tuple(r for r in rs.records if r.worker_id not in drop)
    return (RatingSet(kept, Provenance.WORKER_FILTERED),
            tuple(removed), tuple(without))


def calibrate(rs: RatingSet, max_distance: float = 1.0,
              ) -> tuple[RatingSet, tuple[WorkerAdjustment, ...]]:
    """Shift systematically harsh or lenient workers toward the grand mean."""
    _require(rs, Provenance.WORKER_FILTERED, "calibrate")
    by_worker: dict[str, list[float]] = {}
    for rec in rs.records:
        by_worker.setdefault(rec.worker_id, []).append(rec.rating)
    if not by_worker:
        return RatingSet((), Provenance.CALIBRATED), ()
    means = {w: math.fsum(rs_) / len(rs_) for w, rs_ in by_worker.items()}
    grand = math.fsum(means.values()) / len(means)
    deltas: dict[str, float] = {}
    adjustments: list[WorkerAdjustment] = []
    for worker in sorted(means):
        mean = means[worker]
        if mean - grand > max_distance:
            deltas[worker] = -1.0
        elif grand - mean > max_distance:
            deltas[worker] = 1.0
        else:
            continue
        adjustments.append(WorkerAdjustment(worker, mean, grand, deltas[worker]))
    out = tuple(r.shifted(deltas[r.worker_id]) if r.worker_id in deltas else r
                for r in rs.records)
    return RatingSet(out, Provenance.CALIBRATED), tuple(adjustments)


def remove_outliers(rs: RatingSet, k: float = DEFAULT_OUTLIER_SD,
                    ) -> tuple[RatingSet, tuple[RemovedRating, ...]]:
    """Drop ratings more than k sample SDs from their group mean."""
    _require(rs, Provenance.CALIBRATED, "remove_outliers")
    if not (k > 0):
        raise ValidationError(f"k must be positive, got {k!r}")
    groups: dict[tuple[str, ExperimentType], list[float]] = {}
    for rec in rs.records:
        groups.setdefault((rec.sentence_id, rec.experiment), []).append(rec.rating)
    stats: dict[tuple[str, ExperimentType], tuple[float, float]] = {}
    for key, values in groups.items():
        n = len(values)
        if n < 2:
            continue
        mean = math.fsum(values) / n
        var = math.fsum((v - mean) ** 2 for v in values) / (n - 1)
        stats[key] = (mean, math.sqrt(var))
    kept: list[RatingRecord] = []
    removed: list[RemovedRating] = []
    for rec in rs.records:
        st = stats.get((rec.sentence_id, rec.experiment))
        if st is not None and abs(rec.rating - st[0]) > k * st[1]:
            removed.append(RemovedRating(rec.worker_id, rec.sentence_id,
                                         rec.experiment, rec.rating,
                                         st[0], st[1]))
        else:
            kept.append(rec)
    return RatingSet(tuple(kept), Provenance.OUTLIER_FILTERED), tuple(removed)


# ---------------------------------------------------------------------------
# aggregation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MeanRating:
    sentence_id: str
    experiment: ExperimentType
    mean: float
    n_ratings: int


def aggregate(rs: RatingSet) -> list[MeanRating]:
    """Mean rating and count per (sentence, experiment) group."""
    _require(rs, Provenance.OUTLIER_FILTERED, "aggregate")
    groups: dict[tuple[str, str], list[float]] = {}
    exps: dict[tuple[str, str], ExperimentType] = {}
    for rec in rs.records:
        key = (rec.sentence_id, rec.experiment.value)
        groups.setdefault(key, []).append(rec.rating)
        exps[key] = rec.experiment
    return [MeanRating(sid, exps[(sid, exp)],
                       math.fsum(groups[(sid, exp)]) / len(groups[(sid, exp)]),
                       len(groups[(sid, exp)]))
            for sid, exp in sorted(groups)]


def ratings_by_sentence(rs: RatingSet, experiment: ExperimentType
                        ) -> dict[str, list[float]]:
    """Group one experiment's ratings by sentence (for the upper bounds)."""
    out: dict[str, list[float]] = {}
    for rec in rs.records:
        if rec.experiment is experiment:
            out.setdefault(rec.sentence_id, []).append(rec.rating)
    return out


# ---------------------------------------------------------------------------
# the full pipeline
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PipelineResult:
    ratings: RatingSet            # outlier_filtered
    calibrated: RatingSet         # the stage before outlier removal
    means: tuple[MeanRating, ...]
    audit: PipelineAudit


def run_pipeline(records: Iterable[RatingRecord], original_ids: Collection[str],
                 min_fraction: float = DEFAULT_MIN_FRACTION,
                 k: float = DEFAULT_OUTLIER_SD) -> PipelineResult:
    """raw -> worker filter -> calibration -> outlier removal -> means."""
    raw = RatingSet(tuple(records), Provenance.RAW)
    filtered, removals, without = filter_workers(raw, original_ids,
                                                 min_fraction=min_fraction)
    calibrated, adjustments = calibrate(filtered)
    final, removed = remove_outliers(calibrated, k=k)
    warnings = []
    if not original_ids:
        warnings.append(
            "no original sentence ids supplied: the worker filter retained "
            "all workers")
    for worker in without:
        warnings.append(
            f"worker {worker!r} has no ratings on original sentences and "
            "was retained unfiltered")
    audit = PipelineAudit(
        n_raw=len(raw), removed_workers=removals,
        workers_without_originals=without, adjustments=adjustments,
        removed_ratings=removed, n_final=len(final),
        warnings=tuple(warnings))
    return PipelineResult(ratings=final, calibrated=calibrated,
                          means=tuple(aggregate(final)), audit=audit)


# ---------------------------------------------------------------------------
# mean-ratings file
# ---------------------------------------------------------------------------

MEAN_RATINGS_HEADER = "sentence_id,experiment,mean,n_ratings"


def dumps_mean_ratings(means: Sequence[MeanRating]) -> str:
    lines = [MEAN_RATINGS_HEADER]
    for m in means:
        lines.append(f"{m.sentence_id},{m.experiment.value},"
                     f"{repr_float(m.mean)},{m.n_ratings}")
    return "\n".join(lines) + "\n"


def save_mean_ratings(means: Sequence[MeanRating], path: str | os.PathLike) -> None:
    atomic_write_text(path, dumps_mean_ratings(means))


def load_mean_ratings(path: str | os.PathLike) -> list[MeanRating]:
    path = os.fspath(path)
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0] != MEAN_RATINGS_HEADER:
        raise ValidationError(
            f"expected header {MEAN_RATINGS_HEADER!r}, got "
            f"{lines[0]!r}" if lines else "empty mean-ratings file", path=path)
    out: list[MeanRating] = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 4:
            raise ValidationError(f"expected 4 fields, got {len(parts)}",
                                  path=path, line=lineno)
        sid, exp_s, mean_s, n_s = parts
        try:
            exp = ExperimentType(exp_s)
        except ValueError:
            raise ValidationError(f"unknown experiment {exp_s!r}", path=path,
                                  line=lineno, field="experiment") from None
        try:
            mean = float(mean_s)
            n = int(n_s)
        except ValueError as e:
            raise ValidationError(f"bad numeric field: {e}", path=path,
                                  line=lineno) from None
        if not math.isfinite(mean):
            raise ValidationError("mean must be finite", path=path,
                                  line=lineno, field="mean")
        if n < 1:
            raise ValidationError(f"n_ratings must be >= 1, got {n}",
                                  path=path, line=lineno, field="n_ratings")
        out.append(MeanRating(sid, exp, mean, n))
    return out


def mean_ratings_sniff(path: str | os.PathLike) -> bool:
    """True when the file's header is the mean-ratings header (not raw)."""
    with open(os.fspath(path), encoding="utf-8") as fh:
        first = fh.readline().rstrip("\n")
    return first == MEAN_RATINGS_HEADER
